#include "etho/error.hpp"

namespace etho {

int exit_code_for(const Error& e) noexcept {
  switch (e.error_class()) {
    case ErrorClass::kConfig:
      return 1;
    case ErrorClass::kValidation:
    case ErrorClass::kGeometry:
      return 2;
    case ErrorClass::kClient:
      return 3;
  }
  return 1;
}

}  // namespace etho
