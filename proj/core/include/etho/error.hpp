#pragma once

#include <stdexcept>
#include <string>

namespace etho {

// Broad failure classes; the CLI maps each to an exit code.
enum class ErrorClass {
  kConfig,      // bad or missing configuration / IO
  kValidation,  // input data violates a documented invariant
  kGeometry,    // numerical degeneracy
  kClient,      // perception client failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorClass::kConfig, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorClass::kValidation, what) {}
};

class DegenerateDepth : public Error {
 public:
  explicit DegenerateDepth(const std::string& what) : Error(ErrorClass::kGeometry, what) {}
};

class InsufficientViews : public Error {
 public:
  explicit InsufficientViews(const std::string& what) : Error(ErrorClass::kGeometry, what) {}
};

class DegenerateGeometry : public Error {
 public:
  explicit DegenerateGeometry(const std::string& what) : Error(ErrorClass::kGeometry, what) {}
};

class NoConsensus : public Error {
 public:
  explicit NoConsensus(const std::string& what) : Error(ErrorClass::kGeometry, what) {}
};

class EmptyBBox : public Error {
 public:
  explicit EmptyBBox(const std::string& what) : Error(ErrorClass::kValidation, what) {}
};

class DegenerateCluster : public Error {
 public:
  explicit DegenerateCluster(const std::string& what) : Error(ErrorClass::kGeometry, what) {}
};

// Both client errors keep the last raw response for auditing.
class ClientSchemaError : public Error {
 public:
  ClientSchemaError(const std::string& what, std::string raw, int attempts)
      : Error(ErrorClass::kClient, what), raw_(std::move(raw)), attempts_(attempts) {}
  const std::string& raw_text() const noexcept { return raw_; }
  int attempts() const noexcept { return attempts_; }

 private:
  std::string raw_;
  int attempts_;
};

class ClientUnavailable : public Error {
 public:
  explicit ClientUnavailable(const std::string& what, std::string raw = {})
      : Error(ErrorClass::kClient, what), raw_(std::move(raw)) {}
  const std::string& raw_text() const noexcept { return raw_; }

 private:
  std::string raw_;
};

// Process exit code for an error class: 1 config/IO, 2 validation, 3 client.
int exit_code_for(const Error& e) noexcept;

}  // namespace etho
