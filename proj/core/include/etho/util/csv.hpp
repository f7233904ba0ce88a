#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace etho::util {

// Minimal comma-separated table with a mandatory header row. Fields may not
// contain commas or quotes; every file this project writes respects that.
class CsvTable {
 public:
  static CsvTable read(const std::filesystem::path& path);
  static CsvTable parse(std::istream& in, const std::string& source_name);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  // Throws ValidationError naming the file, row and column on failure.
  const std::string& str(std::size_t row, std::string_view column) const;
  double num(std::size_t row, std::string_view column) const;
  long long integer(std::size_t row, std::string_view column) const;

  void require_columns(const std::vector<std::string>& columns) const;

 private:
  std::size_t column_index(std::string_view column) const;

  std::string source_;
  std::vector<std::string> header_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace etho::util
