#include "etho/util/csv.hpp"

#include <charconv>
#include <fstream>

#include "etho/error.hpp"
#include "etho/util/text.hpp"

namespace etho::util {

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table '" + path.string() + "'");
  return parse(in, path.string());
}

CsvTable CsvTable::parse(std::istream& in, const std::string& source_name) {
  CsvTable table;
  table.source_ = source_name;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, ',');
    for (auto& f : fields) f = std::string(trim(f));
    if (table.header_.empty()) {
      table.header_ = fields;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (!table.index_.emplace(fields[i], i).second) {
          throw ValidationError(source_name + ": duplicate column '" + fields[i] + "'");
        }
      }
      continue;
    }
    if (fields.size() != table.header_.size()) {
      throw ValidationError(source_name + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header_.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    table.rows_.push_back(std::move(fields));
  }
  if (table.header_.empty()) throw ValidationError(source_name + ": missing header row");
  return table;
}

void CsvTable::require_columns(const std::vector<std::string>& columns) const {
  for (const auto& c : columns) {
    if (!index_.contains(c)) throw ValidationError(source_ + ": missing column '" + c + "'");
  }
}

std::size_t CsvTable::column_index(std::string_view column) const {
  auto it = index_.find(column);
  if (it == index_.end()) {
    throw ValidationError(source_ + ": missing column '" + std::string(column) + "'");
  }
  return it->second;
}

const std::string& CsvTable::str(std::size_t row, std::string_view column) const {
  return rows_.at(row)[column_index(column)];
}

double CsvTable::num(std::size_t row, std::string_view column) const {
  const auto& s = str(row, column);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(source_ + ": row " + std::to_string(row + 1) + " column '" +
                          std::string(column) + "': not a number: '" + s + "'");
  }
  return v;
}

long long CsvTable::integer(std::size_t row, std::string_view column) const {
  const auto& s = str(row, column);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(source_ + ": row " + std::to_string(row + 1) + " column '" +
                          std::string(column) + "': not an integer: '" + s + "'");
  }
  return v;
}

}  // namespace etho::util
