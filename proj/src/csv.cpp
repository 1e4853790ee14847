#include "sscox/csv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sscox {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<int>(j);
  }
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  strip_cr(line);
  table.header = split_line(line);
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    auto row = split_line(line);
    if (row.size() != table.header.size()) {
      throw std::runtime_error("row with " + std::to_string(row.size()) +
                               " fields, expected " + std::to_string(table.header.size()) +
                               " in " + path);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace sscox
