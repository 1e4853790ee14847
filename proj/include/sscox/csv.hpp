#pragma once

#include <string>
#include <vector>

namespace sscox {

// Minimal CSV support: comma-separated, one header row, UTF-8, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

}  // namespace sscox
