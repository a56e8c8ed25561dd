#pragma once

#include <string>
#include <vector>

namespace noclat {

// Comma-separated values with a mandatory header row. Fields never contain
// commas or quotes; decimals always use '.' regardless of locale.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Fixed six-decimal rendering so emitted files are byte-stable.
std::string fixed6(double v);

std::string to_csv_string(const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace noclat
