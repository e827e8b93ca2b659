#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mlpdyn {

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, std::string_view content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> values;
};

// Numeric CSV with a header row. Throws FormatError on ragged rows or
// cells that are not complete numbers. `origin` names the source in errors.
CsvTable parse_csv(std::string_view text, std::string_view origin);

}  // namespace mlpdyn
