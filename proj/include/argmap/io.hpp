#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace argmap::io {

// Writes `contents` to a sibling temp file and renames it over `path`, so
// readers never observe a partially written file.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// RFC 4180 quoting: fields containing a comma, quote or line break are quoted.
std::string csv_field(std::string_view s);
std::string csv_row(const std::vector<std::string>& fields);
std::vector<std::string> parse_csv_row(std::string_view line);

// Shortest decimal form that round-trips, so CSV output is reproducible.
std::string format_double(double v);

}  // namespace argmap::io
