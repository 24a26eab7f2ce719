#pragma once

#include <string>

namespace fdlpv {

// Shortest decimal form that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

[[nodiscard]] std::string read_file(const std::string& path);

} // namespace fdlpv
