#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace alloyopt::io {

/// Splits one comma-delimited line. No quoting; cells are returned verbatim.
std::vector<std::string_view> split_csv(std::string_view line);

/// Parses a decimal number ('.' separator, optional exponent) with no surrounding
/// whitespace. Returns false on any trailing garbage or non-finite value.
bool parse_double(std::string_view text, double& out);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Reads a whole file into lines, stripping a trailing '\r' from each.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace alloyopt::io
