#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace maims::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Collapses every run of whitespace to one space, trims, and ASCII-casefolds.
/// This is the normalization used for evidence matching.
std::string normalize_for_match(std::string_view s);

bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);

std::string read_file(const std::string& path);
/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_file_atomic(const std::string& path, std::string_view content);

/// SHA-256 of `data`, lowercase hex.
std::string sha256_hex(std::string_view data);

/// Shortest round-trip decimal rendering of a double.
std::string format_number(double v);

} // namespace maims::text
