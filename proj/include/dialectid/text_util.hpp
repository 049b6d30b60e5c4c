#pragma once

// Small text and file helpers shared by the readers and writers.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dialectid {

std::string_view trim(std::string_view s);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view text);

// Splits one CSV record on commas. Fields may be double-quoted ("" escapes a
// quote); quoted fields may contain commas but not newlines.
std::vector<std::string> split_csv_record(std::string_view line);

// Quotes a CSV field only if it contains a comma, quote or whitespace edge.
std::string csv_field(std::string_view s);

// `significant` significant digits, %g style ("%.6g" for the features file).
std::string format_g(double value, int significant);

// Shortest representation that parses back to the same double.
std::string format_shortest(double value);

// Whole-token parse; false on junk, overflow or non-finite values.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
void write_file(const std::filesystem::path& path, const std::vector<std::byte>& content);

}  // namespace dialectid
