#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace secgen {

// FNV-1a 64-bit. Used for artifact/config digests and change detection,
// not for anything security-relevant.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Splits text into lines. A trailing newline does not produce an empty
// final line; a '\r' directly before a line break is stripped.
std::vector<std::string> split_lines(std::string_view text);

// Joins lines [start, end] (1-based, inclusive) back into text with a
// trailing newline. Out-of-range ends are clamped.
std::string slice_lines(const std::vector<std::string>& lines, long start, long end);

std::string read_file(const std::filesystem::path& path);

// Writes via a temp file in the same directory followed by a rename, so
// a partially written file is never observable under the final name.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

bool starts_with(std::string_view text, std::string_view prefix);

std::string trim(std::string_view text);

} // namespace secgen
