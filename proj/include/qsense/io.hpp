#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qsense {

// Plain CSV: header row, comma separator, shortest-round-trip numbers,
// '\n' line endings, no quoting (column names must not contain commas).
std::string make_csv(const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

// Write via a temp file in the same directory and rename into place, so a
// failed run never leaves a partial file behind.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// Ensures dir exists (creating parents as needed) and is writable; throws
// otherwise.
void require_writable_dir(const std::filesystem::path& dir);

}  // namespace qsense
