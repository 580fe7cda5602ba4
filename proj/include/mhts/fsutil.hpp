#pragma once

#include <filesystem>
#include <string>

namespace mhts {

std::string read_file(const std::filesystem::path& path);

// Writes to <path>.tmp.<pid> then renames, so readers never observe a
// half-written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

void ensure_dir(const std::filesystem::path& dir);

}  // namespace mhts
