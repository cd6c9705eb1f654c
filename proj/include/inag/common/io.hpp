#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace inag {

/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string digest_hex(std::string_view bytes);

}  // namespace inag
