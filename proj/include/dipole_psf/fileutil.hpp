#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dpsf::io {

/// Writes bytes to a sibling temporary file and renames it over path.
/// Throws IoError naming the path on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

/// printf("%.17g"), which round-trips every double.
std::string format_double(double v);

}  // namespace dpsf::io
