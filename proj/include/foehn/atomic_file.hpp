#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>

namespace foehn {

/// Writes through a temporary sibling file and renames it into place, so a
/// failed write never leaves a partial `path` behind.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& write);

/// Fills a temporary sibling directory and swaps it in for `dir`.
void write_directory_atomic(const std::filesystem::path& dir,
                            const std::function<void(const std::filesystem::path&)>& fill);

} // namespace foehn
