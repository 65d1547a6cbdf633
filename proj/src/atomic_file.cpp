#include "foehn/atomic_file.hpp"

#include "foehn/errors.hpp"

#include <fstream>

namespace foehn {

namespace fs = std::filesystem;

namespace {

fs::path temp_sibling(const fs::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    return tmp;
}

} // namespace

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& write) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const auto tmp = temp_sibling(path);
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot open " + tmp.string() + " for writing");
            write(out);
            out.flush();
            if (!out) throw Error("write to " + tmp.string() + " failed");
        }
        fs::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

void write_directory_atomic(const fs::path& dir, const std::function<void(const fs::path&)>& fill) {
    const auto tmp = temp_sibling(dir);
    std::error_code ec;
    fs::remove_all(tmp, ec);
    try {
        fs::create_directories(tmp);
        fill(tmp);
        fs::remove_all(dir);
        fs::rename(tmp, dir);
    } catch (...) {
        fs::remove_all(tmp, ec);
        throw;
    }
}

} // namespace foehn
