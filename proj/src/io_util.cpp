// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/io_util.hpp"

#include <fstream>
#include <system_error>

#include "camcond/error.hpp"

namespace camcond {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::function<void(const fs::path&)>& writer) {
    fs::path tmp = path;
    tmp += ".tmp";
    try {
        writer(tmp);
        fs::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

void atomic_write_bytes(const fs::path& path, const std::string& bytes) {
    atomic_write(path, [&](const fs::path& tmp) {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    });
}

std::string read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed for " + path.string());
    return bytes;
}

}  // namespace camcond
