// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <string>

namespace camcond {

/// Writes a file atomically: content goes to a sibling temp file which is
/// renamed over the target, so interrupted runs never leave partial files.
/// The writer callback receives the temp path.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(const std::filesystem::path&)>& writer);

/// atomic_write specialization for in-memory content.
void atomic_write_bytes(const std::filesystem::path& path, const std::string& bytes);

std::string read_file_bytes(const std::filesystem::path& path);

}  // namespace camcond
