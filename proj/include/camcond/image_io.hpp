// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "camcond/image.hpp"

namespace camcond {

/// 8-bit PNG, 1 or 3 channels. Reads strip alpha and expand palettes;
/// 16-bit files are rejected here (use read_png16).
Image8 read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image8& image);

/// 16-bit single-channel PNG (depth-in-millimeters convention).
Image16 read_png16(const std::filesystem::path& path);
void write_png16(const std::filesystem::path& path, const Image16& image);

/// Grayscale PFM, little-endian f32, standard bottom-up row order.
ImageF read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const ImageF& image);

}  // namespace camcond
