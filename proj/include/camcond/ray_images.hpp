// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "camcond/camera.hpp"
#include "camcond/image.hpp"

namespace camcond {

/// Per-frame camera-ray conditioning images. Directions are stored as
/// (d+1)/2 so every channel lies in [0,1]; origins are raw meters after the
/// shared positive-octant offset, constant across each frame.
struct RayImagePair {
    int frame_index = 0;
    ImageF directions;               ///< W x H x 3, values in [0,1]
    ImageF origins;                  ///< W x H x 3, meters, >= 0
    Eigen::Vector3d offset_applied = Eigen::Vector3d::Zero();
};

/// Smallest per-axis shift that puts every camera center at least 1e-3 m
/// into the positive octant: delta = max(0, 1e-3 - min_i center_i) per axis.
Eigen::Vector3d compute_octant_offset(const CameraTrajectory& trajectory);

/// Renders the direction/origin image pair for every frame. One offset is
/// shared by the whole sequence so inter-frame motion stays visible.
std::vector<RayImagePair> render_ray_images(const CameraTrajectory& trajectory);

inline Eigen::Vector3d encode_direction(const Eigen::Vector3d& d) { return (d.array() + 1.0) * 0.5; }
inline Eigen::Vector3d decode_direction(const Eigen::Vector3d& v) { return v.array() * 2.0 - 1.0; }

/// Raw float image file: 16-byte header (magic "CCRI", u32 width, u32
/// height, u32 channels, little-endian) followed by row-major f32 data.
void write_ccri(const std::filesystem::path& path, const ImageF& image);
ImageF read_ccri(const std::filesystem::path& path);

}  // namespace camcond
