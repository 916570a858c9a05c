// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "camcond/camera.hpp"
#include "camcond/voxel_grid.hpp"

namespace camcond {

struct VoxelHit {
    std::int32_t voxel = 0;  // linear voxel index
    double t_entry = 0.0;
    double t_exit = 0.0;
};

struct PixelHit {
    std::int32_t frame = 0;
    std::int32_t pixel = 0;  // row-major index in the downsampled image
    double t_entry = 0.0;
};

/// Pixel <-> voxel traversal lists for every ray of every frame, plus the
/// exact transpose. per_ray lists are ordered along the ray; per_voxel
/// lists are ordered by ascending t_entry (ties by frame, then pixel).
struct SparseIncidence {
    int frames = 0;
    int width = 0;   // downsampled
    int height = 0;
    Eigen::Vector3i resolution{0, 0, 0};

    std::vector<std::vector<VoxelHit>> per_ray;
    std::vector<std::vector<PixelHit>> per_voxel;

    std::size_t ray_index(int frame, int x, int y) const {
        return (static_cast<std::size_t>(frame) * static_cast<std::size_t>(height) +
                static_cast<std::size_t>(y)) *
                   static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
};

/// Casts one ray per downsampled pixel center per frame. downsample must
/// divide both image dimensions.
SparseIncidence build_incidence(const CameraTrajectory& trajectory, const VoxelGrid& grid,
                                int downsample);

/// Binary incidence format: header (magic "CCVI", u32 nx, ny, nz, frames,
/// width, height) then, per pixel in (frame, row-major) order, a varint
/// list length followed by (u32 voxel, f32 t_entry, f32 t_exit) entries.
void write_ccvi(const std::filesystem::path& path, const SparseIncidence& incidence);
SparseIncidence read_ccvi(const std::filesystem::path& path);

}  // namespace camcond
