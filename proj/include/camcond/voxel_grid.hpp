// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <vector>

#include "camcond/camera.hpp"

namespace camcond {

/// Axis-aligned voxel grid with fixed physical extent, centered on the
/// trajectory's camera origins.
struct VoxelGrid {
    Eigen::Vector3i resolution{1, 1, 1};
    Eigen::Vector3d extent{1.0, 1.0, 1.0};  // side lengths, meters
    Eigen::Vector3d center{0.0, 0.0, 0.0};
    int feature_dim = 0;

    VoxelGrid() = default;
    VoxelGrid(const Eigen::Vector3i& resolution, const Eigen::Vector3d& extent,
              const Eigen::Vector3d& center, int feature_dim);

    Eigen::Vector3d min_corner() const { return center - 0.5 * extent; }
    Eigen::Vector3d voxel_size() const { return extent.cwiseQuotient(resolution.cast<double>()); }
    int voxel_count() const { return resolution.x() * resolution.y() * resolution.z(); }

    /// x-fastest linearization: (z * ny + y) * nx + x.
    int linear_index(const Eigen::Vector3i& cell) const {
        return (cell.z() * resolution.y() + cell.y()) * resolution.x() + cell.x();
    }
    Eigen::Vector3i cell_of(int linear) const {
        const int nx = resolution.x(), ny = resolution.y();
        return {linear % nx, (linear / nx) % ny, linear / (nx * ny)};
    }
    bool contains_cell(const Eigen::Vector3i& cell) const {
        return (cell.array() >= 0).all() && (cell.array() < resolution.array()).all();
    }
};

/// Grid centered at the arithmetic mean of all camera centers.
VoxelGrid build_grid(const CameraTrajectory& trajectory, const Eigen::Vector3i& resolution,
                     const Eigen::Vector3d& extent, int feature_dim);

struct VoxelSegment {
    Eigen::Vector3i cell;
    double t_entry = 0.0;
    double t_exit = 0.0;
};

/// All voxels whose interior the ray crosses for t > 0, in increasing t
/// order (incremental grid stepping). Contiguous segments share their
/// boundary parameter exactly: t_exit[k] == t_entry[k+1]. A ray that
/// misses the grid yields an empty list. Requires a unit direction.
std::vector<VoxelSegment> traverse(const Ray& ray, const VoxelGrid& grid);

}  // namespace camcond
