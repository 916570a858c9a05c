// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/voxel_grid.hpp"

#include <cmath>
#include <limits>

#include "camcond/error.hpp"

namespace camcond {

VoxelGrid::VoxelGrid(const Eigen::Vector3i& resolution_, const Eigen::Vector3d& extent_,
                     const Eigen::Vector3d& center_, int feature_dim_)
    : resolution(resolution_), extent(extent_), center(center_), feature_dim(feature_dim_) {
    if ((resolution.array() < 1).any())
        throw ContractError("voxel grid: resolution components must be >= 1");
    if (!(extent.array() > 0.0).all() || !extent.allFinite())
        throw ContractError("voxel grid: extent must be positive");
    if (!center.allFinite()) throw ContractError("voxel grid: center must be finite");
    if (feature_dim < 0) throw ContractError("voxel grid: feature_dim must be >= 0");
}

VoxelGrid build_grid(const CameraTrajectory& trajectory, const Eigen::Vector3i& resolution,
                     const Eigen::Vector3d& extent, int feature_dim) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const CameraPose& pose : trajectory) sum += camera_center(pose.extrinsics);
    return VoxelGrid(resolution, extent, sum / static_cast<double>(trajectory.size()),
                     feature_dim);
}

std::vector<VoxelSegment> traverse(const Ray& ray, const VoxelGrid& grid) {
    if (std::abs(ray.direction.norm() - 1.0) > 1e-9)
        throw ContractError("traverse: ray direction must be unit length");

    const Eigen::Vector3d lo = grid.min_corner();
    const Eigen::Vector3d hi = lo + grid.extent;

    // clip the ray to the grid box
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double d = ray.direction[a];
        const double o = ray.origin[a];
        if (d == 0.0) {
            if (o <= lo[a] || o >= hi[a]) return {};
            continue;
        }
        double ta = (lo[a] - o) / d;
        double tb = (hi[a] - o) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (!(t0 < t1)) return {};

    const Eigen::Vector3d size = grid.voxel_size();
    const Eigen::Vector3d entry = ray.origin + t0 * ray.direction;

    Eigen::Vector3i cell;
    Eigen::Vector3i step;
    Eigen::Vector3d t_next;   // t of the next boundary crossing per axis
    Eigen::Vector3d t_delta;  // t advance per whole voxel per axis
    for (int a = 0; a < 3; ++a) {
        const double local = (entry[a] - lo[a]) / size[a];
        int c = static_cast<int>(std::floor(local));
        c = std::min(std::max(c, 0), grid.resolution[a] - 1);
        cell[a] = c;
        const double d = ray.direction[a];
        if (d > 0.0) {
            step[a] = 1;
            t_next[a] = ((c + 1) * size[a] + lo[a] - ray.origin[a]) / d;
            t_delta[a] = size[a] / d;
        } else if (d < 0.0) {
            step[a] = -1;
            t_next[a] = (c * size[a] + lo[a] - ray.origin[a]) / d;
            t_delta[a] = -size[a] / d;
        } else {
            step[a] = 0;
            t_next[a] = std::numeric_limits<double>::infinity();
            t_delta[a] = std::numeric_limits<double>::infinity();
        }
    }

    std::vector<VoxelSegment> segments;
    double t_cur = t0;
    while (true) {
        int axis = 0;
        if (t_next[1] < t_next[axis]) axis = 1;
        if (t_next[2] < t_next[axis]) axis = 2;
        const double t_boundary = std::min(t_next[axis], t1);
        if (t_boundary > t_cur) segments.push_back({cell, t_cur, t_boundary});
        if (t_next[axis] >= t1) break;
        t_cur = t_next[axis];
        cell[axis] += step[axis];
        if (cell[axis] < 0 || cell[axis] >= grid.resolution[axis]) break;
        t_next[axis] += t_delta[axis];
    }
    return segments;
}

}  // namespace camcond
