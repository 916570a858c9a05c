// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <vector>

namespace camcond {

/// Dense feature video, layout (frame, y, x, channel) with channels
/// contiguous per pixel.
struct FeatureVideo {
    int frames = 0;
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;
    std::vector<int> frame_indices;  // source frame per slot

    FeatureVideo() = default;
    FeatureVideo(int frames_, int height_, int width_, int channels_)
        : frames(frames_), height(height_), width(width_), channels(channels_),
          data(static_cast<std::size_t>(frames_) * height_ * width_ * channels_, 0.0) {
        frame_indices.resize(static_cast<std::size_t>(frames_));
        for (int f = 0; f < frames_; ++f) frame_indices[static_cast<std::size_t>(f)] = f;
    }

    std::size_t pixel_offset(int f, int y, int x) const {
        return ((static_cast<std::size_t>(f) * height + y) * width + x) *
               static_cast<std::size_t>(channels);
    }
    double& at(int f, int y, int x, int c) { return data[pixel_offset(f, y, x) + c]; }
    double at(int f, int y, int x, int c) const { return data[pixel_offset(f, y, x) + c]; }

    Eigen::Map<Eigen::VectorXd> pixel(int f, int y, int x) {
        return {data.data() + pixel_offset(f, y, x), channels};
    }
    Eigen::Map<const Eigen::VectorXd> pixel(int f, int y, int x) const {
        return {data.data() + pixel_offset(f, y, x), channels};
    }

    bool same_shape(const FeatureVideo& o) const {
        return frames == o.frames && height == o.height && width == o.width &&
               channels == o.channels;
    }
    std::size_t size() const { return data.size(); }
};

/// Per-voxel feature vectors, voxel-major with the same x-fastest linear
/// index as VoxelGrid.
struct VoxelFeatures {
    Eigen::Vector3i resolution{0, 0, 0};
    int channels = 0;
    std::vector<double> data;

    VoxelFeatures() = default;
    VoxelFeatures(const Eigen::Vector3i& resolution_, int channels_)
        : resolution(resolution_), channels(channels_),
          data(static_cast<std::size_t>(resolution_.x()) * resolution_.y() * resolution_.z() *
                   channels_,
               0.0) {}

    int voxel_count() const { return resolution.x() * resolution.y() * resolution.z(); }

    Eigen::Map<Eigen::VectorXd> voxel(int linear) {
        return {data.data() + static_cast<std::size_t>(linear) * channels, channels};
    }
    Eigen::Map<const Eigen::VectorXd> voxel(int linear) const {
        return {data.data() + static_cast<std::size_t>(linear) * channels, channels};
    }

    bool same_shape(const VoxelFeatures& o) const {
        return resolution == o.resolution && channels == o.channels;
    }
};

}  // namespace camcond
