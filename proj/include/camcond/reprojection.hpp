// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "camcond/camera.hpp"
#include "camcond/image.hpp"

namespace camcond {

/// Per-pixel metric depth in meters. Entries with valid == 0 carry no
/// depth; valid entries must be positive and finite.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    DepthMap() = default;
    DepthMap(int w, int h)
        : width(w), height(h),
          values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0),
          valid(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    void set(int x, int y, double depth) {
        values[index(x, y)] = depth;
        valid[index(x, y)] = 1;
    }
    double at(int x, int y) const { return values[index(x, y)]; }
    bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }

    /// Throws ContractError if any valid entry is non-positive or non-finite.
    void check() const;
};

struct CloudPoint {
    Eigen::Vector3d position;  // world, meters
    Rgb8 color;
    int src_x = 0;  // source pixel in frame 0
    int src_y = 0;
};

struct PointCloud {
    std::vector<CloudPoint> points;
};

/// Frame-0 reprojection result: one RGB frame and one visibility mask per
/// pose. mask != 0 marks pixels originating from frame 0; everywhere else
/// the frame holds background_color exactly.
struct ReprojectedVideo {
    std::vector<Image8> frames;          // W x H x 3
    std::vector<Image8> masks;           // W x H x 1, values 0/1
    Rgb8 background_color{255, 0, 255};  // saturated magenta
};

/// Lifts every valid-depth pixel of the image to a world point using the
/// frame-0 camera. Point order is row-major over source pixels.
PointCloud unproject_frame(const Image8& image, const DepthMap& depth, const CameraPose& pose0);

/// Z-buffered 1x1-pixel splatting. Nearest camera depth wins; exact depth
/// ties go to the lowest source-pixel row-major index, so the result is
/// identical regardless of point order.
std::pair<Image8, Image8> render_pointcloud(const PointCloud& cloud, const CameraPose& pose,
                                            Rgb8 background);

/// Reprojects the initial frame onto every pose of the trajectory.
ReprojectedVideo reproject_sequence(const Image8& image, const DepthMap& depth,
                                    const CameraTrajectory& trajectory,
                                    Rgb8 background = Rgb8{255, 0, 255});

}  // namespace camcond
