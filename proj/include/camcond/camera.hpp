// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

namespace camcond {

/// Pinhole intrinsics. Pixel (i, j) covers [i, i+1) x [j, j+1) with its
/// center at (i+0.5, j+0.5); fx/fy/cx/cy are expressed in that continuous
/// image-plane coordinate system.
struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.5;
    double cy = 0.5;
    int width = 1;
    int height = 1;

    Intrinsics() = default;
    Intrinsics(double fx, double fy, double cx, double cy, int width, int height);

    /// Intrinsics of the same camera rendered at width/factor x height/factor.
    Intrinsics downsampled(int factor) const;
};

/// World-to-camera rigid transform: x_cam = R * x_world + t. The camera
/// looks along +z in camera space, image y points down.
struct Extrinsics {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Extrinsics() = default;
    Extrinsics(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

    /// The 12 entries of [R|t], R row-major followed by t.
    std::array<double, 12> entries() const;
};

/// Camera origin in world space, o = -R^T t.
Eigen::Vector3d camera_center(const Extrinsics& extrinsics);

struct CameraPose {
    Intrinsics intrinsics;
    Extrinsics extrinsics;
    int frame_index = 0;
};

/// Ordered pose sequence with shared image dimensions and frame indices
/// 0..N consecutive. Immutable after construction.
class CameraTrajectory {
public:
    explicit CameraTrajectory(std::vector<CameraPose> poses);

    std::size_t size() const { return poses_.size(); }
    const CameraPose& operator[](std::size_t i) const { return poses_[i]; }
    const std::vector<CameraPose>& poses() const { return poses_; }
    auto begin() const { return poses_.begin(); }
    auto end() const { return poses_.end(); }
    int width() const { return poses_.front().intrinsics.width; }
    int height() const { return poses_.front().intrinsics.height; }

private:
    std::vector<CameraPose> poses_;
};

struct Ray {
    Eigen::Vector3d origin;
    Eigen::Vector3d direction;  // unit length
};

/// World-space ray through the center of pixel (px, py). Requires
/// 0 <= px < width and 0 <= py < height.
Ray pixel_to_ray(const CameraPose& pose, double px, double py);

struct PixelProjection {
    double x = 0.0;        ///< pixel coordinate (center convention)
    double y = 0.0;
    double depth = 0.0;    ///< camera-space z, meters
    bool behind = false;   ///< depth <= 1e-9; x/y are not produced
    bool in_frame = false; ///< lands inside the image rectangle
};

/// Projects a world point; never throws. Behind-camera and out-of-frame
/// conditions are reported through flags rather than clamping.
PixelProjection project_point(const CameraPose& pose, const Eigen::Vector3d& point);

}  // namespace camcond
