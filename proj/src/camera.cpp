// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/camera.hpp"

#include <Eigen/LU>
#include <cmath>
#include <string>

#include "camcond/error.hpp"

namespace camcond {

namespace {
constexpr double kOrthonormalTol = 1e-6;
constexpr double kMinDepth = 1e-9;
}  // namespace

Intrinsics::Intrinsics(double fx_, double fy_, double cx_, double cy_, int width_, int height_)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(width_), height(height_) {
    if (width < 1 || height < 1)
        throw ContractError("intrinsics: image size must be at least 1x1");
    if (!(fx > 0.0) || !(fy > 0.0))
        throw ContractError("intrinsics: focal lengths must be positive");
    if (!(cx > 0.0) || !(cx < width) || !(cy > 0.0) || !(cy < height))
        throw ContractError("intrinsics: principal point must lie inside the image");
}

Intrinsics Intrinsics::downsampled(int factor) const {
    if (factor < 1 || width % factor != 0 || height % factor != 0)
        throw ContractError("intrinsics: downsample factor must divide width and height");
    const double f = static_cast<double>(factor);
    return Intrinsics(fx / f, fy / f, cx / f, cy / f, width / factor, height / factor);
}

Extrinsics::Extrinsics(const Eigen::Matrix3d& rotation_, const Eigen::Vector3d& translation_)
    : rotation(rotation_), translation(translation_) {
    if (!rotation.allFinite() || !translation.allFinite())
        throw ContractError("extrinsics: entries must be finite");
    const Eigen::Matrix3d gram = rotation * rotation.transpose();
    if (((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff()) > kOrthonormalTol)
        throw ContractError("extrinsics: rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > kOrthonormalTol)
        throw ContractError("extrinsics: rotation determinant must be +1");
}

std::array<double, 12> Extrinsics::entries() const {
    std::array<double, 12> e;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) e[static_cast<std::size_t>(3 * r + c)] = rotation(r, c);
    for (int r = 0; r < 3; ++r) e[static_cast<std::size_t>(9 + r)] = translation(r);
    return e;
}

Eigen::Vector3d camera_center(const Extrinsics& extrinsics) {
    return -(extrinsics.rotation.transpose() * extrinsics.translation);
}

CameraTrajectory::CameraTrajectory(std::vector<CameraPose> poses) : poses_(std::move(poses)) {
    if (poses_.empty()) throw ContractError("trajectory: must contain at least one pose");
    const int w = poses_.front().intrinsics.width;
    const int h = poses_.front().intrinsics.height;
    for (std::size_t i = 0; i < poses_.size(); ++i) {
        const CameraPose& p = poses_[i];
        if (p.intrinsics.width != w || p.intrinsics.height != h)
            throw ContractError("trajectory: all poses must share image dimensions");
        if (p.frame_index != static_cast<int>(i))
            throw ContractError("trajectory: frame indices must be 0..N consecutive, got " +
                                std::to_string(p.frame_index) + " at position " + std::to_string(i));
    }
}

Ray pixel_to_ray(const CameraPose& pose, double px, double py) {
    const Intrinsics& k = pose.intrinsics;
    if (!(px >= 0.0) || !(px < k.width) || !(py >= 0.0) || !(py < k.height))
        throw ContractError("pixel_to_ray: pixel (" + std::to_string(px) + ", " +
                            std::to_string(py) + ") outside image");
    const double u = px + 0.5;
    const double v = py + 0.5;
    const Eigen::Vector3d dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
    Eigen::Vector3d dir_world = pose.extrinsics.rotation.transpose() * dir_cam;
    dir_world.normalize();
    return Ray{camera_center(pose.extrinsics), dir_world};
}

PixelProjection project_point(const CameraPose& pose, const Eigen::Vector3d& point) {
    const Eigen::Vector3d pc = pose.extrinsics.rotation * point + pose.extrinsics.translation;
    PixelProjection proj;
    proj.depth = pc.z();
    if (!(pc.z() > kMinDepth)) {
        proj.behind = true;
        return proj;
    }
    const Intrinsics& k = pose.intrinsics;
    const double u = k.fx * pc.x() / pc.z() + k.cx;
    const double v = k.fy * pc.y() / pc.z() + k.cy;
    proj.x = u - 0.5;
    proj.y = v - 0.5;
    proj.in_frame = u >= 0.0 && u < k.width && v >= 0.0 && v < k.height;
    return proj;
}

}  // namespace camcond
