// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "camcond/camera.hpp"
#include "camcond/rng.hpp"

namespace camcond::test {

inline Eigen::Matrix3d random_rotation(Rng& rng) {
    Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    q.normalize();
    return q.toRotationMatrix();
}

inline Intrinsics random_intrinsics(Rng& rng, int width = 64, int height = 48) {
    const double f = rng.uniform(0.6, 2.0) * width;
    return Intrinsics(f, f * rng.uniform(0.9, 1.1), width * rng.uniform(0.4, 0.6),
                      height * rng.uniform(0.4, 0.6), width, height);
}

inline CameraPose random_pose(Rng& rng, int frame_index = 0, int width = 64, int height = 48) {
    CameraPose pose;
    pose.intrinsics = random_intrinsics(rng, width, height);
    pose.extrinsics = Extrinsics(
        random_rotation(rng),
        Eigen::Vector3d(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)));
    pose.frame_index = frame_index;
    return pose;
}

inline CameraTrajectory random_trajectory(Rng& rng, int frames, int width = 64, int height = 48) {
    std::vector<CameraPose> poses;
    const Intrinsics k = random_intrinsics(rng, width, height);
    for (int i = 0; i < frames; ++i) {
        CameraPose pose = random_pose(rng, i, width, height);
        pose.intrinsics = k;
        poses.push_back(pose);
    }
    return CameraTrajectory(std::move(poses));
}

}  // namespace camcond::test
