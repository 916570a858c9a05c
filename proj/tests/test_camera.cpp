// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "camcond/calibration.hpp"
#include "camcond/camera.hpp"
#include "camcond/error.hpp"
#include "camcond/trajectory_io.hpp"
#include "helpers.hpp"

using namespace camcond;

TEST_CASE("camera_center identity and translated cases") {
    CHECK(camera_center(Extrinsics()).isZero(0.0));

    Extrinsics e(Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 2, 3));
    CHECK(camera_center(e).isApprox(Eigen::Vector3d(-1, -2, -3), 0.0));
}

TEST_CASE("camera_center satisfies R*o + t = 0 for random poses") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        Extrinsics e(test::random_rotation(rng),
                     Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()));
        const Eigen::Vector3d o = camera_center(e);
        CHECK((e.rotation * o + e.translation).norm() < 1e-9);
    }
}

TEST_CASE("extrinsics constructor rejects non-rotations") {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity() * 2.0;
    CHECK_THROWS_AS(Extrinsics(m, Eigen::Vector3d::Zero()), ContractError);

    Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
    reflect(0, 0) = -1.0;  // orthonormal but det -1
    CHECK_THROWS_AS(Extrinsics(reflect, Eigen::Vector3d::Zero()), ContractError);
}

TEST_CASE("intrinsics invariants") {
    CHECK_THROWS_AS(Intrinsics(-1, 1, 0.5, 0.5, 2, 2), ContractError);
    CHECK_THROWS_AS(Intrinsics(1, 1, 3.0, 0.5, 2, 2), ContractError);
    CHECK_THROWS_AS(Intrinsics(1, 1, 0.5, 0.5, 0, 2), ContractError);
}

TEST_CASE("pixel_to_ray principal point gives the optical axis") {
    CameraPose pose;
    pose.intrinsics = Intrinsics(100, 100, 32, 24, 64, 48);
    const Ray ray = pixel_to_ray(pose, 32 - 0.5, 24 - 0.5);
    CHECK(ray.origin.isZero(0.0));
    CHECK(ray.direction.isApprox(Eigen::Vector3d(0, 0, 1), 1e-12));
}

TEST_CASE("pixel_to_ray origin is the camera center for identity extrinsics") {
    CameraPose pose;
    pose.intrinsics = Intrinsics(80, 90, 30, 20, 64, 48);
    for (double px : {0.0, 10.5, 63.0})
        CHECK(pixel_to_ray(pose, px, 7).origin.isZero(0.0));
}

TEST_CASE("pixel_to_ray rejects out-of-bounds pixels") {
    CameraPose pose;
    pose.intrinsics = Intrinsics(80, 90, 30, 20, 64, 48);
    CHECK_THROWS_AS(pixel_to_ray(pose, -0.1, 0), ContractError);
    CHECK_THROWS_AS(pixel_to_ray(pose, 64, 0), ContractError);
    CHECK_THROWS_AS(pixel_to_ray(pose, 0, 48), ContractError);
}

TEST_CASE("project_point on-axis and behind-camera cases") {
    CameraPose pose;
    pose.intrinsics = Intrinsics(100, 100, 32, 24, 64, 48);

    const PixelProjection on_axis = project_point(pose, Eigen::Vector3d(0, 0, 2));
    CHECK(!on_axis.behind);
    CHECK(on_axis.in_frame);
    CHECK(on_axis.x == doctest::Approx(32 - 0.5).epsilon(1e-12));
    CHECK(on_axis.y == doctest::Approx(24 - 0.5).epsilon(1e-12));
    CHECK(on_axis.depth == doctest::Approx(2.0).epsilon(1e-12));

    CHECK(project_point(pose, Eigen::Vector3d(0, 0, -1)).behind);
    CHECK(!project_point(pose, Eigen::Vector3d(0, 0, -1)).in_frame);
}

TEST_CASE("project and unproject are inverse over random poses and pixels") {
    Rng rng(101);
    for (int i = 0; i < 500; ++i) {
        const CameraPose pose = test::random_pose(rng);
        const double px = rng.uniform(0.0, pose.intrinsics.width - 1e-9);
        const double py = rng.uniform(0.0, pose.intrinsics.height - 1e-9);
        const Ray ray = pixel_to_ray(pose, px, py);
        CHECK(std::abs(ray.direction.norm() - 1.0) < 1e-9);

        const double lambda = 3.7;
        const PixelProjection proj = project_point(pose, ray.origin + lambda * ray.direction);
        CHECK(!proj.behind);
        CHECK(std::abs(proj.x - px) < 1e-6);
        CHECK(std::abs(proj.y - py) < 1e-6);

        // depth equals the camera-space z of the sample point
        const Eigen::Vector3d pc = pose.extrinsics.rotation *
                                       (ray.origin + lambda * ray.direction) +
                                   pose.extrinsics.translation;
        CHECK(std::abs(proj.depth - pc.z()) < 1e-9 * std::abs(pc.z()));
    }
}

TEST_CASE("apply_scale with factor 1 is bit-identical") {
    Rng rng(7);
    const CameraTrajectory traj = test::random_trajectory(rng, 5);
    const CameraTrajectory scaled = apply_scale(traj, 1.0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(traj[i].extrinsics.rotation == scaled[i].extrinsics.rotation);
        CHECK(traj[i].extrinsics.translation == scaled[i].extrinsics.translation);
    }
}

TEST_CASE("trajectory invariants") {
    Rng rng(3);
    CHECK_THROWS_AS(CameraTrajectory({}), ContractError);

    std::vector<CameraPose> poses{test::random_pose(rng, 0), test::random_pose(rng, 2)};
    CHECK_THROWS_AS(CameraTrajectory{poses}, ContractError);

    std::vector<CameraPose> mixed{test::random_pose(rng, 0, 64, 48),
                                  test::random_pose(rng, 1, 32, 48)};
    CHECK_THROWS_AS(CameraTrajectory{mixed}, ContractError);
}

TEST_CASE("trajectory JSON round-trips exactly") {
    Rng rng(21);
    const CameraTrajectory traj = test::random_trajectory(rng, 4);
    const auto path = std::filesystem::temp_directory_path() / "camcond_traj_test.json";
    save_trajectory(path, traj);
    const CameraTrajectory loaded = load_trajectory(path);

    REQUIRE(loaded.size() == traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(loaded[i].extrinsics.rotation == traj[i].extrinsics.rotation);
        CHECK(loaded[i].extrinsics.translation == traj[i].extrinsics.translation);
        CHECK(loaded[i].intrinsics.fx == traj[i].intrinsics.fx);
        CHECK(loaded[i].intrinsics.cy == traj[i].intrinsics.cy);
    }
    std::filesystem::remove(path);
}

TEST_CASE("malformed trajectory JSON raises a format error") {
    const auto path = std::filesystem::temp_directory_path() / "camcond_bad_traj.json";
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("{not json", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_trajectory(path), FormatError);
    std::filesystem::remove(path);
}
