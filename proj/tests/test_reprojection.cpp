// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <map>

#include "camcond/error.hpp"
#include "camcond/parallel.hpp"
#include "camcond/reprojection.hpp"
#include "helpers.hpp"

using namespace camcond;

namespace {

// independent z-buffer oracle: per-pixel scan with explicit tie rules
std::pair<Image8, Image8> render_oracle(const PointCloud& cloud, const CameraPose& pose,
                                        Rgb8 background) {
    const int w = pose.intrinsics.width;
    const int h = pose.intrinsics.height;
    Image8 frame(w, h, 3);
    Image8 mask(w, h, 1, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            frame.at(x, y, 0) = background.r;
            frame.at(x, y, 1) = background.g;
            frame.at(x, y, 2) = background.b;
        }

    std::map<std::pair<int, int>, std::pair<double, std::pair<int, int>>> best;
    std::map<std::pair<int, int>, Rgb8> color;
    for (const CloudPoint& p : cloud.points) {
        const PixelProjection proj = project_point(pose, p.position);
        if (proj.behind || !proj.in_frame) continue;
        const int px = static_cast<int>(std::floor(proj.x + 0.5));
        const int py = static_cast<int>(std::floor(proj.y + 0.5));
        const auto key = std::make_pair(px, py);
        const auto candidate = std::make_pair(proj.depth, std::make_pair(p.src_y, p.src_x));
        auto it = best.find(key);
        if (it == best.end() || candidate < it->second) {
            best[key] = candidate;
            color[key] = p.color;
        }
    }
    for (const auto& [key, c] : color) {
        frame.at(key.first, key.second, 0) = c.r;
        frame.at(key.first, key.second, 1) = c.g;
        frame.at(key.first, key.second, 2) = c.b;
        mask.at(key.first, key.second) = 1;
    }
    return {frame, mask};
}

Image8 random_image(Rng& rng, int w, int h) {
    Image8 image(w, h, 3);
    for (auto& v : image.data) v = static_cast<std::uint8_t>(rng.index(256));
    return image;
}

DepthMap random_depth(Rng& rng, int w, int h, double invalid_fraction = 0.1) {
    DepthMap depth(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (rng.uniform() >= invalid_fraction) depth.set(x, y, rng.uniform(0.5, 6.0));
    return depth;
}

}  // namespace

TEST_CASE("unproject on-axis pixel at constant depth") {
    CameraPose pose;
    pose.intrinsics = Intrinsics(100, 100, 8.5, 6.5, 16, 12);
    Image8 image(16, 12, 3);
    DepthMap depth(16, 12);
    depth.set(8, 6, 2.0);
    const PointCloud cloud = unproject_frame(image, depth, pose);
    REQUIRE(cloud.points.size() == 1);
    CHECK(cloud.points[0].position.isApprox(Eigen::Vector3d(0, 0, 2), 1e-12));
}

TEST_CASE("invalid-depth pixels produce no points") {
    CameraPose pose;
    pose.intrinsics = Intrinsics(100, 100, 8, 6, 16, 12);
    Image8 image(16, 12, 3);
    DepthMap depth(16, 12);  // everything invalid
    CHECK(unproject_frame(image, depth, pose).points.empty());
}

TEST_CASE("unproject dimension mismatch is a contract error") {
    CameraPose pose;
    pose.intrinsics = Intrinsics(100, 100, 8, 6, 16, 12);
    Image8 image(8, 12, 3);
    DepthMap depth(16, 12);
    CHECK_THROWS_AS(unproject_frame(image, depth, pose), ContractError);
}

TEST_CASE("unprojected points reproject onto their source pixel and depth") {
    Rng rng(50);
    for (int it = 0; it < 5; ++it) {
        const CameraPose pose = test::random_pose(rng, 0, 24, 18);
        const Image8 image = random_image(rng, 24, 18);
        const DepthMap depth = random_depth(rng, 24, 18);
        const PointCloud cloud = unproject_frame(image, depth, pose);
        for (const CloudPoint& p : cloud.points) {
            const PixelProjection proj = project_point(pose, p.position);
            CHECK(std::abs(proj.x - p.src_x) < 1e-6);
            CHECK(std::abs(proj.y - p.src_y) < 1e-6);
            const double expected = depth.at(p.src_x, p.src_y);
            CHECK(std::abs(proj.depth - expected) < 1e-9 * expected);
        }
    }
}

TEST_CASE("rendering into the source pose reproduces the image exactly") {
    Rng rng(51);
    const CameraPose pose = test::random_pose(rng, 0, 24, 18);
    const Image8 image = random_image(rng, 24, 18);
    DepthMap depth(24, 18);
    for (int y = 0; y < 18; ++y)
        for (int x = 0; x < 24; ++x) depth.set(x, y, rng.uniform(0.5, 6.0));

    const PointCloud cloud = unproject_frame(image, depth, pose);
    const auto [frame, mask] = render_pointcloud(cloud, pose, Rgb8{255, 0, 255});
    CHECK(frame.data == image.data);
    for (auto m : mask.data) CHECK(m == 1);
}

TEST_CASE("empty cloud renders all background with an all-false mask") {
    CameraPose pose;
    pose.intrinsics = Intrinsics(30, 30, 8, 6, 16, 12);
    const auto [frame, mask] = render_pointcloud(PointCloud{}, pose, Rgb8{9, 8, 7});
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(frame.at(x, y, 0) == 9);
            CHECK(frame.at(x, y, 1) == 8);
            CHECK(frame.at(x, y, 2) == 7);
            CHECK(mask.at(x, y) == 0);
        }
}

TEST_CASE("nearest depth wins when two points land in one pixel") {
    CameraPose pose;
    pose.intrinsics = Intrinsics(100, 100, 8.5, 6.5, 16, 12);
    PointCloud cloud;
    cloud.points.push_back({Eigen::Vector3d(0, 0, 2), Rgb8{10, 10, 10}, 0, 0});
    cloud.points.push_back({Eigen::Vector3d(0, 0, 1), Rgb8{200, 200, 200}, 1, 0});
    const auto [frame, mask] = render_pointcloud(cloud, pose, Rgb8{255, 0, 255});
    CHECK(frame.at(8, 6, 0) == 200);
    CHECK(mask.at(8, 6) == 1);
}

TEST_CASE("z-buffer output equals the brute-force oracle bit-exactly") {
    Rng rng(52);
    for (int it = 0; it < 25; ++it) {
        const CameraPose source = test::random_pose(rng, 0, 24, 18);
        const CameraPose target = test::random_pose(rng, 0, 24, 18);
        const Image8 image = random_image(rng, 24, 18);
        const DepthMap depth = random_depth(rng, 24, 18);
        const PointCloud cloud = unproject_frame(image, depth, source);

        const auto [frame, mask] = render_pointcloud(cloud, target, Rgb8{255, 0, 255});
        const auto [oframe, omask] = render_oracle(cloud, target, Rgb8{255, 0, 255});
        CHECK(frame.data == oframe.data);
        CHECK(mask.data == omask.data);
    }
}

TEST_CASE("tie-break prefers the lowest source row-major index regardless of order") {
    CameraPose pose;
    pose.intrinsics = Intrinsics(100, 100, 8.5, 6.5, 16, 12);
    PointCloud a, b;
    const CloudPoint winner{Eigen::Vector3d(0, 0, 3), Rgb8{1, 1, 1}, 5, 2};  // row 2
    const CloudPoint loser{Eigen::Vector3d(0, 0, 3), Rgb8{2, 2, 2}, 4, 9};   // row 9
    a.points = {winner, loser};
    b.points = {loser, winner};
    const auto [fa, ma] = render_pointcloud(a, pose, Rgb8{0, 0, 0});
    const auto [fb, mb] = render_pointcloud(b, pose, Rgb8{0, 0, 0});
    CHECK(fa.at(8, 6, 0) == 1);
    CHECK(fa.data == fb.data);
    CHECK(ma.data == mb.data);
}

TEST_CASE("static trajectory reprojects identically in every frame") {
    Rng rng(53);
    CameraPose pose = test::random_pose(rng, 0, 24, 18);
    std::vector<CameraPose> poses;
    for (int i = 0; i < 4; ++i) {
        CameraPose p = pose;
        p.frame_index = i;
        poses.push_back(p);
    }
    const CameraTrajectory traj(std::move(poses));
    const Image8 image = random_image(rng, 24, 18);
    const DepthMap depth = random_depth(rng, 24, 18);
    const ReprojectedVideo video = reproject_sequence(image, depth, traj);
    for (std::size_t f = 1; f < video.frames.size(); ++f) {
        CHECK(video.frames[f].data == video.frames[0].data);
        CHECK(video.masks[f].data == video.masks[0].data);
    }
}

TEST_CASE("masked pixels carry a color present at some source pixel") {
    Rng rng(54);
    const CameraTrajectory traj = test::random_trajectory(rng, 3, 24, 18);
    const Image8 image = random_image(rng, 24, 18);
    const DepthMap depth = random_depth(rng, 24, 18);
    const ReprojectedVideo video = reproject_sequence(image, depth, traj);
    const PointCloud cloud = unproject_frame(image, depth, traj[0]);

    for (std::size_t f = 0; f < video.frames.size(); ++f) {
        for (int y = 0; y < 18; ++y) {
            for (int x = 0; x < 24; ++x) {
                if (!video.masks[f].at(x, y)) continue;
                const Rgb8 c{video.frames[f].at(x, y, 0), video.frames[f].at(x, y, 1),
                             video.frames[f].at(x, y, 2)};
                bool found = false;
                for (const CloudPoint& p : cloud.points)
                    if (p.color == c) {
                        found = true;
                        break;
                    }
                CHECK(found);
            }
        }
    }
}

TEST_CASE("camera turned away from the scene sees only background") {
    CameraPose front;
    front.intrinsics = Intrinsics(30, 30, 8, 6, 16, 12);
    front.frame_index = 0;

    Eigen::Matrix3d flip;  // 180 degrees about y
    flip << -1, 0, 0, 0, 1, 0, 0, 0, -1;
    CameraPose back;
    back.intrinsics = front.intrinsics;
    back.extrinsics = Extrinsics(flip, Eigen::Vector3d::Zero());
    back.frame_index = 1;

    Image8 image(16, 12, 3);
    for (auto& v : image.data) v = 77;
    DepthMap depth(16, 12);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 16; ++x) depth.set(x, y, 2.0);

    const ReprojectedVideo video =
        reproject_sequence(image, depth, CameraTrajectory({front, back}), Rgb8{255, 0, 255});
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(video.masks[1].at(x, y) == 0);
            CHECK(video.frames[1].at(x, y, 0) == 255);
            CHECK(video.frames[1].at(x, y, 1) == 0);
            CHECK(video.frames[1].at(x, y, 2) == 255);
        }
}

TEST_CASE("mask/background coupling holds bit-exactly") {
    Rng rng(55);
    const CameraTrajectory traj = test::random_trajectory(rng, 3, 24, 18);
    // avoid colors equal to the background so the equivalence is two-sided
    Image8 image(24, 18, 3);
    for (auto& v : image.data) v = static_cast<std::uint8_t>(rng.index(200));
    const DepthMap depth = random_depth(rng, 24, 18);
    const Rgb8 bg{255, 0, 255};
    const ReprojectedVideo video = reproject_sequence(image, depth, traj, bg);
    for (std::size_t f = 0; f < video.frames.size(); ++f)
        for (int y = 0; y < 18; ++y)
            for (int x = 0; x < 24; ++x) {
                const bool is_bg = video.frames[f].at(x, y, 0) == bg.r &&
                                   video.frames[f].at(x, y, 1) == bg.g &&
                                   video.frames[f].at(x, y, 2) == bg.b;
                CHECK(is_bg == (video.masks[f].at(x, y) == 0));
            }
}

TEST_CASE("reprojection is byte-identical across worker counts") {
    Rng rng(56);
    const CameraTrajectory traj = test::random_trajectory(rng, 4, 24, 18);
    const Image8 image = random_image(rng, 24, 18);
    const DepthMap depth = random_depth(rng, 24, 18);
    set_thread_count(1);
    const ReprojectedVideo a = reproject_sequence(image, depth, traj);
    set_thread_count(4);
    const ReprojectedVideo b = reproject_sequence(image, depth, traj);
    set_thread_count(0);
    for (std::size_t f = 0; f < a.frames.size(); ++f) {
        CHECK(a.frames[f].data == b.frames[f].data);
        CHECK(a.masks[f].data == b.masks[f].data);
    }
}
