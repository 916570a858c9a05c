// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/reprojection.hpp"

#include <cmath>
#include <limits>

#include "camcond/error.hpp"
#include "camcond/parallel.hpp"

namespace camcond {

void DepthMap::check() const {
    if (width < 1 || height < 1 ||
        values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) ||
        valid.size() != values.size())
        throw ContractError("depth map: inconsistent dimensions");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (valid[i] && !(values[i] > 0.0 && std::isfinite(values[i])))
            throw ContractError("depth map: valid entries must be positive and finite");
}

PointCloud unproject_frame(const Image8& image, const DepthMap& depth, const CameraPose& pose0) {
    if (image.width != depth.width || image.height != depth.height ||
        image.width != pose0.intrinsics.width || image.height != pose0.intrinsics.height)
        throw ContractError("unproject_frame: image, depth, and pose dimensions must match");
    if (image.channels != 3) throw ContractError("unproject_frame: expected an RGB image");
    depth.check();

    const Intrinsics& k = pose0.intrinsics;
    const Eigen::Matrix3d rt = pose0.extrinsics.rotation.transpose();
    const Eigen::Vector3d t = pose0.extrinsics.translation;

    PointCloud cloud;
    cloud.points.reserve(depth.values.size());
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            if (!depth.is_valid(x, y)) continue;
            const double z = depth.at(x, y);
            // camera-space point at depth z behind pixel center, then to world
            const Eigen::Vector3d pc(((x + 0.5) - k.cx) / k.fx * z, ((y + 0.5) - k.cy) / k.fy * z,
                                     z);
            CloudPoint p;
            p.position = rt * (pc - t);
            p.color = Rgb8{image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2)};
            p.src_x = x;
            p.src_y = y;
            cloud.points.push_back(p);
        }
    }
    return cloud;
}

std::pair<Image8, Image8> render_pointcloud(const PointCloud& cloud, const CameraPose& pose,
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

    const std::size_t n_pixels = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    std::vector<double> zbuf(n_pixels, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> owner(n_pixels, std::numeric_limits<std::int64_t>::max());

    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const CloudPoint& p = cloud.points[i];
        const PixelProjection proj = project_point(pose, p.position);
        if (proj.behind || !proj.in_frame) continue;
        const int px = static_cast<int>(std::floor(proj.x + 0.5));
        const int py = static_cast<int>(std::floor(proj.y + 0.5));
        const std::size_t idx = static_cast<std::size_t>(py) * static_cast<std::size_t>(w) +
                                static_cast<std::size_t>(px);
        // tie-break on exact depth equality: lowest source row-major index
        const std::int64_t key = static_cast<std::int64_t>(p.src_y) * (1ll << 32) + p.src_x;
        if (proj.depth < zbuf[idx] || (proj.depth == zbuf[idx] && key < owner[idx])) {
            zbuf[idx] = proj.depth;
            owner[idx] = key;
            frame.at(px, py, 0) = p.color.r;
            frame.at(px, py, 1) = p.color.g;
            frame.at(px, py, 2) = p.color.b;
            mask.at(px, py) = 1;
        }
    }
    return {std::move(frame), std::move(mask)};
}

ReprojectedVideo reproject_sequence(const Image8& image, const DepthMap& depth,
                                    const CameraTrajectory& trajectory, Rgb8 background) {
    if (trajectory.width() != image.width || trajectory.height() != image.height)
        throw ContractError("reproject_sequence: trajectory and image dimensions must match");
    const PointCloud cloud = unproject_frame(image, depth, trajectory[0]);

    ReprojectedVideo video;
    video.background_color = background;
    video.frames.resize(trajectory.size());
    video.masks.resize(trajectory.size());
    parallel_for(trajectory.size(), [&](std::size_t i) {
        auto [frame, mask] = render_pointcloud(cloud, trajectory[i], background);
        video.frames[i] = std::move(frame);
        video.masks[i] = std::move(mask);
    });
    return video;
}

}  // namespace camcond
