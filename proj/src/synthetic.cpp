// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/synthetic.hpp"

#include <cmath>
#include <limits>

#include "camcond/error.hpp"
#include "camcond/parallel.hpp"
#include "camcond/rng.hpp"

namespace camcond {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// exit parameter of a ray starting inside the box
double exit_from_inside(const Ray& ray, const Eigen::AlignedBox3d& box) {
    double t = kInf;
    for (int a = 0; a < 3; ++a) {
        const double d = ray.direction[a];
        if (d > 0.0)
            t = std::min(t, (box.max()[a] - ray.origin[a]) / d);
        else if (d < 0.0)
            t = std::min(t, (box.min()[a] - ray.origin[a]) / d);
    }
    return t;
}

// entry parameter for a ray outside the box, +inf on miss
double entry_from_outside(const Ray& ray, const Eigen::AlignedBox3d& box) {
    double t0 = 0.0, t1 = kInf;
    for (int a = 0; a < 3; ++a) {
        const double d = ray.direction[a];
        if (d == 0.0) {
            if (ray.origin[a] <= box.min()[a] || ray.origin[a] >= box.max()[a]) return kInf;
            continue;
        }
        double ta = (box.min()[a] - ray.origin[a]) / d;
        double tb = (box.max()[a] - ray.origin[a]) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    return t0 < t1 && t0 > 0.0 ? t0 : kInf;
}

Extrinsics look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    const Eigen::Vector3d world_down(0.0, 1.0, 0.0);
    const Eigen::Vector3d right = world_down.cross(forward).normalized();
    const Eigen::Vector3d down = forward.cross(right);
    Eigen::Matrix3d r;
    r.row(0) = right;
    r.row(1) = down;
    r.row(2) = forward;
    return Extrinsics(r, -(r * eye));
}

}  // namespace

PathKind path_kind_from_string(const std::string& name) {
    if (name == "static") return PathKind::Static;
    if (name == "dolly") return PathKind::Dolly;
    if (name == "orbit") return PathKind::Orbit;
    throw UsageError("unknown path kind '" + name + "' (static|dolly|orbit)");
}

SyntheticScene::SyntheticScene(std::uint64_t seed, int box_count) {
    room_ = Eigen::AlignedBox3d(Eigen::Vector3d(-4.0, -2.5, -2.0), Eigen::Vector3d(4.0, 2.5, 10.0));

    Rng rng(seed ^ 0x53C3A3ull);
    for (int b = 0; b < box_count; ++b) {
        // boxes sit left/right of the camera corridor (|x| <= 1.0)
        const double sx = rng.uniform(0.4, 1.2);
        const double sy = rng.uniform(0.4, 1.2);
        const double sz = rng.uniform(0.4, 1.2);
        const double side = (b % 2 == 0) ? 1.0 : -1.0;
        const double cx = side * rng.uniform(1.6 + sx / 2, 3.0);
        const double cy = rng.uniform(-1.2, 1.2);
        const double cz = rng.uniform(4.0, 8.0);
        const Eigen::Vector3d half(sx / 2, sy / 2, sz / 2);
        const Eigen::Vector3d center(cx, cy, cz);
        boxes_.emplace_back(center - half, center + half);
    }

    // smooth world-space color field: long wavelengths keep neighbouring
    // surface samples within a quantization step of each other
    for (int c = 0; c < 3; ++c) {
        double remaining = 0.42;
        for (int k = 0; k < 3; ++k) {
            TextureWave w;
            Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
            while (dir.norm() < 1e-3) dir = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
            w.direction = dir.normalized();
            w.wavelength = rng.uniform(18.0, 30.0);
            w.phase = rng.uniform(0.0, 2.0 * M_PI);
            w.amplitude = (k == 2) ? remaining : rng.uniform(0.2, 0.5) * remaining;
            remaining -= w.amplitude;
            waves_[c].push_back(w);
        }
    }
}

double SyntheticScene::hit(const Ray& ray) const {
    double t = exit_from_inside(ray, room_);
    for (const auto& box : boxes_) t = std::min(t, entry_from_outside(ray, box));
    return t;
}

double SyntheticScene::field(const Eigen::Vector3d& p, int channel) const {
    double v = 0.5;
    for (const TextureWave& w : waves_[channel])
        v += w.amplitude * std::sin(2.0 * M_PI * p.dot(w.direction) / w.wavelength + w.phase);
    return v;
}

Rgb8 SyntheticScene::color_at(const Eigen::Vector3d& point) const {
    Rgb8 c;
    auto quantize = [](double v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    };
    c.r = quantize(field(point, 0));
    c.g = quantize(field(point, 1));
    c.b = quantize(field(point, 2));
    return c;
}

Image8 SyntheticScene::render_image(const CameraPose& pose) const {
    const int w = pose.intrinsics.width;
    const int h = pose.intrinsics.height;
    Image8 image(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Ray ray = pixel_to_ray(pose, x, y);
            const double t = hit(ray);
            if (!std::isfinite(t)) throw NumericError("synthetic scene: camera outside the room");
            const Rgb8 c = color_at(ray.origin + t * ray.direction);
            image.at(x, y, 0) = c.r;
            image.at(x, y, 1) = c.g;
            image.at(x, y, 2) = c.b;
        }
    return image;
}

DepthMap SyntheticScene::render_depth(const CameraPose& pose) const {
    const int w = pose.intrinsics.width;
    const int h = pose.intrinsics.height;
    DepthMap depth(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Ray ray = pixel_to_ray(pose, x, y);
            const double t = hit(ray);
            if (!std::isfinite(t)) throw NumericError("synthetic scene: camera outside the room");
            const Eigen::Vector3d point = ray.origin + t * ray.direction;
            depth.set(x, y, (pose.extrinsics.rotation * point + pose.extrinsics.translation).z());
        }
    return depth;
}

GeneratedScene generate_scene(std::uint64_t seed, PathKind path, int frames, int width,
                              int height, int box_count) {
    if (frames < 1) throw ContractError("generate_scene: frames must be >= 1");
    SyntheticScene scene(seed, box_count);

    const double fx = 0.5 * width / std::tan(35.0 * M_PI / 180.0);
    const Intrinsics intr(fx, fx, width / 2.0, height / 2.0, width, height);

    std::vector<CameraPose> poses;
    for (int i = 0; i < frames; ++i) {
        const double s = frames == 1 ? 0.0 : static_cast<double>(i) / (frames - 1);
        CameraPose pose;
        pose.intrinsics = intr;
        pose.frame_index = i;
        switch (path) {
            case PathKind::Static:
                pose.extrinsics = Extrinsics();
                break;
            case PathKind::Dolly: {
                // forward toward the far wall, 60% of the way
                const Eigen::Vector3d eye(0.0, 0.0, 6.0 * s);
                pose.extrinsics = Extrinsics(Eigen::Matrix3d::Identity(),
                                             -eye);  // identity rotation
                break;
            }
            case PathKind::Orbit: {
                const Eigen::Vector3d center(0.0, 0.0, 2.0);
                const double radius = 2.0;
                const double angle = s * 50.0 * M_PI / 180.0;
                const Eigen::Vector3d eye =
                    center + radius * Eigen::Vector3d(std::sin(angle), 0.0, -std::cos(angle));
                pose.extrinsics = look_at(eye, center);
                break;
            }
        }
        poses.push_back(pose);
    }
    CameraTrajectory trajectory(std::move(poses));

    std::vector<Image8> images(trajectory.size());
    std::vector<DepthMap> depths(trajectory.size());
    parallel_for(trajectory.size(), [&](std::size_t i) {
        images[i] = scene.render_image(trajectory[i]);
        depths[i] = scene.render_depth(trajectory[i]);
    });
    return {std::move(scene), std::move(trajectory), std::move(images), std::move(depths)};
}

SfmPointSet sample_surface_points(const GeneratedScene& generated, int count, std::uint64_t seed,
                                  bool with_tracks) {
    Rng rng(seed ^ 0x5F3759DFull);
    SfmPointSet set;
    const int w = generated.trajectory.width();
    const int h = generated.trajectory.height();
    for (int i = 0; i < count; ++i) {
        const int f = static_cast<int>(rng.index(generated.trajectory.size()));
        const int x = static_cast<int>(rng.index(static_cast<std::uint64_t>(w)));
        const int y = static_cast<int>(rng.index(static_cast<std::uint64_t>(h)));
        const Ray ray = pixel_to_ray(generated.trajectory[static_cast<std::size_t>(f)], x, y);
        const double t = generated.scene.hit(ray);
        SfmPoint p;
        p.position = ray.origin + t * ray.direction;
        if (with_tracks)
            p.track.push_back({f, static_cast<double>(x), static_cast<double>(y)});
        set.points.push_back(std::move(p));
    }
    return set;
}

}  // namespace camcond
