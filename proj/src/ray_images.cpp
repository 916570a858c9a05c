// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/ray_images.hpp"

#include <cstring>

#include "camcond/error.hpp"
#include "camcond/io_util.hpp"
#include "camcond/parallel.hpp"

namespace camcond {

namespace {
constexpr double kOctantMargin = 1e-3;  // meters
}

Eigen::Vector3d compute_octant_offset(const CameraTrajectory& trajectory) {
    Eigen::Vector3d lo = camera_center(trajectory[0].extrinsics);
    for (const CameraPose& pose : trajectory)
        lo = lo.cwiseMin(camera_center(pose.extrinsics));
    Eigen::Vector3d offset;
    for (int a = 0; a < 3; ++a) offset[a] = std::max(0.0, kOctantMargin - lo[a]);
    return offset;
}

std::vector<RayImagePair> render_ray_images(const CameraTrajectory& trajectory) {
    const Eigen::Vector3d offset = compute_octant_offset(trajectory);
    const int w = trajectory.width();
    const int h = trajectory.height();

    std::vector<RayImagePair> out(trajectory.size());
    parallel_for(trajectory.size(), [&](std::size_t i) {
        const CameraPose& pose = trajectory[i];
        RayImagePair& pair = out[i];
        pair.frame_index = pose.frame_index;
        pair.offset_applied = offset;
        pair.directions = ImageF(w, h, 3);
        pair.origins = ImageF(w, h, 3);

        const Eigen::Vector3d origin = camera_center(pose.extrinsics) + offset;
        const float ox = static_cast<float>(origin.x());
        const float oy = static_cast<float>(origin.y());
        const float oz = static_cast<float>(origin.z());

        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const Ray ray = pixel_to_ray(pose, x, y);
                const Eigen::Vector3d enc = encode_direction(ray.direction);
                pair.directions.at(x, y, 0) = static_cast<float>(enc.x());
                pair.directions.at(x, y, 1) = static_cast<float>(enc.y());
                pair.directions.at(x, y, 2) = static_cast<float>(enc.z());
                pair.origins.at(x, y, 0) = ox;
                pair.origins.at(x, y, 1) = oy;
                pair.origins.at(x, y, 2) = oz;
            }
        }
    });
    return out;
}

void write_ccri(const std::filesystem::path& path, const ImageF& image) {
    std::string bytes;
    bytes.reserve(16 + image.data.size() * 4);
    bytes.append("CCRI", 4);
    const std::uint32_t header[3] = {static_cast<std::uint32_t>(image.width),
                                     static_cast<std::uint32_t>(image.height),
                                     static_cast<std::uint32_t>(image.channels)};
    bytes.append(reinterpret_cast<const char*>(header), 12);
    bytes.append(reinterpret_cast<const char*>(image.data.data()), image.data.size() * 4);
    atomic_write_bytes(path, bytes);
}

ImageF read_ccri(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    if (bytes.size() < 16 || std::memcmp(bytes.data(), "CCRI", 4) != 0)
        throw FormatError(path.string() + ": not a CCRI file");
    std::uint32_t header[3];
    std::memcpy(header, bytes.data() + 4, 12);
    const std::uint64_t count =
        static_cast<std::uint64_t>(header[0]) * header[1] * header[2];
    if (header[0] == 0 || header[1] == 0 || header[2] == 0 || bytes.size() != 16 + count * 4)
        throw FormatError(path.string() + ": CCRI size mismatch");
    ImageF image(static_cast<int>(header[0]), static_cast<int>(header[1]),
                 static_cast<int>(header[2]));
    std::memcpy(image.data.data(), bytes.data() + 16, count * 4);
    return image;
}

}  // namespace camcond
