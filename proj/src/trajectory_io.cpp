// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/trajectory_io.hpp"

#include <json.hpp>

#include "camcond/error.hpp"
#include "camcond/io_util.hpp"

namespace camcond {

using nlohmann::json;

namespace {

json parse_json(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    json doc = json::parse(bytes, nullptr, false);
    if (doc.is_discarded()) throw FormatError("invalid JSON in " + path.string());
    return doc;
}

}  // namespace

CameraTrajectory load_trajectory(const std::filesystem::path& path) {
    const json doc = parse_json(path);
    try {
        const int width = doc.at("width").get<int>();
        const int height = doc.at("height").get<int>();
        std::vector<CameraPose> poses;
        for (const json& f : doc.at("frames")) {
            const auto rot = f.at("rotation").get<std::vector<double>>();
            const auto tr = f.at("translation").get<std::vector<double>>();
            if (rot.size() != 9 || tr.size() != 3)
                throw FormatError("trajectory frame needs 9 rotation and 3 translation entries");
            Eigen::Matrix3d r;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) r(i, j) = rot[static_cast<std::size_t>(3 * i + j)];
            const Eigen::Vector3d t(tr[0], tr[1], tr[2]);
            CameraPose pose;
            pose.intrinsics = Intrinsics(f.at("fx").get<double>(), f.at("fy").get<double>(),
                                         f.at("cx").get<double>(), f.at("cy").get<double>(),
                                         width, height);
            pose.extrinsics = Extrinsics(r, t);
            pose.frame_index = f.at("index").get<int>();
            poses.push_back(pose);
        }
        return CameraTrajectory(std::move(poses));
    } catch (const json::exception& e) {
        throw FormatError("trajectory " + path.string() + ": " + e.what());
    }
}

void save_trajectory(const std::filesystem::path& path, const CameraTrajectory& trajectory) {
    json doc;
    doc["width"] = trajectory.width();
    doc["height"] = trajectory.height();
    json frames = json::array();
    for (const CameraPose& pose : trajectory) {
        json f;
        f["index"] = pose.frame_index;
        f["fx"] = pose.intrinsics.fx;
        f["fy"] = pose.intrinsics.fy;
        f["cx"] = pose.intrinsics.cx;
        f["cy"] = pose.intrinsics.cy;
        std::vector<double> rot(9);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                rot[static_cast<std::size_t>(3 * i + j)] = pose.extrinsics.rotation(i, j);
        f["rotation"] = rot;
        f["translation"] = std::vector<double>{pose.extrinsics.translation.x(),
                                               pose.extrinsics.translation.y(),
                                               pose.extrinsics.translation.z()};
        frames.push_back(std::move(f));
    }
    doc["frames"] = std::move(frames);
    atomic_write_bytes(path, doc.dump(2) + "\n");
}

}  // namespace camcond
