// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "camcond/error.hpp"
#include "camcond/io_util.hpp"

namespace camcond {

using nlohmann::json;

namespace {

// ratio from one point/frame pair, or NaN when the pair contributes nothing
double ratio_for(const SfmPoint& point, const CameraPose& pose, const DepthMap& depth) {
    const PixelProjection proj = project_point(pose, point.position);
    if (proj.behind || !proj.in_frame) return std::numeric_limits<double>::quiet_NaN();
    const int px = static_cast<int>(std::floor(proj.x + 0.5));
    const int py = static_cast<int>(std::floor(proj.y + 0.5));
    if (!depth.is_valid(px, py)) return std::numeric_limits<double>::quiet_NaN();
    const double r = proj.depth / depth.at(px, py);
    if (!std::isfinite(r) || !(r > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return r;
}

}  // namespace

RatioSet collect_depth_ratios(const SfmPointSet& points, const std::vector<DepthMap>& depths,
                              const CameraTrajectory& trajectory) {
    if (depths.size() != trajectory.size())
        throw ContractError("collect_depth_ratios: one depth map per trajectory frame required");
    for (const DepthMap& d : depths)
        if (d.width != trajectory.width() || d.height != trajectory.height())
            throw ContractError("collect_depth_ratios: depth dimensions must match trajectory");

    RatioSet out;
    out.per_frame_counts.assign(trajectory.size(), 0);
    for (const SfmPoint& point : points.points) {
        if (point.track.empty()) {
            for (std::size_t f = 0; f < trajectory.size(); ++f) {
                const double r = ratio_for(point, trajectory[f], depths[f]);
                if (!std::isnan(r)) {
                    out.ratios.push_back(r);
                    ++out.per_frame_counts[f];
                }
            }
        } else {
            for (const SfmObservation& obs : point.track) {
                if (obs.frame_index < 0 || obs.frame_index >= static_cast<int>(trajectory.size()))
                    continue;
                const std::size_t f = static_cast<std::size_t>(obs.frame_index);
                const double r = ratio_for(point, trajectory[f], depths[f]);
                if (!std::isnan(r)) {
                    out.ratios.push_back(r);
                    ++out.per_frame_counts[f];
                }
            }
        }
    }
    return out;
}

CalibrationReport estimate_scale(const std::vector<double>& ratios) {
    if (ratios.empty())
        throw NumericError("calibration impossible: no usable depth ratios were collected");

    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t cut = static_cast<std::size_t>(
        std::floor(0.10 * static_cast<double>(sorted.size())));
    const std::size_t kept = sorted.size() - 2 * cut;
    if (kept == 0)
        throw NumericError("calibration impossible: trimming removed every ratio");

    double sum = 0.0;
    for (std::size_t i = cut; i < cut + kept; ++i) sum += sorted[i];

    CalibrationReport report;
    report.mean_ratio = sum / static_cast<double>(kept);
    report.scale_to_metric = 1.0 / report.mean_ratio;
    report.ratio_count = kept;
    report.trimmed_fraction = 0.10;
    const std::size_t q1 = cut + static_cast<std::size_t>(0.25 * static_cast<double>(kept - 1));
    const std::size_t q3 = cut + static_cast<std::size_t>(0.75 * static_cast<double>(kept - 1));
    report.ratio_spread = sorted[q3] - sorted[q1];
    if (!(report.mean_ratio > 0.0) || !std::isfinite(report.mean_ratio))
        throw NumericError("calibration impossible: non-positive mean ratio");
    return report;
}

CalibrationReport calibrate(const SfmPointSet& points, const std::vector<DepthMap>& depths,
                            const CameraTrajectory& trajectory) {
    RatioSet set = collect_depth_ratios(points, depths, trajectory);
    CalibrationReport report = estimate_scale(set.ratios);
    report.per_frame_counts = std::move(set.per_frame_counts);
    return report;
}

CameraTrajectory apply_scale(const CameraTrajectory& trajectory, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw ContractError("apply_scale: factor must be positive and finite");
    std::vector<CameraPose> poses;
    poses.reserve(trajectory.size());
    for (const CameraPose& pose : trajectory) {
        CameraPose scaled = pose;
        // t = -R*center, so scaling the center is scaling the translation;
        // factor 1 stays bit-identical this way
        scaled.extrinsics.translation = pose.extrinsics.translation * factor;
        poses.push_back(scaled);
    }
    return CameraTrajectory(std::move(poses));
}

CameraTrajectory apply_scale(const CameraTrajectory& trajectory, const CalibrationReport& report) {
    return apply_scale(trajectory, report.scale_to_metric);
}

SfmPointSet load_sfm_points(const std::filesystem::path& path) {
    json doc = json::parse(read_file_bytes(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        throw FormatError(path.string() + ": expected a JSON array of SfM points");
    SfmPointSet set;
    try {
        for (const json& e : doc) {
            SfmPoint p;
            if (e.is_array()) {
                const auto xyz = e.get<std::vector<double>>();
                if (xyz.size() != 3) throw FormatError("SfM point must have 3 coordinates");
                p.position = Eigen::Vector3d(xyz[0], xyz[1], xyz[2]);
            } else {
                const auto xyz = e.at("xyz").get<std::vector<double>>();
                if (xyz.size() != 3) throw FormatError("SfM point must have 3 coordinates");
                p.position = Eigen::Vector3d(xyz[0], xyz[1], xyz[2]);
                if (e.contains("track")) {
                    for (const json& o : e.at("track")) {
                        SfmObservation obs;
                        obs.frame_index = o.at("frame").get<int>();
                        const auto px = o.at("pixel").get<std::vector<double>>();
                        if (px.size() != 2) throw FormatError("SfM observation pixel must have 2 entries");
                        obs.px = px[0];
                        obs.py = px[1];
                        p.track.push_back(obs);
                    }
                }
            }
            if (!p.position.allFinite())
                throw ContractError("SfM point coordinates must be finite");
            set.points.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return set;
}

void save_sfm_points(const std::filesystem::path& path, const SfmPointSet& points) {
    json doc = json::array();
    for (const SfmPoint& p : points.points) {
        if (p.track.empty()) {
            doc.push_back({p.position.x(), p.position.y(), p.position.z()});
        } else {
            json e;
            e["xyz"] = {p.position.x(), p.position.y(), p.position.z()};
            json track = json::array();
            for (const SfmObservation& o : p.track)
                track.push_back({{"frame", o.frame_index}, {"pixel", {o.px, o.py}}});
            e["track"] = std::move(track);
            doc.push_back(std::move(e));
        }
    }
    atomic_write_bytes(path, doc.dump(2) + "\n");
}

}  // namespace camcond
