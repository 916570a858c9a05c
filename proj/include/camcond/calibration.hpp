// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "camcond/camera.hpp"
#include "camcond/reprojection.hpp"

namespace camcond {

struct SfmObservation {
    int frame_index = 0;
    double px = 0.0;
    double py = 0.0;
};

struct SfmPoint {
    Eigen::Vector3d position;            // SfM units
    std::vector<SfmObservation> track;   // optional; empty = project everywhere
};

struct SfmPointSet {
    std::vector<SfmPoint> points;
};

/// Outcome of the trimmed-mean scale estimate. mean_ratio is the robust
/// mean of sfm_depth / metric_depth; positions are converted to meters by
/// multiplying with scale_to_metric = 1 / mean_ratio.
struct CalibrationReport {
    double mean_ratio = 1.0;
    double scale_to_metric = 1.0;
    std::size_t ratio_count = 0;   ///< ratios retained after trimming
    double trimmed_fraction = 0.10;
    double ratio_spread = 0.0;     ///< interquartile range of retained ratios
    std::vector<std::size_t> per_frame_counts;
};

struct RatioSet {
    std::vector<double> ratios;
    std::vector<std::size_t> per_frame_counts;
};

/// Projects every SfM point into every frame (or, when a point carries a
/// track, only its observed frames), and emits sfm_depth / metric_depth
/// for in-bounds projections that land on a valid depth pixel
/// (nearest-pixel lookup). Non-finite and non-positive ratios are dropped.
RatioSet collect_depth_ratios(const SfmPointSet& points, const std::vector<DepthMap>& depths,
                              const CameraTrajectory& trajectory);

/// Sorts the ratios, drops floor(0.10*n) from each end, and averages the
/// rest. Throws NumericError when nothing survives.
CalibrationReport estimate_scale(const std::vector<double>& ratios);

/// collect + estimate, with per-frame counts attached to the report.
CalibrationReport calibrate(const SfmPointSet& points, const std::vector<DepthMap>& depths,
                            const CameraTrajectory& trajectory);

/// Scales every camera position by `factor` (rotations and intrinsics
/// unchanged). factor == 1 returns a bit-identical trajectory.
CameraTrajectory apply_scale(const CameraTrajectory& trajectory, double factor);
CameraTrajectory apply_scale(const CameraTrajectory& trajectory, const CalibrationReport& report);

/// SfM points JSON: an array whose elements are [x,y,z] triples or
/// {"xyz": [x,y,z], "track": [{"frame": i, "pixel": [u,v]}, ...]} objects.
SfmPointSet load_sfm_points(const std::filesystem::path& path);
void save_sfm_points(const std::filesystem::path& path, const SfmPointSet& points);

}  // namespace camcond
