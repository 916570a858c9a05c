// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "camcond/camera.hpp"

namespace camcond {

/// Trajectory JSON: {"width", "height", "frames": [{"index", "fx", "fy",
/// "cx", "cy", "rotation": [9, row-major], "translation": [3]}, ...]}.
/// Numbers round-trip exactly (shortest representation that re-parses to
/// the same double).
CameraTrajectory load_trajectory(const std::filesystem::path& path);
void save_trajectory(const std::filesystem::path& path, const CameraTrajectory& trajectory);

}  // namespace camcond
