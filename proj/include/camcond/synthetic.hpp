// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <vector>

#include "camcond/calibration.hpp"
#include "camcond/camera.hpp"
#include "camcond/image.hpp"
#include "camcond/reprojection.hpp"

namespace camcond {

enum class PathKind { Static, Dolly, Orbit };

PathKind path_kind_from_string(const std::string& name);

/// Axis-aligned room with optional boxes inside, colored by a smooth
/// world-space RGB field. Depth and color are exact ray-box intersections,
/// so renders double as ground truth for reprojection and calibration.
class SyntheticScene {
public:
    SyntheticScene(std::uint64_t seed, int box_count);

    /// Smallest positive hit parameter, or +inf when the ray escapes
    /// (cannot happen from inside the room).
    double hit(const Ray& ray) const;

    Rgb8 color_at(const Eigen::Vector3d& point) const;

    Image8 render_image(const CameraPose& pose) const;
    DepthMap render_depth(const CameraPose& pose) const;

    const Eigen::AlignedBox3d& room() const { return room_; }

private:
    struct TextureWave {
        Eigen::Vector3d direction;
        double wavelength;
        double phase;
        double amplitude;
    };

    double field(const Eigen::Vector3d& p, int channel) const;

    Eigen::AlignedBox3d room_;
    std::vector<Eigen::AlignedBox3d> boxes_;
    std::vector<TextureWave> waves_[3];
};

struct GeneratedScene {
    SyntheticScene scene;
    CameraTrajectory trajectory;
    std::vector<Image8> images;
    std::vector<DepthMap> depths;
};

/// Deterministic scene + camera path + exact renders. The world frame is
/// the first camera's frame (identity extrinsics at frame 0, y down,
/// z forward).
GeneratedScene generate_scene(std::uint64_t seed, PathKind path, int frames, int width,
                              int height, int box_count = 2);

/// Surface points sampled at exact pixel centers, each carrying a
/// one-observation track at its source frame. Positions are in the
/// scene's metric units; callers scale them to fake SfM exports.
SfmPointSet sample_surface_points(const GeneratedScene& generated, int count,
                                  std::uint64_t seed, bool with_tracks = true);

}  // namespace camcond
