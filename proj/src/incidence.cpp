// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/incidence.hpp"

#include <algorithm>
#include <cstring>

#include "camcond/error.hpp"
#include "camcond/io_util.hpp"
#include "camcond/parallel.hpp"

namespace camcond {

SparseIncidence build_incidence(const CameraTrajectory& trajectory, const VoxelGrid& grid,
                                int downsample) {
    if (downsample < 1 || trajectory.width() % downsample != 0 ||
        trajectory.height() % downsample != 0)
        throw ContractError("build_incidence: downsample must divide image dimensions");

    SparseIncidence inc;
    inc.frames = static_cast<int>(trajectory.size());
    inc.width = trajectory.width() / downsample;
    inc.height = trajectory.height() / downsample;
    inc.resolution = grid.resolution;

    const std::size_t n_rays = static_cast<std::size_t>(inc.frames) *
                               static_cast<std::size_t>(inc.width) *
                               static_cast<std::size_t>(inc.height);
    inc.per_ray.resize(n_rays);

    parallel_for(static_cast<std::size_t>(inc.frames), [&](std::size_t f) {
        CameraPose pose = trajectory[f];
        pose.intrinsics = pose.intrinsics.downsampled(downsample);
        for (int y = 0; y < inc.height; ++y) {
            for (int x = 0; x < inc.width; ++x) {
                const Ray ray = pixel_to_ray(pose, x, y);
                auto& list = inc.per_ray[inc.ray_index(static_cast<int>(f), x, y)];
                for (const VoxelSegment& s : traverse(ray, grid))
                    list.push_back({grid.linear_index(s.cell), s.t_entry, s.t_exit});
            }
        }
    });

    inc.per_voxel.resize(static_cast<std::size_t>(grid.voxel_count()));
    for (int f = 0; f < inc.frames; ++f)
        for (int p = 0; p < inc.width * inc.height; ++p) {
            const auto& list = inc.per_ray[static_cast<std::size_t>(f) *
                                               static_cast<std::size_t>(inc.width * inc.height) +
                                           static_cast<std::size_t>(p)];
            for (const VoxelHit& hit : list)
                inc.per_voxel[static_cast<std::size_t>(hit.voxel)].push_back(
                    {f, p, hit.t_entry});
        }
    for (auto& list : inc.per_voxel)
        std::sort(list.begin(), list.end(), [](const PixelHit& a, const PixelHit& b) {
            if (a.t_entry != b.t_entry) return a.t_entry < b.t_entry;
            if (a.frame != b.frame) return a.frame < b.frame;
            return a.pixel < b.pixel;
        });
    return inc;
}

namespace {

void append_u32(std::string& out, std::uint32_t v) {
    out.append(reinterpret_cast<const char*>(&v), 4);
}

void append_f32(std::string& out, float v) { out.append(reinterpret_cast<const char*>(&v), 4); }

void append_varint(std::string& out, std::uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<char>((v & 0x7F) | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<char>(v));
}

struct Cursor {
    const std::string& bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw FormatError("CCVI: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v;
        std::memcpy(&v, bytes.data() + pos, 4);
        pos += 4;
        return v;
    }
    float f32() {
        need(4);
        float v;
        std::memcpy(&v, bytes.data() + pos, 4);
        pos += 4;
        return v;
    }
    std::uint64_t varint() {
        std::uint64_t v = 0;
        int shift = 0;
        for (;;) {
            need(1);
            const std::uint8_t b = static_cast<std::uint8_t>(bytes[pos++]);
            v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
            if ((b & 0x80) == 0) break;
            shift += 7;
            if (shift > 63) throw FormatError("CCVI: varint overflow");
        }
        return v;
    }
};

}  // namespace

void write_ccvi(const std::filesystem::path& path, const SparseIncidence& inc) {
    std::string out;
    out.append("CCVI", 4);
    append_u32(out, static_cast<std::uint32_t>(inc.resolution.x()));
    append_u32(out, static_cast<std::uint32_t>(inc.resolution.y()));
    append_u32(out, static_cast<std::uint32_t>(inc.resolution.z()));
    append_u32(out, static_cast<std::uint32_t>(inc.frames));
    append_u32(out, static_cast<std::uint32_t>(inc.width));
    append_u32(out, static_cast<std::uint32_t>(inc.height));
    for (const auto& list : inc.per_ray) {
        append_varint(out, list.size());
        for (const VoxelHit& hit : list) {
            append_u32(out, static_cast<std::uint32_t>(hit.voxel));
            append_f32(out, static_cast<float>(hit.t_entry));
            append_f32(out, static_cast<float>(hit.t_exit));
        }
    }
    atomic_write_bytes(path, out);
}

SparseIncidence read_ccvi(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    if (bytes.size() < 28 || std::memcmp(bytes.data(), "CCVI", 4) != 0)
        throw FormatError(path.string() + ": not a CCVI file");
    Cursor cur{bytes, 4};

    SparseIncidence inc;
    inc.resolution.x() = static_cast<int>(cur.u32());
    inc.resolution.y() = static_cast<int>(cur.u32());
    inc.resolution.z() = static_cast<int>(cur.u32());
    inc.frames = static_cast<int>(cur.u32());
    inc.width = static_cast<int>(cur.u32());
    inc.height = static_cast<int>(cur.u32());
    if ((inc.resolution.array() < 1).any() || inc.frames < 1 || inc.width < 1 || inc.height < 1)
        throw FormatError(path.string() + ": bad CCVI header");

    const std::size_t n_rays = static_cast<std::size_t>(inc.frames) *
                               static_cast<std::size_t>(inc.width) *
                               static_cast<std::size_t>(inc.height);
    const int n_voxels = inc.resolution.x() * inc.resolution.y() * inc.resolution.z();
    inc.per_ray.resize(n_rays);
    for (std::size_t r = 0; r < n_rays; ++r) {
        const std::uint64_t count = cur.varint();
        auto& list = inc.per_ray[r];
        list.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            VoxelHit hit;
            hit.voxel = static_cast<std::int32_t>(cur.u32());
            if (hit.voxel < 0 || hit.voxel >= n_voxels)
                throw FormatError(path.string() + ": voxel index out of range");
            hit.t_entry = cur.f32();
            hit.t_exit = cur.f32();
            list.push_back(hit);
        }
    }
    if (cur.pos != bytes.size()) throw FormatError(path.string() + ": trailing bytes");

    inc.per_voxel.resize(static_cast<std::size_t>(n_voxels));
    for (int f = 0; f < inc.frames; ++f)
        for (int p = 0; p < inc.width * inc.height; ++p) {
            const auto& list = inc.per_ray[static_cast<std::size_t>(f) *
                                               static_cast<std::size_t>(inc.width * inc.height) +
                                           static_cast<std::size_t>(p)];
            for (const VoxelHit& hit : list)
                inc.per_voxel[static_cast<std::size_t>(hit.voxel)].push_back({f, p, hit.t_entry});
        }
    for (auto& list : inc.per_voxel)
        std::sort(list.begin(), list.end(), [](const PixelHit& a, const PixelHit& b) {
            if (a.t_entry != b.t_entry) return a.t_entry < b.t_entry;
            if (a.frame != b.frame) return a.frame < b.frame;
            return a.pixel < b.pixel;
        });
    return inc;
}

}  // namespace camcond
