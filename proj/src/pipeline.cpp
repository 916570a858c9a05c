// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/pipeline.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <json.hpp>

#include "camcond/calibration.hpp"
#include "camcond/error.hpp"
#include "camcond/image_io.hpp"
#include "camcond/incidence.hpp"
#include "camcond/io_util.hpp"
#include "camcond/metrics.hpp"
#include "camcond/parallel.hpp"
#include "camcond/ray_images.hpp"
#include "camcond/rng.hpp"
#include "camcond/reprojection.hpp"
#include "camcond/synthetic.hpp"
#include "camcond/toy_net.hpp"
#include "camcond/trajectory_io.hpp"

namespace camcond {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string frame_name(const char* prefix, std::size_t index, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%05zu.%s", prefix, index, ext);
    return buf;
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& prefix,
                                 const std::string& ext) {
    if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind(prefix, 0) == 0 && name.size() > ext.size() &&
            name.compare(name.size() - ext.size(), ext.size(), ext) == 0)
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

DepthMap load_depth(const fs::path& path) {
    DepthMap depth;
    if (path.extension() == ".pfm") {
        const ImageF img = read_pfm(path);
        depth = DepthMap(img.width, img.height);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const float v = img.at(x, y);
                if (std::isfinite(v) && v > 0.0f) depth.set(x, y, v);
            }
    } else if (path.extension() == ".png") {
        const Image16 img = read_png16(path);
        depth = DepthMap(img.width, img.height);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                if (img.at(x, y) > 0) depth.set(x, y, img.at(x, y) / 1000.0);  // mm
    } else {
        throw FormatError(path.string() + ": depth must be .pfm (meters) or 16-bit .png (mm)");
    }
    depth.check();
    return depth;
}

void save_depth(const fs::path& path, const DepthMap& depth, const std::string& format) {
    if (format == "pfm") {
        ImageF img(depth.width, depth.height, 1);
        for (int y = 0; y < depth.height; ++y)
            for (int x = 0; x < depth.width; ++x)
                img.at(x, y) = depth.is_valid(x, y) ? static_cast<float>(depth.at(x, y)) : 0.0f;
        write_pfm(path, img);
    } else {
        Image16 img(depth.width, depth.height, 1);
        for (int y = 0; y < depth.height; ++y)
            for (int x = 0; x < depth.width; ++x)
                img.at(x, y) = depth.is_valid(x, y)
                                   ? static_cast<std::uint16_t>(std::lround(
                                         std::clamp(depth.at(x, y) * 1000.0, 0.0, 65535.0)))
                                   : 0;
        write_png16(path, img);
    }
}

Image8 load_rgb(const fs::path& path) {
    Image8 img = read_png(path);
    if (img.channels == 1) {
        Image8 rgb(img.width, img.height, 3);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                rgb.at(x, y, 0) = rgb.at(x, y, 1) = rgb.at(x, y, 2) = img.at(x, y);
        return rgb;
    }
    if (img.channels != 3) throw FormatError(path.string() + ": expected an RGB PNG");
    return img;
}

Image8 load_mask(const fs::path& path) {
    const Image8 img = read_png(path);
    if (img.channels != 1) throw FormatError(path.string() + ": masks must be single-channel");
    Image8 mask(img.width, img.height, 1, 0);
    for (std::size_t i = 0; i < img.data.size(); ++i) mask.data[i] = img.data[i] >= 128 ? 1 : 0;
    return mask;
}

// ---- subcommand payloads ---------------------------------------------------

struct SynthArgs {
    std::string out_dir;
    std::string path = "dolly";
    int frames = 25;
    int width = 256;
    int height = 160;
    int boxes = 2;
    double scale = 1.0;
    int sfm_count = 0;
    std::string depth_format = "pfm";
};

void run_synth(const SynthArgs& args, std::uint64_t seed, bool quiet) {
    const GeneratedScene generated = generate_scene(seed, path_kind_from_string(args.path),
                                                    args.frames, args.width, args.height,
                                                    args.boxes);
    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    for (std::size_t i = 0; i < generated.trajectory.size(); ++i) {
        write_png(dir / frame_name("frame", i, "png"), generated.images[i]);
        save_depth(dir / frame_name("depth", i, args.depth_format == "pfm" ? "pfm" : "png"),
                   generated.depths[i], args.depth_format);
    }

    // exported camera positions (and SfM points) carry the requested
    // unit mis-scaling; depth maps stay metric
    CameraTrajectory exported = apply_scale(generated.trajectory, args.scale);
    save_trajectory(dir / "trajectory.json", exported);

    if (args.sfm_count > 0) {
        SfmPointSet points = sample_surface_points(generated, args.sfm_count, seed);
        for (SfmPoint& p : points.points) p.position *= args.scale;
        save_sfm_points(dir / "sfm_points.json", points);
    }

    json meta;
    meta["seed"] = seed;
    meta["path"] = args.path;
    meta["frames"] = args.frames;
    meta["boxes"] = args.boxes;
    meta["scale"] = args.scale;
    atomic_write_bytes(dir / "scene.json", meta.dump(2) + "\n");
    if (!quiet)
        std::cout << "synth: wrote " << generated.trajectory.size() << " frames to "
                  << args.out_dir << "\n";
}

struct RaysArgs {
    std::string trajectory;
    std::string out_dir;
    std::string format = "f32";
};

void run_rays(const RaysArgs& args, bool quiet) {
    const CameraTrajectory trajectory = load_trajectory(args.trajectory);
    const std::vector<RayImagePair> pairs = render_ray_images(trajectory);
    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);

    json meta;
    meta["format"] = args.format;
    meta["offset_applied"] = {pairs[0].offset_applied.x(), pairs[0].offset_applied.y(),
                              pairs[0].offset_applied.z()};

    if (args.format == "f32") {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            write_ccri(dir / frame_name("rays_dir", i, "f32"), pairs[i].directions);
            write_ccri(dir / frame_name("rays_org", i, "f32"), pairs[i].origins);
        }
    } else if (args.format == "png8") {
        float max_origin = 0.0f;
        for (const RayImagePair& p : pairs)
            for (float v : p.origins.data) max_origin = std::max(max_origin, v);
        const double scale = max_origin > 0.0f ? 255.0 / max_origin : 1.0;
        meta["origin_png_scale"] = scale;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            Image8 dir_img(pairs[i].directions.width, pairs[i].directions.height, 3);
            for (std::size_t j = 0; j < dir_img.data.size(); ++j)
                dir_img.data[j] = static_cast<std::uint8_t>(
                    std::lround(std::clamp(double(pairs[i].directions.data[j]), 0.0, 1.0) * 255));
            write_png(dir / frame_name("rays_dir", i, "png"), dir_img);

            Image8 org_img(pairs[i].origins.width, pairs[i].origins.height, 3);
            for (std::size_t j = 0; j < org_img.data.size(); ++j)
                org_img.data[j] = static_cast<std::uint8_t>(std::lround(
                    std::clamp(double(pairs[i].origins.data[j]) * scale, 0.0, 255.0)));
            write_png(dir / frame_name("rays_org", i, "png"), org_img);
        }
    } else {
        throw UsageError("--format must be f32 or png8");
    }
    atomic_write_bytes(dir / "rays_meta.json", meta.dump(2) + "\n");
    if (!quiet) std::cout << "rays: wrote " << pairs.size() << " frame pairs\n";
}

struct ReprojectArgs {
    std::string image;
    std::string depth;
    std::string trajectory;
    std::string out_dir;
    std::string background = "255,0,255";
};

Rgb8 parse_background(const std::string& text) {
    int r = 0, g = 0, b = 0;
    if (std::sscanf(text.c_str(), "%d,%d,%d", &r, &g, &b) != 3 || r < 0 || r > 255 || g < 0 ||
        g > 255 || b < 0 || b > 255)
        throw UsageError("--background expects R,G,B with components in 0..255");
    return Rgb8{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                static_cast<std::uint8_t>(b)};
}

void run_reproject(const ReprojectArgs& args, bool quiet) {
    const Image8 image = load_rgb(args.image);
    const DepthMap depth = load_depth(args.depth);
    const CameraTrajectory trajectory = load_trajectory(args.trajectory);
    const Rgb8 background = parse_background(args.background);

    const ReprojectedVideo video = reproject_sequence(image, depth, trajectory, background);
    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);

    json manifest;
    manifest["background"] = {background.r, background.g, background.b};
    manifest["width"] = image.width;
    manifest["height"] = image.height;
    json frames = json::array();
    json masks = json::array();
    for (std::size_t i = 0; i < video.frames.size(); ++i) {
        const std::string fname = frame_name("frame", i, "png");
        const std::string mname = frame_name("mask", i, "png");
        write_png(dir / fname, video.frames[i]);
        Image8 mask(video.masks[i].width, video.masks[i].height, 1);
        for (std::size_t j = 0; j < mask.data.size(); ++j)
            mask.data[j] = video.masks[i].data[j] ? 255 : 0;
        write_png(dir / mname, mask);
        frames.push_back(fname);
        masks.push_back(mname);
    }
    manifest["frames"] = std::move(frames);
    manifest["masks"] = std::move(masks);
    atomic_write_bytes(dir / "manifest.json", manifest.dump(2) + "\n");
    if (!quiet) std::cout << "reproject: wrote " << video.frames.size() << " frames\n";
}

struct CalibrateArgs {
    std::string trajectory;
    std::string depth_dir;
    std::string sfm_points;
    std::string out;
    std::string report;
};

void run_calibrate(const CalibrateArgs& args, bool quiet) {
    const CameraTrajectory trajectory = load_trajectory(args.trajectory);
    const SfmPointSet points = load_sfm_points(args.sfm_points);

    std::vector<fs::path> depth_files = list_files(args.depth_dir, "depth_", ".pfm");
    if (depth_files.empty()) depth_files = list_files(args.depth_dir, "depth_", ".png");
    if (depth_files.size() != trajectory.size())
        throw FormatError("calibrate: found " + std::to_string(depth_files.size()) +
                          " depth maps for " + std::to_string(trajectory.size()) + " frames");
    std::vector<DepthMap> depths;
    depths.reserve(depth_files.size());
    for (const fs::path& p : depth_files) depths.push_back(load_depth(p));

    const CalibrationReport report = calibrate(points, depths, trajectory);
    const CameraTrajectory metric = apply_scale(trajectory, report);
    save_trajectory(args.out, metric);

    if (!args.report.empty()) {
        json doc;
        doc["mean_ratio"] = report.mean_ratio;
        doc["scale_to_metric"] = report.scale_to_metric;
        doc["ratio_count"] = report.ratio_count;
        doc["trimmed_fraction"] = report.trimmed_fraction;
        doc["ratio_spread"] = report.ratio_spread;
        doc["per_frame_counts"] = report.per_frame_counts;
        atomic_write_bytes(args.report, doc.dump(2) + "\n");
    }
    if (!quiet)
        std::cout << "calibrate: mean ratio " << report.mean_ratio << ", applied factor "
                  << report.scale_to_metric << "\n";
}

struct VoxelizeArgs {
    std::string trajectory;
    int resolution = 32;
    double extent = 8.0;
    int downsample = 8;
    std::string out;
};

void run_voxelize(const VoxelizeArgs& args, bool quiet) {
    const CameraTrajectory trajectory = load_trajectory(args.trajectory);
    const VoxelGrid grid =
        build_grid(trajectory, Eigen::Vector3i::Constant(args.resolution),
                   Eigen::Vector3d::Constant(args.extent), 0);
    const SparseIncidence incidence = build_incidence(trajectory, grid, args.downsample);
    write_ccvi(args.out, incidence);
    if (!quiet) {
        std::size_t segments = 0;
        for (const auto& list : incidence.per_ray) segments += list.size();
        std::cout << "voxelize: " << incidence.per_ray.size() << " rays, " << segments
                  << " segments\n";
    }
}

struct ToyForwardArgs {
    std::string config;
    std::string out;
};

void append_tensor(std::string& out, const std::string& name, const std::vector<int>& dims,
                   const double* data, std::size_t count) {
    auto put_u32 = [&out](std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); };
    put_u32(static_cast<std::uint32_t>(name.size()));
    out.append(name);
    put_u32(static_cast<std::uint32_t>(dims.size()));
    for (int d : dims) put_u32(static_cast<std::uint32_t>(d));
    out.append(reinterpret_cast<const char*>(data), count * sizeof(double));
}

void run_toy_forward(const ToyForwardArgs& args, std::uint64_t seed, bool quiet) {
    json cfg_doc = json::parse(read_file_bytes(args.config), nullptr, false);
    if (cfg_doc.is_discarded()) throw FormatError(args.config + ": invalid JSON");

    ToyNetConfig cfg;
    cfg.seed = seed;
    const int frames = cfg_doc.value("frames", 2);
    const int image = cfg_doc.value("image_size", 32);
    cfg.latent_channels = cfg_doc.value("latent_channels", 4);
    cfg.ch0 = cfg_doc.value("ch0", 8);
    cfg.ch1 = cfg_doc.value("ch1", 16);
    cfg.cond_extrinsics = cfg_doc.value("extrinsics", false);
    cfg.cond_rays = cfg_doc.value("rays", false);
    cfg.cond_reproj = cfg_doc.value("reprojection", false);
    cfg.raytran_stages = cfg_doc.value("raytran_stages", 0);
    cfg.grid_resolution = Eigen::Vector3i::Constant(cfg_doc.value("grid_resolution", 4));
    cfg.grid_extent = cfg_doc.value("grid_extent", 8.0);
    const std::string path = cfg_doc.value("path", "orbit");

    // a tiny synthetic capture provides geometry-consistent conditions
    const GeneratedScene generated =
        generate_scene(seed, path_kind_from_string(path), frames, image, image, 1);
    ToyConditioningNet net(cfg, generated.trajectory);

    Rng rng(seed ^ 0x70FFull);
    FeatureVideo latent(frames, net.latent_height(), net.latent_width(), cfg.latent_channels);
    for (double& v : latent.data) v = rng.normal();

    std::vector<FeatureVideo> conditions;
    if (cfg.cond_rays) {
        const auto pairs = render_ray_images(generated.trajectory);
        FeatureVideo rays(frames, image, image, 6);
        for (int f = 0; f < frames; ++f)
            for (int y = 0; y < image; ++y)
                for (int x = 0; x < image; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        rays.at(f, y, x, c) = pairs[static_cast<std::size_t>(f)].directions.at(x, y, c);
                        rays.at(f, y, x, 3 + c) = pairs[static_cast<std::size_t>(f)].origins.at(x, y, c);
                    }
                }
        conditions.push_back(average_pool(rays, 4));
    }
    if (cfg.cond_reproj) {
        const ReprojectedVideo video =
            reproject_sequence(generated.images[0], generated.depths[0], generated.trajectory);
        FeatureVideo reproj(frames, image, image, 3);
        for (int f = 0; f < frames; ++f)
            for (int y = 0; y < image; ++y)
                for (int x = 0; x < image; ++x)
                    for (int c = 0; c < 3; ++c)
                        reproj.at(f, y, x, c) =
                            video.frames[static_cast<std::size_t>(f)].at(x, y, c) / 255.0;
        conditions.push_back(average_pool(reproj, 4));
    }

    const ResidualStack stack = net.control_branch_forward(latent, conditions);
    const FeatureVideo output = net.merged_forward(latent, stack);

    std::string bytes;
    bytes.append("CCTA", 4);
    const std::uint32_t count = 1 + static_cast<std::uint32_t>(stack.stages.size());
    bytes.append(reinterpret_cast<const char*>(&count), 4);
    append_tensor(bytes, "output",
                  {output.frames, output.height, output.width, output.channels},
                  output.data.data(), output.data.size());
    for (std::size_t i = 0; i < stack.stages.size(); ++i) {
        const FeatureVideo& s = stack.stages[i];
        append_tensor(bytes, "stack" + std::to_string(i),
                      {s.frames, s.height, s.width, s.channels}, s.data.data(), s.data.size());
    }
    atomic_write_bytes(args.out, bytes);
    if (!quiet)
        std::cout << "toy-forward: wrote " << count << " tensors to " << args.out << "\n";
}

struct EvalArgs {
    std::string generated;
    std::string reference;
    std::string masks;
    std::string speeds = "1,2,4,8";
    int frames = 0;  // 0 = as many as fit
    std::string out;
};

std::vector<double> parse_speeds(const std::string& text) {
    std::vector<double> speeds;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        try {
            speeds.push_back(std::stod(text.substr(pos, next - pos)));
        } catch (...) {
            throw UsageError("--speeds expects a comma-separated list of numbers");
        }
        pos = next + 1;
    }
    if (speeds.empty()) throw UsageError("--speeds expects at least one speed");
    for (double s : speeds)
        if (!(s > 0.0)) throw UsageError("--speeds entries must be positive");
    return speeds;
}

void run_eval(const EvalArgs& args, bool quiet) {
    const std::vector<fs::path> gen_files = list_files(args.generated, "frame_", ".png");
    const std::vector<fs::path> ref_files = list_files(args.reference, "frame_", ".png");
    const std::vector<fs::path> mask_files = list_files(args.masks, "mask_", ".png");
    if (gen_files.empty()) throw FormatError("eval: no frame_*.png in " + args.generated);
    if (gen_files.size() != ref_files.size() || gen_files.size() != mask_files.size())
        throw FormatError("eval: generated, reference, and mask frame counts differ");

    std::vector<Image8> generated, reference, masks;
    for (std::size_t i = 0; i < gen_files.size(); ++i) {
        generated.push_back(load_rgb(gen_files[i]));
        reference.push_back(load_rgb(ref_files[i]));
        masks.push_back(load_mask(mask_files[i]));
    }

    const int total = static_cast<int>(generated.size());
    MetricsReport report;
    report.mask_source = args.masks;
    for (double speed : parse_speeds(args.speeds)) {
        const int max_fit = static_cast<int>(std::floor((total - 1) / speed)) + 1;
        const int length = args.frames > 0 ? args.frames : max_fit;
        const std::vector<int> indices = sample_clip(total, {0, speed, length});

        std::vector<Image8> g, r, m;
        for (int idx : indices) {
            g.push_back(generated[static_cast<std::size_t>(idx)]);
            r.push_back(reference[static_cast<std::size_t>(idx)]);
            m.push_back(masks[static_cast<std::size_t>(idx)]);
        }

        SpeedMetrics entry;
        entry.speed = speed;
        entry.frame_count = length;
        entry.clip_indices = indices;
        entry.masked_psnr = masked_psnr(g, r, m);
        entry.masked_ssim = masked_ssim(g, r, m);
        entry.fpsnr = full_frame_psnr(g, r);
        entry.new_content_ratio = new_content_ratio(m).pooled;
        report.per_speed.push_back(std::move(entry));
    }
    save_metrics_report(args.out, report);
    if (!quiet) {
        for (const SpeedMetrics& s : report.per_speed)
            std::cout << "eval: speed x" << s.speed << " masked_psnr "
                      << (s.masked_psnr.infinite ? std::string("inf")
                                                 : std::to_string(s.masked_psnr.db))
                      << " dB, ssim " << s.masked_ssim << ", new content "
                      << s.new_content_ratio << "\n";
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"camera-conditioning toolkit: ray images, depth reprojection, "
                 "metric calibration, voxel incidence, toy conditioning net, and "
                 "masked video metrics"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = 0;
    bool quiet = false;
    std::uint64_t seed = 0;
    app.add_option("--threads", threads, "worker threads (0 = auto)");
    app.add_flag("--quiet", quiet, "suppress progress output");
    app.add_option("--seed", seed, "seed for generators and toy parameters");

    SynthArgs synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene capture");
    synth_cmd->add_option("--out-dir", synth.out_dir, "output directory")->required();
    synth_cmd->add_option("--path", synth.path, "camera path: static|dolly|orbit");
    synth_cmd->add_option("--frames", synth.frames, "frame count");
    synth_cmd->add_option("--width", synth.width, "image width");
    synth_cmd->add_option("--height", synth.height, "image height");
    synth_cmd->add_option("--boxes", synth.boxes, "number of boxes in the room");
    synth_cmd->add_option("--scale", synth.scale,
                          "mis-scale exported camera positions and SfM points by this factor");
    synth_cmd->add_option("--sfm-count", synth.sfm_count, "surface points to export");
    synth_cmd->add_option("--depth-format", synth.depth_format, "pfm|png16");

    RaysArgs rays;
    CLI::App* rays_cmd = app.add_subcommand("rays", "render ray direction/origin images");
    rays_cmd->add_option("--trajectory", rays.trajectory, "trajectory JSON")->required();
    rays_cmd->add_option("--out-dir", rays.out_dir, "output directory")->required();
    rays_cmd->add_option("--format", rays.format, "f32|png8");

    ReprojectArgs reproject;
    CLI::App* reproject_cmd =
        app.add_subcommand("reproject", "reproject frame 0 onto all frames");
    reproject_cmd->add_option("--image", reproject.image, "frame 0 PNG")->required();
    reproject_cmd->add_option("--depth", reproject.depth, "frame 0 depth (.pfm or 16-bit .png)")
        ->required();
    reproject_cmd->add_option("--trajectory", reproject.trajectory, "trajectory JSON")
        ->required();
    reproject_cmd->add_option("--out-dir", reproject.out_dir, "output directory")->required();
    reproject_cmd->add_option("--background", reproject.background, "background color R,G,B");

    CalibrateArgs calibrate;
    CLI::App* calibrate_cmd =
        app.add_subcommand("calibrate", "estimate and apply the SfM-to-metric scale");
    calibrate_cmd->add_option("--trajectory", calibrate.trajectory, "trajectory JSON")
        ->required();
    calibrate_cmd->add_option("--depth-dir", calibrate.depth_dir, "directory of depth_* maps")
        ->required();
    calibrate_cmd->add_option("--sfm-points", calibrate.sfm_points, "SfM points JSON")
        ->required();
    calibrate_cmd->add_option("--out", calibrate.out, "calibrated trajectory JSON")->required();
    calibrate_cmd->add_option("--report", calibrate.report, "calibration report JSON");

    VoxelizeArgs voxelize;
    CLI::App* voxelize_cmd =
        app.add_subcommand("voxelize", "build the sparse pixel/voxel incidence");
    voxelize_cmd->add_option("--trajectory", voxelize.trajectory, "trajectory JSON")->required();
    voxelize_cmd->add_option("--resolution", voxelize.resolution, "voxels per axis");
    voxelize_cmd->add_option("--extent", voxelize.extent, "grid side length, meters");
    voxelize_cmd->add_option("--downsample", voxelize.downsample, "pixel downsampling factor");
    voxelize_cmd->add_option("--out", voxelize.out, "output CCVI file")->required();

    ToyForwardArgs toy;
    CLI::App* toy_cmd =
        app.add_subcommand("toy-forward", "run the toy conditioned UNet once");
    toy_cmd->add_option("--config", toy.config, "config JSON")->required();
    toy_cmd->add_option("--out", toy.out, "activations output file")->required();

    EvalArgs eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "masked video quality metrics");
    eval_cmd->add_option("--generated", eval.generated, "directory of generated frame_*.png")
        ->required();
    eval_cmd->add_option("--reference", eval.reference, "directory of reference frame_*.png")
        ->required();
    eval_cmd->add_option("--masks", eval.masks, "directory of mask_*.png")->required();
    eval_cmd->add_option("--speeds", eval.speeds, "comma-separated sampling speeds");
    eval_cmd->add_option("--frames", eval.frames, "clip length (0 = as many as fit)");
    eval_cmd->add_option("--out", eval.out, "report JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e);
            return 0;
        }
        std::cerr << "usage: " << e.what() << "\n";
        return 1;
    }

    set_thread_count(threads);
    try {
        if (synth_cmd->parsed()) run_synth(synth, seed, quiet);
        if (rays_cmd->parsed()) run_rays(rays, quiet);
        if (reproject_cmd->parsed()) run_reproject(reproject, quiet);
        if (calibrate_cmd->parsed()) run_calibrate(calibrate, quiet);
        if (voxelize_cmd->parsed()) run_voxelize(voxelize, quiet);
        if (toy_cmd->parsed()) run_toy_forward(toy, seed, quiet);
        if (eval_cmd->parsed()) run_eval(eval, quiet);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace camcond
