// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/metrics.hpp"

#include <cmath>
#include <json.hpp>

#include "camcond/error.hpp"
#include "camcond/io_util.hpp"

namespace camcond {

using nlohmann::json;

std::vector<int> sample_clip(int total_frames, const ClipSpec& spec) {
    if (spec.start_frame < 0 || !(spec.speed > 0.0) || spec.length < 1)
        throw ContractError("sample_clip: need start >= 0, speed > 0, length >= 1");
    std::vector<int> indices(static_cast<std::size_t>(spec.length));
    for (int i = 0; i < spec.length; ++i) {
        const int idx = static_cast<int>(std::floor(spec.start_frame + i * spec.speed));
        if (idx < 0 || idx >= total_frames)
            throw ContractError("sample_clip: index " + std::to_string(idx) +
                                " outside the source video (" + std::to_string(total_frames) +
                                " frames)");
        indices[static_cast<std::size_t>(i)] = idx;
    }
    return indices;
}

namespace {

void check_video_shapes(const std::vector<Image8>& generated,
                        const std::vector<Image8>& reference,
                        const std::vector<Image8>& masks) {
    if (generated.empty() || generated.size() != reference.size() ||
        generated.size() != masks.size())
        throw ContractError("metrics: generated, reference, and mask frame counts must match");
    for (std::size_t f = 0; f < generated.size(); ++f) {
        if (!generated[f].same_shape(reference[f]) || generated[f].channels != 3)
            throw ContractError("metrics: frames must be equally-sized RGB images");
        if (masks[f].width != generated[f].width || masks[f].height != generated[f].height ||
            masks[f].channels != 1)
            throw ContractError("metrics: masks must be single-channel and match the frames");
    }
}

std::vector<Image8> all_true_masks(const std::vector<Image8>& like) {
    std::vector<Image8> masks;
    masks.reserve(like.size());
    for (const Image8& f : like) masks.emplace_back(f.width, f.height, 1, 1);
    return masks;
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
constexpr double kC2 = (0.03 * 255) * (0.03 * 255);

std::vector<double> luminance(const Image8& frame) {
    std::vector<double> y(static_cast<std::size_t>(frame.width) *
                          static_cast<std::size_t>(frame.height));
    for (int py = 0; py < frame.height; ++py)
        for (int px = 0; px < frame.width; ++px)
            y[static_cast<std::size_t>(py) * frame.width + px] =
                0.299 * frame.at(px, py, 0) + 0.587 * frame.at(px, py, 1) +
                0.114 * frame.at(px, py, 2);
    return y;
}

// separable Gaussian over valid positions; out has (w - 10) x (h - 10)
// entries anchored at window centers
std::vector<double> gaussian_filter(const std::vector<double>& img, int w, int h) {
    static const std::vector<double> kernel = [] {
        std::vector<double> k(kWindow);
        double sum = 0.0;
        for (int i = 0; i < kWindow; ++i) {
            const double d = i - kWindow / 2;
            k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += k[static_cast<std::size_t>(i)];
        }
        for (double& v : k) v /= sum;
        return k;
    }();

    // horizontal pass (valid columns only)
    const int vw = w - kWindow + 1;
    std::vector<double> tmp(static_cast<std::size_t>(vw) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kWindow; ++i)
                acc += kernel[static_cast<std::size_t>(i)] *
                       img[static_cast<std::size_t>(y) * w + x + i];
            tmp[static_cast<std::size_t>(y) * vw + x] = acc;
        }
    // vertical pass
    const int vh = h - kWindow + 1;
    std::vector<double> out(static_cast<std::size_t>(vw) * static_cast<std::size_t>(vh));
    for (int y = 0; y < vh; ++y)
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kWindow; ++i)
                acc += kernel[static_cast<std::size_t>(i)] *
                       tmp[static_cast<std::size_t>(y + i) * vw + x];
            out[static_cast<std::size_t>(y) * vw + x] = acc;
        }
    return out;
}

}  // namespace

PsnrResult masked_psnr(const std::vector<Image8>& generated,
                       const std::vector<Image8>& reference,
                       const std::vector<Image8>& masks) {
    check_video_shapes(generated, reference, masks);
    if (generated.size() < 2)
        throw NumericError("masked_psnr: needs at least one frame beyond frame 0");

    double sq_sum = 0.0;
    std::uint64_t count = 0;
    for (std::size_t f = 1; f < generated.size(); ++f) {
        const Image8& g = generated[f];
        const Image8& r = reference[f];
        const Image8& m = masks[f];
        for (int y = 0; y < g.height; ++y)
            for (int x = 0; x < g.width; ++x) {
                if (!m.at(x, y)) continue;
                for (int c = 0; c < 3; ++c) {
                    const double d =
                        static_cast<double>(g.at(x, y, c)) - static_cast<double>(r.at(x, y, c));
                    sq_sum += d * d;
                }
                count += 3;
            }
    }
    if (count == 0) throw NumericError("masked_psnr: the mask selects no pixels");

    const double mse = sq_sum / static_cast<double>(count);
    if (mse == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {10.0 * std::log10(255.0 * 255.0 / mse), false};
}

double masked_ssim(const std::vector<Image8>& generated,
                   const std::vector<Image8>& reference,
                   const std::vector<Image8>& masks) {
    check_video_shapes(generated, reference, masks);
    if (generated.size() < 2)
        throw NumericError("masked_ssim: needs at least one frame beyond frame 0");
    const int w = generated[0].width;
    const int h = generated[0].height;
    if (w < kWindow || h < kWindow)
        throw NumericError("masked_ssim: frames smaller than the 11x11 window");

    double frame_sum = 0.0;
    int frame_count = 0;
    const int vw = w - kWindow + 1;
    const int vh = h - kWindow + 1;
    const int off = kWindow / 2;

    for (std::size_t f = 1; f < generated.size(); ++f) {
        const std::vector<double> x = luminance(generated[f]);
        const std::vector<double> y = luminance(reference[f]);
        std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const std::vector<double> mu_x = gaussian_filter(x, w, h);
        const std::vector<double> mu_y = gaussian_filter(y, w, h);
        const std::vector<double> s_xx = gaussian_filter(xx, w, h);
        const std::vector<double> s_yy = gaussian_filter(yy, w, h);
        const std::vector<double> s_xy = gaussian_filter(xy, w, h);

        double sum = 0.0;
        std::uint64_t n = 0;
        for (int vy = 0; vy < vh; ++vy)
            for (int vx = 0; vx < vw; ++vx) {
                if (!masks[f].at(vx + off, vy + off)) continue;
                const std::size_t i = static_cast<std::size_t>(vy) * vw + vx;
                const double mx = mu_x[i], my = mu_y[i];
                const double var_x = s_xx[i] - mx * mx;
                const double var_y = s_yy[i] - my * my;
                const double cov = s_xy[i] - mx * my;
                sum += ((2 * mx * my + kC1) * (2 * cov + kC2)) /
                       ((mx * mx + my * my + kC1) * (var_x + var_y + kC2));
                ++n;
            }
        if (n > 0) {
            frame_sum += sum / static_cast<double>(n);
            ++frame_count;
        }
    }
    if (frame_count == 0) throw NumericError("masked_ssim: the mask selects no windows");
    return frame_sum / frame_count;
}

PsnrResult full_frame_psnr(const std::vector<Image8>& generated,
                           const std::vector<Image8>& reference) {
    return masked_psnr(generated, reference, all_true_masks(generated));
}

NewContentRatio new_content_ratio(const std::vector<Image8>& masks) {
    if (masks.empty()) throw ContractError("new_content_ratio: empty mask sequence");
    NewContentRatio out;
    std::uint64_t pooled_false = 0, pooled_total = 0;
    for (std::size_t f = 0; f < masks.size(); ++f) {
        std::uint64_t false_count = 0;
        const std::uint64_t total = static_cast<std::uint64_t>(masks[f].width) *
                                    static_cast<std::uint64_t>(masks[f].height);
        for (int y = 0; y < masks[f].height; ++y)
            for (int x = 0; x < masks[f].width; ++x)
                if (!masks[f].at(x, y)) ++false_count;
        out.per_frame.push_back(static_cast<double>(false_count) / static_cast<double>(total));
        if (f >= 1) {
            pooled_false += false_count;
            pooled_total += total;
        }
    }
    out.pooled = pooled_total == 0
                     ? 0.0
                     : static_cast<double>(pooled_false) / static_cast<double>(pooled_total);
    return out;
}

void save_metrics_report(const std::filesystem::path& path, const MetricsReport& report) {
    json doc;
    doc["metadata"] = {{"mask_source", report.mask_source},
                       {"frame0_excluded", true},
                       {"psnr_pooling", "sequence"},
                       {"ssim_mask_rule", "window center masked"}};
    json speeds = json::array();
    for (const SpeedMetrics& s : report.per_speed) {
        json e;
        e["speed"] = s.speed;
        e["frame_count"] = s.frame_count;
        e["clip_indices"] = s.clip_indices;
        e["masked_psnr_db"] =
            s.masked_psnr.infinite ? json(nullptr) : json(s.masked_psnr.db);
        e["masked_psnr_infinite"] = s.masked_psnr.infinite;
        e["masked_ssim"] = s.masked_ssim;
        e["fpsnr_db"] = s.fpsnr.infinite ? json(nullptr) : json(s.fpsnr.db);
        e["fpsnr_infinite"] = s.fpsnr.infinite;
        e["new_content_ratio"] = s.new_content_ratio;
        if (!s.extra.empty()) {
            json extra = json::array();
            for (const ExtraMetricScore& m : s.extra)
                extra.push_back({{"name", m.name}, {"version", m.version}, {"score", m.score}});
            e["extra_metrics"] = std::move(extra);
        }
        speeds.push_back(std::move(e));
    }
    doc["per_speed"] = std::move(speeds);
    atomic_write_bytes(path, doc.dump(2) + "\n");
}

}  // namespace camcond
