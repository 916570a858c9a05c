// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "camcond/image.hpp"

namespace camcond {

/// Clip sampling parameters: frames are taken at indices floor(f + i*s)
/// for i in [0, F).
struct ClipSpec {
    int start_frame = 0;   // f
    double speed = 1.0;    // s, fractional allowed
    int length = 1;        // F
};

/// The sampled indices; throws ContractError when the clip reaches past
/// the end of the source video.
std::vector<int> sample_clip(int total_frames, const ClipSpec& spec);

struct PsnrResult {
    double db = 0.0;
    bool infinite = false;  // identical content under the mask
};

/// PSNR over masked pixels, MSE pooled across the whole sequence with
/// frame 0 excluded (it is the conditioning frame). MAX = 255.
PsnrResult masked_psnr(const std::vector<Image8>& generated,
                       const std::vector<Image8>& reference,
                       const std::vector<Image8>& masks);

/// Standard SSIM (11x11 Gaussian window, sigma 1.5, K1 = 0.01,
/// K2 = 0.03) on luminance, averaged over windows whose center pixel is
/// masked, then over frames 1..N.
double masked_ssim(const std::vector<Image8>& generated,
                   const std::vector<Image8>& reference,
                   const std::vector<Image8>& masks);

/// masked_psnr with an all-true mask.
PsnrResult full_frame_psnr(const std::vector<Image8>& generated,
                           const std::vector<Image8>& reference);

struct NewContentRatio {
    std::vector<double> per_frame;  // all frames
    double pooled = 0.0;            // frames 1..N
};

/// Fraction of mask-false pixels (content the reprojection could not
/// supply).
NewContentRatio new_content_ratio(const std::vector<Image8>& masks);

/// Whole-sequence quality metric supplied from outside (LPIPS, FVD need
/// pretrained networks and are not implemented here).
class SequenceMetric {
public:
    virtual ~SequenceMetric() = default;
    virtual std::string name() const = 0;
    virtual std::string version() const = 0;
    virtual double evaluate(const std::vector<Image8>& generated,
                            const std::vector<Image8>& reference) const = 0;
};

struct ExtraMetricScore {
    std::string name;
    std::string version;
    double score = 0.0;
};

struct SpeedMetrics {
    double speed = 1.0;
    int frame_count = 0;
    std::vector<int> clip_indices;
    PsnrResult masked_psnr;
    double masked_ssim = 0.0;
    PsnrResult fpsnr;
    double new_content_ratio = 0.0;
    std::vector<ExtraMetricScore> extra;
};

struct MetricsReport {
    std::vector<SpeedMetrics> per_speed;
    std::string mask_source;
};

void save_metrics_report(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace camcond
