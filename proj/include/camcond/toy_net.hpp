// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "camcond/attention.hpp"
#include "camcond/camera.hpp"
#include "camcond/conv3d.hpp"
#include "camcond/features.hpp"

namespace camcond {

/// 2D convolution applied per frame, zero padded, weight layout
/// (oc, ky, kx, ic). stride 2 halves the spatial dims.
struct Conv2d {
    int in_ch = 0;
    int out_ch = 0;
    int ksize = 3;
    int stride = 1;
    std::vector<double> weight;
    std::vector<double> bias;

    static Conv2d init(int in_ch, int out_ch, int ksize, int stride, Rng& rng);
    static Conv2d zeros(int in_ch, int out_ch, int ksize, int stride);
};

FeatureVideo conv2d_forward(const FeatureVideo& in, const Conv2d& conv);
void conv2d_backward(const FeatureVideo& in, const Conv2d& conv, const FeatureVideo& grad_out,
                     FeatureVideo& grad_in, Conv2d& grads);

/// Box-filter downsampling, the stand-in for latent-space encoding of
/// full-resolution condition videos.
FeatureVideo average_pool(const FeatureVideo& in, int factor);

struct Linear {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
    static Linear init(int in_dim, int out_dim, Rng& rng);
    static Linear zeros(int in_dim, int out_dim);
};

/// Residual block x + c2(silu(c1(x))).
struct ResBlock2d {
    Conv2d c1, c2;
};

/// Self-attention across frames, applied independently at each pixel.
struct TemporalAttention {
    Eigen::MatrixXd wq, wk, wv;  // ch x ch
};

/// Cross-attention from pixel features to a small fixed context matrix
/// (rows = tokens), the stand-in for CLIP image features.
struct CrossAttention {
    Eigen::MatrixXd wq;  // ch x ch
    Eigen::MatrixXd wk;  // ch x ctx_dim
    Eigen::MatrixXd wv;  // ch x ctx_dim
};

/// The raw-extrinsics residual: per pixel, concat the 12 entries of [R|t]
/// to the features, run a 2-layer feed-forward net, add the result back.
struct ExtrinsicsFfn {
    Linear l1;  // (ch + 12) -> 2 ch
    Linear l2;  // 2 ch -> ch
};

FeatureVideo extrinsics_residual_block(const FeatureVideo& features,
                                       const CameraTrajectory& trajectory,
                                       const ExtrinsicsFfn& ffn);

/// out = conv_base(base_latent) + sum_k conv_k(condition_k).
FeatureVideo condition_input_injection(const FeatureVideo& base_latent,
                                       const std::vector<FeatureVideo>& conditions,
                                       const Conv2d& base_conv,
                                       const std::vector<Conv2d>& condition_convs);

struct TemporalBlockParams {
    TemporalAttention self_attn;
    CrossAttention cross_attn;
    std::optional<ExtrinsicsFfn> extrinsics;  // control branch only, when X is on
};

/// 2D <-> 3D transformer block operating beside a temporal block.
struct RayTranBlockParams {
    RayAttentionParams to_3d;
    RayAttentionParams to_2d;
    Eigen::MatrixXd voxel_seeds;  // V x ch
    Conv3dEncoderDecoder body;
};

struct EncoderParams {
    Conv2d conv_in;
    ResBlock2d res1;
    TemporalBlockParams temp1;
    Conv2d down;
    ResBlock2d res2;
    TemporalBlockParams temp2;
    std::optional<RayTranBlockParams> raytran1;  // control branch, R >= 1
    std::optional<RayTranBlockParams> raytran2;  // control branch, R >= 2
    std::vector<Conv2d> condition_convs;         // control branch
};

struct DecoderParams {
    ResBlock2d res2;
    Conv2d up;  // after nearest 2x upsampling, ch1 -> ch0
    ResBlock2d res1;
    Conv2d conv_out;
};

/// 1x1 convolutions initialized to zero, gating the control branch.
struct ZeroConvs {
    Conv2d z1;  // ch0
    Conv2d z2;  // ch1
};

/// Encoder-stage outputs ordered outermost first; each later stage is
/// strictly coarser spatially.
struct ResidualStack {
    std::vector<FeatureVideo> stages;
    void check() const;  // throws ContractError on shape violations
};

struct ToyNetConfig {
    int latent_channels = 4;
    int ch0 = 8;
    int ch1 = 16;
    int context_tokens = 2;
    int context_dim = 8;
    bool cond_extrinsics = false;  // X
    bool cond_rays = false;        // C, 6-channel condition at latent res
    bool cond_reproj = false;      // P, 3-channel condition at latent res
    int raytran_stages = 0;        // R_x, 0..2
    Eigen::Vector3i grid_resolution{4, 4, 4};
    double grid_extent = 8.0;
    std::uint64_t seed = 0;
};

struct ParamView {
    std::string name;
    double* data = nullptr;
    std::size_t size = 0;
};

/// Two-stage toy UNet with a cloned, condition-carrying control encoder
/// merged through zero convolutions. The latent video runs at 1/4 of the
/// trajectory's image resolution.
class ToyConditioningNet {
public:
    ToyConditioningNet(const ToyNetConfig& config, const CameraTrajectory& trajectory);

    const ToyNetConfig& config() const { return config_; }
    int latent_width() const { return latent_width_; }
    int latent_height() const { return latent_height_; }

    /// Expected channel counts for the condition list, in order (C then P).
    std::vector<int> condition_channels() const;

    /// Plain encoder-decoder, no conditioning.
    FeatureVideo base_forward(const FeatureVideo& latent) const;

    /// Control encoder over the same latent plus conditions; returns the
    /// zero-convolved per-stage residuals.
    ResidualStack control_branch_forward(const FeatureVideo& latent,
                                         const std::vector<FeatureVideo>& conditions) const;

    /// Base encoder-decoder with per-stage control residuals added to the
    /// encoder's outgoing connections. The decoder is untouched.
    FeatureVideo merged_forward(const FeatureVideo& latent,
                                const ResidualStack& control_residuals) const;

    FeatureVideo forward(const FeatureVideo& latent,
                         const std::vector<FeatureVideo>& conditions) const;

    /// d(sum(forward(..) * probe)) / d(params), flattened in param_views
    /// order. Exercises every backward path of the network.
    std::vector<double> loss_gradient(const FeatureVideo& latent,
                                      const std::vector<FeatureVideo>& conditions,
                                      const FeatureVideo& probe) const;

    /// Mutable views over every learnable tensor, in a fixed order.
    std::vector<ParamView> param_views();

    struct Params {
        EncoderParams base;
        DecoderParams decoder;
        EncoderParams control;
        ZeroConvs zero;
        Eigen::MatrixXd context;  // tokens x ctx_dim, fixed (not learned)
    };
    Params& params() { return params_; }
    const Params& params() const { return params_; }

    struct Grads;         // gradient buffers, defined with the implementation
    struct EncoderTrace;  // forward activations kept for the backward pass

private:
    FeatureVideo encoder_forward(const EncoderParams& enc, const FeatureVideo& latent,
                                 const std::vector<FeatureVideo>* conditions,
                                 EncoderTrace* trace, FeatureVideo* stage1_out) const;

    ToyNetConfig config_;
    CameraTrajectory trajectory_;
    Params params_;
    SparseIncidence incidence1_;  // stage-1 latent resolution
    SparseIncidence incidence2_;  // stage-2 resolution
    int latent_width_ = 0;
    int latent_height_ = 0;
};

}  // namespace camcond
