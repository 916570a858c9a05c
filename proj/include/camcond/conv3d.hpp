// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "camcond/features.hpp"

namespace camcond {

/// 3x3x3 convolution over voxel features, zero padded, optionally dilated.
/// Weight layout (oc, dz, dy, dx, ic).
struct Conv3d {
    int in_ch = 0;
    int out_ch = 0;
    int dilation = 1;
    std::vector<double> weight;
    std::vector<double> bias;

    static Conv3d init(int in_ch, int out_ch, int dilation, class Rng& rng);
    static Conv3d zeros(int in_ch, int out_ch, int dilation);
};

VoxelFeatures conv3d_forward(const VoxelFeatures& in, const Conv3d& conv);
void conv3d_backward(const VoxelFeatures& in, const Conv3d& conv, const VoxelFeatures& grad_out,
                     VoxelFeatures& grad_in, Conv3d& grads);

/// Residual 3D encoder-decoder: a symmetric stack of residual blocks
/// x += c2(silu(c1(x))) whose dilations grow 1, 2, ..., 2^(depth-1) and
/// shrink back, widening the receptive field while keeping the map
/// translation-equivariant on the interior. With all weights and biases
/// zero the map is the identity.
struct Conv3dEncoderDecoder {
    int channels = 0;
    int depth = 2;
    struct Block {
        Conv3d c1, c2;
    };
    std::vector<Block> blocks;

    static Conv3dEncoderDecoder init(int channels, int depth, std::uint64_t seed);

    /// Zero-valued parameter holder with identical shapes, for gradients.
    Conv3dEncoderDecoder zeros_like() const;

    /// Voxels reachable from a single input voxel (L-inf radius).
    int receptive_field_radius() const;

    /// Requires every resolution component divisible by 2^depth.
    VoxelFeatures forward(const VoxelFeatures& in) const;
    void backward(const VoxelFeatures& in, const VoxelFeatures& grad_out, VoxelFeatures& grad_in,
                  Conv3dEncoderDecoder& grads) const;
};

}  // namespace camcond
