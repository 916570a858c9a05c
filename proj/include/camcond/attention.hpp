// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <vector>

#include "camcond/features.hpp"
#include "camcond/incidence.hpp"

namespace camcond {

/// Sinusoidal positional encoding of a frame index: component 2k holds
/// sin(i / 10000^(2k/dim)), component 2k+1 the matching cosine. dim must
/// be even and >= 2.
Eigen::VectorXd time_embedding(int frame_index, int dim);

/// Single-head attention projections. Keys and values are computed from
/// the source features, queries from the destination side.
struct RayAttentionParams {
    Eigen::MatrixXd wq;  // F x F
    Eigen::MatrixXd wk;  // F x F
    Eigen::MatrixXd wv;  // F x F
};

struct RayAttentionGrads {
    Eigen::MatrixXd wq;
    Eigen::MatrixXd wk;
    Eigen::MatrixXd wv;
};

RayAttentionParams init_ray_attention(int dim, std::uint64_t seed);

/// Learned per-voxel query seeds (rows = voxels). The deterministic
/// initializer is fixed so toy runs are reproducible.
Eigen::MatrixXd voxel_query_seeds(int voxel_count, int dim, std::uint64_t seed = 0x5EED);

/// Projects pixel features into the voxel grid: each voxel attends over
/// exactly the pixels whose rays traverse it (softmax over the incidence
/// list, ascending-t order). time_embed, when non-empty, holds one vector
/// per frame added to pixel features before keys and values. Voxels with
/// no incident rays output zero.
VoxelFeatures attend_2d_to_3d(const FeatureVideo& pixels,
                              const std::vector<Eigen::VectorXd>& time_embed,
                              const SparseIncidence& incidence, const RayAttentionParams& params,
                              const Eigen::MatrixXd& voxel_queries);

/// Mirror direction: each pixel attends over the voxels its ray traverses
/// (traversal order); queries come from the pixel's current features.
/// Pixels whose rays miss the grid output zero.
FeatureVideo attend_3d_to_2d(const VoxelFeatures& voxels, const FeatureVideo& pixel_queries,
                             const SparseIncidence& incidence, const RayAttentionParams& params);

/// Backward passes. Gradients are accumulated into the *_grads outputs
/// (callers zero them); input-feature gradients are likewise accumulated.
void attend_2d_to_3d_backward(const FeatureVideo& pixels,
                              const std::vector<Eigen::VectorXd>& time_embed,
                              const SparseIncidence& incidence, const RayAttentionParams& params,
                              const Eigen::MatrixXd& voxel_queries,
                              const VoxelFeatures& grad_output, FeatureVideo& grad_pixels,
                              RayAttentionGrads& param_grads, Eigen::MatrixXd& grad_voxel_queries);

void attend_3d_to_2d_backward(const VoxelFeatures& voxels, const FeatureVideo& pixel_queries,
                              const SparseIncidence& incidence, const RayAttentionParams& params,
                              const FeatureVideo& grad_output, VoxelFeatures& grad_voxels,
                              FeatureVideo& grad_pixel_queries, RayAttentionGrads& param_grads);

}  // namespace camcond
