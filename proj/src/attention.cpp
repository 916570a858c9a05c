// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/attention.hpp"

#include <cmath>

#include "camcond/error.hpp"
#include "camcond/rng.hpp"

namespace camcond {

Eigen::VectorXd time_embedding(int frame_index, int dim) {
    if (dim < 2 || dim % 2 != 0)
        throw ContractError("time_embedding: dim must be even and >= 2");
    Eigen::VectorXd e(dim);
    for (int k = 0; 2 * k < dim; ++k) {
        const double freq = std::pow(10000.0, static_cast<double>(2 * k) / dim);
        e[2 * k] = std::sin(frame_index / freq);
        e[2 * k + 1] = std::cos(frame_index / freq);
    }
    return e;
}

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, scale);
    return m;
}

// pixel features for a flattened (frame, pixel) reference, plus the
// frame's time embedding when present
Eigen::VectorXd source_feature(const FeatureVideo& pixels,
                               const std::vector<Eigen::VectorXd>& time_embed, int frame,
                               int pixel) {
    const int y = pixel / pixels.width;
    const int x = pixel % pixels.width;
    Eigen::VectorXd f = pixels.pixel(frame, y, x);
    if (!time_embed.empty()) f += time_embed[static_cast<std::size_t>(frame)];
    return f;
}

void check_attention_shapes(int feature_dim, const RayAttentionParams& params) {
    if (params.wq.rows() != feature_dim || params.wq.cols() != feature_dim ||
        params.wk.rows() != feature_dim || params.wk.cols() != feature_dim ||
        params.wv.rows() != feature_dim || params.wv.cols() != feature_dim)
        throw ContractError("attention: parameter matrices must be F x F");
}

}  // namespace

RayAttentionParams init_ray_attention(int dim, std::uint64_t seed) {
    Rng rng(seed);
    RayAttentionParams p;
    p.wq = random_matrix(dim, dim, rng);
    p.wk = random_matrix(dim, dim, rng);
    p.wv = random_matrix(dim, dim, rng);
    return p;
}

Eigen::MatrixXd voxel_query_seeds(int voxel_count, int dim, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd seeds(voxel_count, dim);
    for (int v = 0; v < voxel_count; ++v)
        for (int c = 0; c < dim; ++c) seeds(v, c) = rng.normal();
    return seeds;
}

VoxelFeatures attend_2d_to_3d(const FeatureVideo& pixels,
                              const std::vector<Eigen::VectorXd>& time_embed,
                              const SparseIncidence& incidence, const RayAttentionParams& params,
                              const Eigen::MatrixXd& voxel_queries) {
    const int dim = pixels.channels;
    check_attention_shapes(dim, params);
    if (pixels.frames != incidence.frames || pixels.width != incidence.width ||
        pixels.height != incidence.height)
        throw ContractError("attend_2d_to_3d: pixel features do not match incidence dimensions");
    if (!time_embed.empty()) {
        if (static_cast<int>(time_embed.size()) != pixels.frames)
            throw ContractError("attend_2d_to_3d: need one time embedding per frame");
        for (const auto& e : time_embed)
            if (e.size() != dim)
                throw ContractError("attend_2d_to_3d: time embedding dim must match features");
    }
    const int n_voxels = incidence.resolution.x() * incidence.resolution.y() *
                         incidence.resolution.z();
    if (voxel_queries.rows() != n_voxels || voxel_queries.cols() != dim)
        throw ContractError("attend_2d_to_3d: voxel query matrix must be V x F");

    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dim));
    VoxelFeatures out(incidence.resolution, dim);

    for (int v = 0; v < n_voxels; ++v) {
        const auto& list = incidence.per_voxel[static_cast<std::size_t>(v)];
        if (list.empty()) continue;
        const Eigen::VectorXd q = params.wq * voxel_queries.row(v).transpose();

        Eigen::VectorXd logits(list.size());
        std::vector<Eigen::VectorXd> values(list.size());
        for (std::size_t j = 0; j < list.size(); ++j) {
            const Eigen::VectorXd f = source_feature(pixels, time_embed, list[j].frame,
                                                     list[j].pixel);
            logits[static_cast<Eigen::Index>(j)] = q.dot(params.wk * f) * inv_sqrt;
            values[j] = params.wv * f;
        }
        const double max_logit = logits.maxCoeff();
        Eigen::VectorXd weights = (logits.array() - max_logit).exp();
        weights /= weights.sum();

        Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
        for (std::size_t j = 0; j < list.size(); ++j)
            acc += weights[static_cast<Eigen::Index>(j)] * values[j];
        out.voxel(v) = acc;
    }
    return out;
}

FeatureVideo attend_3d_to_2d(const VoxelFeatures& voxels, const FeatureVideo& pixel_queries,
                             const SparseIncidence& incidence, const RayAttentionParams& params) {
    const int dim = voxels.channels;
    check_attention_shapes(dim, params);
    if (pixel_queries.channels != dim)
        throw ContractError("attend_3d_to_2d: query features must match voxel feature dim");
    if (pixel_queries.frames != incidence.frames || pixel_queries.width != incidence.width ||
        pixel_queries.height != incidence.height)
        throw ContractError("attend_3d_to_2d: pixel queries do not match incidence dimensions");
    if (voxels.resolution != incidence.resolution)
        throw ContractError("attend_3d_to_2d: voxel features do not match incidence grid");

    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dim));
    FeatureVideo out(pixel_queries.frames, pixel_queries.height, pixel_queries.width, dim);
    out.frame_indices = pixel_queries.frame_indices;

    for (int f = 0; f < out.frames; ++f) {
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                const auto& list = incidence.per_ray[incidence.ray_index(f, x, y)];
                if (list.empty()) continue;
                const Eigen::VectorXd q = params.wq * pixel_queries.pixel(f, y, x).eval();

                Eigen::VectorXd logits(list.size());
                for (std::size_t j = 0; j < list.size(); ++j)
                    logits[static_cast<Eigen::Index>(j)] =
                        q.dot(params.wk * voxels.voxel(list[j].voxel).eval()) * inv_sqrt;
                const double max_logit = logits.maxCoeff();
                Eigen::VectorXd weights = (logits.array() - max_logit).exp();
                weights /= weights.sum();

                Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
                for (std::size_t j = 0; j < list.size(); ++j)
                    acc += weights[static_cast<Eigen::Index>(j)] *
                           (params.wv * voxels.voxel(list[j].voxel).eval());
                out.pixel(f, y, x) = acc;
            }
        }
    }
    return out;
}

void attend_2d_to_3d_backward(const FeatureVideo& pixels,
                              const std::vector<Eigen::VectorXd>& time_embed,
                              const SparseIncidence& incidence, const RayAttentionParams& params,
                              const Eigen::MatrixXd& voxel_queries,
                              const VoxelFeatures& grad_output, FeatureVideo& grad_pixels,
                              RayAttentionGrads& param_grads,
                              Eigen::MatrixXd& grad_voxel_queries) {
    const int dim = pixels.channels;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dim));
    const int n_voxels = incidence.resolution.x() * incidence.resolution.y() *
                         incidence.resolution.z();

    for (int v = 0; v < n_voxels; ++v) {
        const auto& list = incidence.per_voxel[static_cast<std::size_t>(v)];
        if (list.empty()) continue;
        const Eigen::VectorXd g = grad_output.voxel(v);
        if (g.isZero(0.0)) continue;

        const Eigen::VectorXd seed = voxel_queries.row(v).transpose();
        const Eigen::VectorXd q = params.wq * seed;

        const std::size_t n = list.size();
        Eigen::VectorXd logits(n);
        std::vector<Eigen::VectorXd> feats(n), keys(n), values(n);
        for (std::size_t j = 0; j < n; ++j) {
            feats[j] = source_feature(pixels, time_embed, list[j].frame, list[j].pixel);
            keys[j] = params.wk * feats[j];
            values[j] = params.wv * feats[j];
            logits[static_cast<Eigen::Index>(j)] = q.dot(keys[j]) * inv_sqrt;
        }
        const double max_logit = logits.maxCoeff();
        Eigen::VectorXd weights = (logits.array() - max_logit).exp();
        weights /= weights.sum();

        // out = sum_j a_j v_j
        Eigen::VectorXd da(n);
        for (std::size_t j = 0; j < n; ++j) da[static_cast<Eigen::Index>(j)] = g.dot(values[j]);
        const double mix = weights.dot(da);
        const Eigen::VectorXd dz = weights.cwiseProduct(da - Eigen::VectorXd::Constant(
                                                                 static_cast<Eigen::Index>(n), mix));

        Eigen::VectorXd dq = Eigen::VectorXd::Zero(dim);
        for (std::size_t j = 0; j < n; ++j) {
            const double dzj = dz[static_cast<Eigen::Index>(j)];
            const double aj = weights[static_cast<Eigen::Index>(j)];
            dq += dzj * inv_sqrt * keys[j];
            const Eigen::VectorXd dk = dzj * inv_sqrt * q;
            const Eigen::VectorXd dv = aj * g;
            param_grads.wk += dk * feats[j].transpose();
            param_grads.wv += dv * feats[j].transpose();
            const Eigen::VectorXd df = params.wk.transpose() * dk + params.wv.transpose() * dv;
            const int y = list[j].pixel / pixels.width;
            const int x = list[j].pixel % pixels.width;
            grad_pixels.pixel(list[j].frame, y, x) += df;
        }
        param_grads.wq += dq * seed.transpose();
        grad_voxel_queries.row(v) += (params.wq.transpose() * dq).transpose();
    }
}

void attend_3d_to_2d_backward(const VoxelFeatures& voxels, const FeatureVideo& pixel_queries,
                              const SparseIncidence& incidence, const RayAttentionParams& params,
                              const FeatureVideo& grad_output, VoxelFeatures& grad_voxels,
                              FeatureVideo& grad_pixel_queries, RayAttentionGrads& param_grads) {
    const int dim = voxels.channels;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dim));

    for (int f = 0; f < pixel_queries.frames; ++f) {
        for (int y = 0; y < pixel_queries.height; ++y) {
            for (int x = 0; x < pixel_queries.width; ++x) {
                const auto& list = incidence.per_ray[incidence.ray_index(f, x, y)];
                if (list.empty()) continue;
                const Eigen::VectorXd g = grad_output.pixel(f, y, x);
                if (g.isZero(0.0)) continue;

                const Eigen::VectorXd src = pixel_queries.pixel(f, y, x);
                const Eigen::VectorXd q = params.wq * src;

                const std::size_t n = list.size();
                Eigen::VectorXd logits(n);
                std::vector<Eigen::VectorXd> feats(n), keys(n), values(n);
                for (std::size_t j = 0; j < n; ++j) {
                    feats[j] = voxels.voxel(list[j].voxel);
                    keys[j] = params.wk * feats[j];
                    values[j] = params.wv * feats[j];
                    logits[static_cast<Eigen::Index>(j)] = q.dot(keys[j]) * inv_sqrt;
                }
                const double max_logit = logits.maxCoeff();
                Eigen::VectorXd weights = (logits.array() - max_logit).exp();
                weights /= weights.sum();

                Eigen::VectorXd da(n);
                for (std::size_t j = 0; j < n; ++j)
                    da[static_cast<Eigen::Index>(j)] = g.dot(values[j]);
                const double mix = weights.dot(da);
                const Eigen::VectorXd dz = weights.cwiseProduct(
                    da - Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), mix));

                Eigen::VectorXd dq = Eigen::VectorXd::Zero(dim);
                for (std::size_t j = 0; j < n; ++j) {
                    const double dzj = dz[static_cast<Eigen::Index>(j)];
                    const double aj = weights[static_cast<Eigen::Index>(j)];
                    dq += dzj * inv_sqrt * keys[j];
                    const Eigen::VectorXd dk = dzj * inv_sqrt * q;
                    const Eigen::VectorXd dv = aj * g;
                    param_grads.wk += dk * feats[j].transpose();
                    param_grads.wv += dv * feats[j].transpose();
                    grad_voxels.voxel(list[j].voxel) +=
                        params.wk.transpose() * dk + params.wv.transpose() * dv;
                }
                param_grads.wq += dq * src.transpose();
                grad_pixel_queries.pixel(f, y, x) += params.wq.transpose() * dq;
            }
        }
    }
}

}  // namespace camcond
