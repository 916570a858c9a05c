// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/conv3d.hpp"

#include <cmath>

#include "camcond/error.hpp"
#include "camcond/rng.hpp"

namespace camcond {

namespace {

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

inline double silu_grad(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

inline std::size_t weight_index(const Conv3d& c, int oc, int dz, int dy, int dx, int ic) {
    return (((static_cast<std::size_t>(oc) * 3 + dz) * 3 + dy) * 3 + dx) *
               static_cast<std::size_t>(c.in_ch) +
           static_cast<std::size_t>(ic);
}

}  // namespace

Conv3d Conv3d::init(int in_ch, int out_ch, int dilation, Rng& rng) {
    Conv3d c;
    c.in_ch = in_ch;
    c.out_ch = out_ch;
    c.dilation = dilation;
    c.weight.resize(static_cast<std::size_t>(out_ch) * 27 * static_cast<std::size_t>(in_ch));
    c.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
    const double scale = 1.0 / std::sqrt(27.0 * in_ch);
    for (double& w : c.weight) w = rng.normal(0.0, scale);
    return c;
}

Conv3d Conv3d::zeros(int in_ch, int out_ch, int dilation) {
    Conv3d c;
    c.in_ch = in_ch;
    c.out_ch = out_ch;
    c.dilation = dilation;
    c.weight.assign(static_cast<std::size_t>(out_ch) * 27 * static_cast<std::size_t>(in_ch), 0.0);
    c.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
    return c;
}

VoxelFeatures conv3d_forward(const VoxelFeatures& in, const Conv3d& conv) {
    if (in.channels != conv.in_ch) throw ContractError("conv3d: channel mismatch");
    const int nx = in.resolution.x(), ny = in.resolution.y(), nz = in.resolution.z();
    VoxelFeatures out(in.resolution, conv.out_ch);

    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const int v = (z * ny + y) * nx + x;
                auto o = out.voxel(v);
                for (int oc = 0; oc < conv.out_ch; ++oc) o[oc] = conv.bias[static_cast<std::size_t>(oc)];
                for (int dz = 0; dz < 3; ++dz) {
                    const int sz = z + conv.dilation * (dz - 1);
                    if (sz < 0 || sz >= nz) continue;
                    for (int dy = 0; dy < 3; ++dy) {
                        const int sy = y + conv.dilation * (dy - 1);
                        if (sy < 0 || sy >= ny) continue;
                        for (int dx = 0; dx < 3; ++dx) {
                            const int sx = x + conv.dilation * (dx - 1);
                            if (sx < 0 || sx >= nx) continue;
                            const auto src = in.voxel((sz * ny + sy) * nx + sx);
                            for (int oc = 0; oc < conv.out_ch; ++oc) {
                                const double* w = conv.weight.data() +
                                                  weight_index(conv, oc, dz, dy, dx, 0);
                                double acc = 0.0;
                                for (int ic = 0; ic < conv.in_ch; ++ic) acc += w[ic] * src[ic];
                                o[oc] += acc;
                            }
                        }
                    }
                }
            }
    return out;
}

void conv3d_backward(const VoxelFeatures& in, const Conv3d& conv, const VoxelFeatures& grad_out,
                     VoxelFeatures& grad_in, Conv3d& grads) {
    const int nx = in.resolution.x(), ny = in.resolution.y(), nz = in.resolution.z();
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const int v = (z * ny + y) * nx + x;
                const auto g = grad_out.voxel(v);
                for (int oc = 0; oc < conv.out_ch; ++oc)
                    grads.bias[static_cast<std::size_t>(oc)] += g[oc];
                for (int dz = 0; dz < 3; ++dz) {
                    const int sz = z + conv.dilation * (dz - 1);
                    if (sz < 0 || sz >= nz) continue;
                    for (int dy = 0; dy < 3; ++dy) {
                        const int sy = y + conv.dilation * (dy - 1);
                        if (sy < 0 || sy >= ny) continue;
                        for (int dx = 0; dx < 3; ++dx) {
                            const int sx = x + conv.dilation * (dx - 1);
                            if (sx < 0 || sx >= nx) continue;
                            const int sv = (sz * ny + sy) * nx + sx;
                            const auto src = in.voxel(sv);
                            auto gi = grad_in.voxel(sv);
                            for (int oc = 0; oc < conv.out_ch; ++oc) {
                                const double go = g[oc];
                                if (go == 0.0) continue;
                                double* wg = grads.weight.data() +
                                             weight_index(conv, oc, dz, dy, dx, 0);
                                const double* w = conv.weight.data() +
                                                  weight_index(conv, oc, dz, dy, dx, 0);
                                for (int ic = 0; ic < conv.in_ch; ++ic) {
                                    wg[ic] += go * src[ic];
                                    gi[ic] += go * w[ic];
                                }
                            }
                        }
                    }
                }
            }
}

Conv3dEncoderDecoder Conv3dEncoderDecoder::init(int channels, int depth, std::uint64_t seed) {
    if (channels < 1 || depth < 1)
        throw ContractError("conv3d encoder-decoder: channels and depth must be >= 1");
    Rng rng(seed);
    Conv3dEncoderDecoder net;
    net.channels = channels;
    net.depth = depth;
    std::vector<int> dilations;
    for (int d = 0; d < depth; ++d) dilations.push_back(1 << d);
    for (int d = depth - 1; d >= 0; --d) dilations.push_back(1 << d);
    for (int dil : dilations) {
        Block b;
        b.c1 = Conv3d::init(channels, channels, dil, rng);
        b.c2 = Conv3d::init(channels, channels, dil, rng);
        net.blocks.push_back(std::move(b));
    }
    return net;
}

Conv3dEncoderDecoder Conv3dEncoderDecoder::zeros_like() const {
    Conv3dEncoderDecoder z;
    z.channels = channels;
    z.depth = depth;
    for (const Block& b : blocks) {
        Block zb;
        zb.c1 = Conv3d::zeros(b.c1.in_ch, b.c1.out_ch, b.c1.dilation);
        zb.c2 = Conv3d::zeros(b.c2.in_ch, b.c2.out_ch, b.c2.dilation);
        z.blocks.push_back(std::move(zb));
    }
    return z;
}

int Conv3dEncoderDecoder::receptive_field_radius() const {
    int radius = 0;
    for (const Block& b : blocks) radius += b.c1.dilation + b.c2.dilation;
    return radius;
}

namespace {

void check_divisibility(const Eigen::Vector3i& resolution, int depth) {
    const int unit = 1 << depth;
    if (resolution.x() % unit != 0 || resolution.y() % unit != 0 || resolution.z() % unit != 0)
        throw ContractError("conv3d encoder-decoder: grid resolution must be divisible by 2^depth");
}

}  // namespace

VoxelFeatures Conv3dEncoderDecoder::forward(const VoxelFeatures& in) const {
    if (in.channels != channels) throw ContractError("conv3d encoder-decoder: channel mismatch");
    check_divisibility(in.resolution, depth);
    VoxelFeatures x = in;
    for (const Block& b : blocks) {
        VoxelFeatures pre = conv3d_forward(x, b.c1);
        VoxelFeatures h = pre;
        for (double& v : h.data) v = silu(v);
        VoxelFeatures r = conv3d_forward(h, b.c2);
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += r.data[i];
    }
    return x;
}

void Conv3dEncoderDecoder::backward(const VoxelFeatures& in, const VoxelFeatures& grad_out,
                                    VoxelFeatures& grad_in, Conv3dEncoderDecoder& grads) const {
    check_divisibility(in.resolution, depth);

    // re-run the forward pass keeping each block's input and pre-activation
    std::vector<VoxelFeatures> inputs;
    std::vector<VoxelFeatures> pres;
    VoxelFeatures x = in;
    for (const Block& b : blocks) {
        inputs.push_back(x);
        VoxelFeatures pre = conv3d_forward(x, b.c1);
        pres.push_back(pre);
        VoxelFeatures h = pre;
        for (double& v : h.data) v = silu(v);
        VoxelFeatures r = conv3d_forward(h, b.c2);
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += r.data[i];
    }

    VoxelFeatures g = grad_out;
    for (int bi = static_cast<int>(blocks.size()) - 1; bi >= 0; --bi) {
        const Block& b = blocks[static_cast<std::size_t>(bi)];
        Block& bg = grads.blocks[static_cast<std::size_t>(bi)];
        const VoxelFeatures& pre = pres[static_cast<std::size_t>(bi)];

        VoxelFeatures h = pre;
        for (double& v : h.data) v = silu(v);

        VoxelFeatures grad_h(in.resolution, channels);
        conv3d_backward(h, b.c2, g, grad_h, bg.c2);
        for (std::size_t i = 0; i < grad_h.data.size(); ++i)
            grad_h.data[i] *= silu_grad(pre.data[i]);

        VoxelFeatures grad_x(in.resolution, channels);
        conv3d_backward(inputs[static_cast<std::size_t>(bi)], b.c1, grad_h, grad_x, bg.c1);
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += grad_x.data[i];
    }
    for (std::size_t i = 0; i < g.data.size(); ++i) grad_in.data[i] += g.data[i];
}

}  // namespace camcond
