// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/toy_net.hpp"

#include <cmath>

#include "camcond/error.hpp"
#include "camcond/rng.hpp"

namespace camcond {

std::vector<ParamView> collect_param_views(ToyConditioningNet::Params& p);

namespace {

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

inline double silu_grad(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

inline std::size_t conv2d_weight_index(const Conv2d& c, int oc, int ky, int kx, int ic) {
    return ((static_cast<std::size_t>(oc) * c.ksize + ky) * c.ksize + kx) *
               static_cast<std::size_t>(c.in_ch) +
           static_cast<std::size_t>(ic);
}

FeatureVideo add(const FeatureVideo& a, const FeatureVideo& b) {
    FeatureVideo out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

void accumulate(FeatureVideo& into, const FeatureVideo& from) {
    for (std::size_t i = 0; i < into.data.size(); ++i) into.data[i] += from.data[i];
}

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, scale);
    return m;
}

}  // namespace

Conv2d Conv2d::init(int in_ch, int out_ch, int ksize, int stride, Rng& rng) {
    Conv2d c;
    c.in_ch = in_ch;
    c.out_ch = out_ch;
    c.ksize = ksize;
    c.stride = stride;
    c.weight.resize(static_cast<std::size_t>(out_ch) * ksize * ksize *
                    static_cast<std::size_t>(in_ch));
    c.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(ksize * ksize * in_ch));
    for (double& w : c.weight) w = rng.normal(0.0, scale);
    return c;
}

Conv2d Conv2d::zeros(int in_ch, int out_ch, int ksize, int stride) {
    Conv2d c;
    c.in_ch = in_ch;
    c.out_ch = out_ch;
    c.ksize = ksize;
    c.stride = stride;
    c.weight.assign(
        static_cast<std::size_t>(out_ch) * ksize * ksize * static_cast<std::size_t>(in_ch), 0.0);
    c.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
    return c;
}

FeatureVideo conv2d_forward(const FeatureVideo& in, const Conv2d& conv) {
    if (in.channels != conv.in_ch) throw ContractError("conv2d: channel mismatch");
    if (in.width % conv.stride != 0 || in.height % conv.stride != 0)
        throw ContractError("conv2d: stride must divide spatial dims");
    const int ow = in.width / conv.stride;
    const int oh = in.height / conv.stride;
    const int pad = conv.ksize / 2;

    FeatureVideo out(in.frames, oh, ow, conv.out_ch);
    out.frame_indices = in.frame_indices;
    for (int f = 0; f < in.frames; ++f)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                auto o = out.pixel(f, y, x);
                for (int oc = 0; oc < conv.out_ch; ++oc)
                    o[oc] = conv.bias[static_cast<std::size_t>(oc)];
                for (int ky = 0; ky < conv.ksize; ++ky) {
                    const int sy = y * conv.stride + ky - pad;
                    if (sy < 0 || sy >= in.height) continue;
                    for (int kx = 0; kx < conv.ksize; ++kx) {
                        const int sx = x * conv.stride + kx - pad;
                        if (sx < 0 || sx >= in.width) continue;
                        const auto src = in.pixel(f, sy, sx);
                        for (int oc = 0; oc < conv.out_ch; ++oc) {
                            const double* w =
                                conv.weight.data() + conv2d_weight_index(conv, oc, ky, kx, 0);
                            double acc = 0.0;
                            for (int ic = 0; ic < conv.in_ch; ++ic) acc += w[ic] * src[ic];
                            o[oc] += acc;
                        }
                    }
                }
            }
    return out;
}

void conv2d_backward(const FeatureVideo& in, const Conv2d& conv, const FeatureVideo& grad_out,
                     FeatureVideo& grad_in, Conv2d& grads) {
    const int pad = conv.ksize / 2;
    for (int f = 0; f < in.frames; ++f)
        for (int y = 0; y < grad_out.height; ++y)
            for (int x = 0; x < grad_out.width; ++x) {
                const auto g = grad_out.pixel(f, y, x);
                for (int oc = 0; oc < conv.out_ch; ++oc)
                    grads.bias[static_cast<std::size_t>(oc)] += g[oc];
                for (int ky = 0; ky < conv.ksize; ++ky) {
                    const int sy = y * conv.stride + ky - pad;
                    if (sy < 0 || sy >= in.height) continue;
                    for (int kx = 0; kx < conv.ksize; ++kx) {
                        const int sx = x * conv.stride + kx - pad;
                        if (sx < 0 || sx >= in.width) continue;
                        const auto src = in.pixel(f, sy, sx);
                        auto gi = grad_in.pixel(f, sy, sx);
                        for (int oc = 0; oc < conv.out_ch; ++oc) {
                            const double go = g[oc];
                            if (go == 0.0) continue;
                            double* wg =
                                grads.weight.data() + conv2d_weight_index(conv, oc, ky, kx, 0);
                            const double* w =
                                conv.weight.data() + conv2d_weight_index(conv, oc, ky, kx, 0);
                            for (int ic = 0; ic < conv.in_ch; ++ic) {
                                wg[ic] += go * src[ic];
                                gi[ic] += go * w[ic];
                            }
                        }
                    }
                }
            }
}

FeatureVideo average_pool(const FeatureVideo& in, int factor) {
    if (factor < 1 || in.width % factor != 0 || in.height % factor != 0)
        throw ContractError("average_pool: factor must divide spatial dims");
    FeatureVideo out(in.frames, in.height / factor, in.width / factor, in.channels);
    out.frame_indices = in.frame_indices;
    const double inv = 1.0 / (static_cast<double>(factor) * factor);
    for (int f = 0; f < in.frames; ++f)
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
                auto o = out.pixel(f, y, x);
                for (int sy = 0; sy < factor; ++sy)
                    for (int sx = 0; sx < factor; ++sx)
                        o += in.pixel(f, y * factor + sy, x * factor + sx);
                o *= inv;
            }
    return out;
}

Linear Linear::init(int in_dim, int out_dim, Rng& rng) {
    Linear l;
    l.w = random_matrix(out_dim, in_dim, rng);
    l.b = Eigen::VectorXd::Zero(out_dim);
    return l;
}

Linear Linear::zeros(int in_dim, int out_dim) {
    Linear l;
    l.w = Eigen::MatrixXd::Zero(out_dim, in_dim);
    l.b = Eigen::VectorXd::Zero(out_dim);
    return l;
}

namespace {

// ---- residual block ------------------------------------------------------

FeatureVideo resblock_forward(const FeatureVideo& in, const ResBlock2d& rb, FeatureVideo* pre) {
    FeatureVideo p = conv2d_forward(in, rb.c1);
    if (pre) *pre = p;
    for (double& v : p.data) v = silu(v);
    FeatureVideo r = conv2d_forward(p, rb.c2);
    return add(in, r);
}

void resblock_backward(const FeatureVideo& in, const FeatureVideo& pre, const ResBlock2d& rb,
                       const FeatureVideo& grad_out, FeatureVideo& grad_in, ResBlock2d& grads) {
    FeatureVideo h = pre;
    for (double& v : h.data) v = silu(v);
    FeatureVideo grad_h(h.frames, h.height, h.width, h.channels);
    conv2d_backward(h, rb.c2, grad_out, grad_h, grads.c2);
    for (std::size_t i = 0; i < grad_h.data.size(); ++i)
        grad_h.data[i] *= silu_grad(pre.data[i]);
    conv2d_backward(in, rb.c1, grad_h, grad_in, grads.c1);
    accumulate(grad_in, grad_out);  // identity branch
}

// ---- nearest upsampling ----------------------------------------------------

FeatureVideo upsample2_forward(const FeatureVideo& in) {
    FeatureVideo out(in.frames, in.height * 2, in.width * 2, in.channels);
    out.frame_indices = in.frame_indices;
    for (int f = 0; f < in.frames; ++f)
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) out.pixel(f, y, x) = in.pixel(f, y / 2, x / 2);
    return out;
}

void upsample2_backward(const FeatureVideo& grad_out, FeatureVideo& grad_in) {
    for (int f = 0; f < grad_in.frames; ++f)
        for (int y = 0; y < grad_out.height; ++y)
            for (int x = 0; x < grad_out.width; ++x)
                grad_in.pixel(f, y / 2, x / 2) += grad_out.pixel(f, y, x);
}

// ---- temporal self-attention ----------------------------------------------

FeatureVideo temporal_attention_forward(const FeatureVideo& x, const TemporalAttention& p) {
    const int ch = x.channels;
    const int frames = x.frames;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(ch));
    FeatureVideo out(frames, x.height, x.width, ch);
    out.frame_indices = x.frame_indices;

    std::vector<Eigen::VectorXd> q(static_cast<std::size_t>(frames)),
        k(static_cast<std::size_t>(frames)), v(static_cast<std::size_t>(frames));
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px) {
            for (int f = 0; f < frames; ++f) {
                const Eigen::VectorXd feat = x.pixel(f, y, px);
                q[static_cast<std::size_t>(f)] = p.wq * feat;
                k[static_cast<std::size_t>(f)] = p.wk * feat;
                v[static_cast<std::size_t>(f)] = p.wv * feat;
            }
            for (int f = 0; f < frames; ++f) {
                Eigen::VectorXd logits(frames);
                for (int g = 0; g < frames; ++g)
                    logits[g] = q[static_cast<std::size_t>(f)].dot(
                                    k[static_cast<std::size_t>(g)]) *
                                inv_sqrt;
                Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp();
                w /= w.sum();
                Eigen::VectorXd acc = Eigen::VectorXd::Zero(ch);
                for (int g = 0; g < frames; ++g)
                    acc += w[g] * v[static_cast<std::size_t>(g)];
                out.pixel(f, y, px) = acc;
            }
        }
    return out;
}

void temporal_attention_backward(const FeatureVideo& x, const TemporalAttention& p,
                                 const FeatureVideo& grad_out, FeatureVideo& grad_x,
                                 TemporalAttention& grads) {
    const int ch = x.channels;
    const int frames = x.frames;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(ch));

    std::vector<Eigen::VectorXd> q(static_cast<std::size_t>(frames)),
        k(static_cast<std::size_t>(frames)), v(static_cast<std::size_t>(frames)),
        dq(static_cast<std::size_t>(frames)), dk(static_cast<std::size_t>(frames)),
        dv(static_cast<std::size_t>(frames));
    for (int y = 0; y < x.height; ++y)
        for (int px = 0; px < x.width; ++px) {
            for (int f = 0; f < frames; ++f) {
                const Eigen::VectorXd feat = x.pixel(f, y, px);
                q[static_cast<std::size_t>(f)] = p.wq * feat;
                k[static_cast<std::size_t>(f)] = p.wk * feat;
                v[static_cast<std::size_t>(f)] = p.wv * feat;
                dq[static_cast<std::size_t>(f)] = Eigen::VectorXd::Zero(ch);
                dk[static_cast<std::size_t>(f)] = Eigen::VectorXd::Zero(ch);
                dv[static_cast<std::size_t>(f)] = Eigen::VectorXd::Zero(ch);
            }
            for (int f = 0; f < frames; ++f) {
                const Eigen::VectorXd g = grad_out.pixel(f, y, px);
                Eigen::VectorXd logits(frames);
                for (int gg = 0; gg < frames; ++gg)
                    logits[gg] = q[static_cast<std::size_t>(f)].dot(
                                     k[static_cast<std::size_t>(gg)]) *
                                 inv_sqrt;
                Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp();
                w /= w.sum();

                Eigen::VectorXd da(frames);
                for (int gg = 0; gg < frames; ++gg)
                    da[gg] = g.dot(v[static_cast<std::size_t>(gg)]);
                const double mix = w.dot(da);
                const Eigen::VectorXd dz =
                    w.cwiseProduct(da - Eigen::VectorXd::Constant(frames, mix));

                for (int gg = 0; gg < frames; ++gg) {
                    dv[static_cast<std::size_t>(gg)] += w[gg] * g;
                    dk[static_cast<std::size_t>(gg)] +=
                        dz[gg] * inv_sqrt * q[static_cast<std::size_t>(f)];
                    dq[static_cast<std::size_t>(f)] +=
                        dz[gg] * inv_sqrt * k[static_cast<std::size_t>(gg)];
                }
            }
            for (int f = 0; f < frames; ++f) {
                const Eigen::VectorXd feat = x.pixel(f, y, px);
                grads.wq += dq[static_cast<std::size_t>(f)] * feat.transpose();
                grads.wk += dk[static_cast<std::size_t>(f)] * feat.transpose();
                grads.wv += dv[static_cast<std::size_t>(f)] * feat.transpose();
                grad_x.pixel(f, y, px) += p.wq.transpose() * dq[static_cast<std::size_t>(f)] +
                                          p.wk.transpose() * dk[static_cast<std::size_t>(f)] +
                                          p.wv.transpose() * dv[static_cast<std::size_t>(f)];
            }
        }
}

// ---- cross-attention to the fixed context ----------------------------------

FeatureVideo cross_attention_forward(const FeatureVideo& x, const CrossAttention& p,
                                     const Eigen::MatrixXd& context) {
    const int ch = x.channels;
    const int tokens = static_cast<int>(context.rows());
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(ch));

    std::vector<Eigen::VectorXd> k(static_cast<std::size_t>(tokens)),
        v(static_cast<std::size_t>(tokens));
    for (int t = 0; t < tokens; ++t) {
        k[static_cast<std::size_t>(t)] = p.wk * context.row(t).transpose();
        v[static_cast<std::size_t>(t)] = p.wv * context.row(t).transpose();
    }

    FeatureVideo out(x.frames, x.height, x.width, ch);
    out.frame_indices = x.frame_indices;
    for (int f = 0; f < x.frames; ++f)
        for (int y = 0; y < x.height; ++y)
            for (int px = 0; px < x.width; ++px) {
                const Eigen::VectorXd q = p.wq * x.pixel(f, y, px).eval();
                Eigen::VectorXd logits(tokens);
                for (int t = 0; t < tokens; ++t)
                    logits[t] = q.dot(k[static_cast<std::size_t>(t)]) * inv_sqrt;
                Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp();
                w /= w.sum();
                Eigen::VectorXd acc = Eigen::VectorXd::Zero(ch);
                for (int t = 0; t < tokens; ++t) acc += w[t] * v[static_cast<std::size_t>(t)];
                out.pixel(f, y, px) = acc;
            }
    return out;
}

void cross_attention_backward(const FeatureVideo& x, const CrossAttention& p,
                              const Eigen::MatrixXd& context, const FeatureVideo& grad_out,
                              FeatureVideo& grad_x, CrossAttention& grads) {
    const int ch = x.channels;
    const int tokens = static_cast<int>(context.rows());
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(ch));

    std::vector<Eigen::VectorXd> k(static_cast<std::size_t>(tokens)),
        v(static_cast<std::size_t>(tokens)), dk(static_cast<std::size_t>(tokens)),
        dv(static_cast<std::size_t>(tokens));
    for (int t = 0; t < tokens; ++t) {
        k[static_cast<std::size_t>(t)] = p.wk * context.row(t).transpose();
        v[static_cast<std::size_t>(t)] = p.wv * context.row(t).transpose();
        dk[static_cast<std::size_t>(t)] = Eigen::VectorXd::Zero(ch);
        dv[static_cast<std::size_t>(t)] = Eigen::VectorXd::Zero(ch);
    }

    for (int f = 0; f < x.frames; ++f)
        for (int y = 0; y < x.height; ++y)
            for (int px = 0; px < x.width; ++px) {
                const Eigen::VectorXd g = grad_out.pixel(f, y, px);
                const Eigen::VectorXd src = x.pixel(f, y, px);
                const Eigen::VectorXd q = p.wq * src;
                Eigen::VectorXd logits(tokens);
                for (int t = 0; t < tokens; ++t)
                    logits[t] = q.dot(k[static_cast<std::size_t>(t)]) * inv_sqrt;
                Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp();
                w /= w.sum();

                Eigen::VectorXd da(tokens);
                for (int t = 0; t < tokens; ++t) da[t] = g.dot(v[static_cast<std::size_t>(t)]);
                const double mix = w.dot(da);
                const Eigen::VectorXd dz =
                    w.cwiseProduct(da - Eigen::VectorXd::Constant(tokens, mix));

                Eigen::VectorXd dq = Eigen::VectorXd::Zero(ch);
                for (int t = 0; t < tokens; ++t) {
                    dq += dz[t] * inv_sqrt * k[static_cast<std::size_t>(t)];
                    dk[static_cast<std::size_t>(t)] += dz[t] * inv_sqrt * q;
                    dv[static_cast<std::size_t>(t)] += w[t] * g;
                }
                grads.wq += dq * src.transpose();
                grad_x.pixel(f, y, px) += p.wq.transpose() * dq;
            }
    for (int t = 0; t < tokens; ++t) {
        grads.wk += dk[static_cast<std::size_t>(t)] * context.row(t);
        grads.wv += dv[static_cast<std::size_t>(t)] * context.row(t);
    }
}

// ---- extrinsics feed-forward -----------------------------------------------

void extrinsics_ffn_backward(const FeatureVideo& x, const CameraTrajectory& trajectory,
                             const ExtrinsicsFfn& ffn, const FeatureVideo& grad_out,
                             FeatureVideo& grad_x, ExtrinsicsFfn& grads) {
    const int ch = x.channels;
    const int in_dim = ch + 12;
    for (int f = 0; f < x.frames; ++f) {
        const auto entries =
            trajectory[static_cast<std::size_t>(x.frame_indices[static_cast<std::size_t>(f)])]
                .extrinsics.entries();
        Eigen::VectorXd in(in_dim);
        for (int i = 0; i < 12; ++i) in[ch + i] = entries[static_cast<std::size_t>(i)];
        for (int y = 0; y < x.height; ++y)
            for (int px = 0; px < x.width; ++px) {
                in.head(ch) = x.pixel(f, y, px);
                const Eigen::VectorXd pre = ffn.l1.w * in + ffn.l1.b;
                Eigen::VectorXd h = pre;
                for (int i = 0; i < h.size(); ++i) h[i] = silu(h[i]);

                const Eigen::VectorXd g = grad_out.pixel(f, y, px);
                grads.l2.w += g * h.transpose();
                grads.l2.b += g;
                Eigen::VectorXd dh = ffn.l2.w.transpose() * g;
                for (int i = 0; i < dh.size(); ++i) dh[i] *= silu_grad(pre[i]);
                grads.l1.w += dh * in.transpose();
                grads.l1.b += dh;
                grad_x.pixel(f, y, px) += (ffn.l1.w.transpose() * dh).head(ch);
            }
    }
}

}  // namespace

FeatureVideo extrinsics_residual_block(const FeatureVideo& features,
                                       const CameraTrajectory& trajectory,
                                       const ExtrinsicsFfn& ffn) {
    if (static_cast<int>(features.frame_indices.size()) != features.frames)
        throw ContractError("extrinsics block: one extrinsics per frame required");
    const int ch = features.channels;
    if (ffn.l1.w.cols() != ch + 12 || ffn.l2.w.rows() != ch)
        throw ContractError("extrinsics block: FFN dims must be (ch+12) -> hidden -> ch");

    FeatureVideo out = features;
    Eigen::VectorXd in(ch + 12);
    for (int f = 0; f < features.frames; ++f) {
        const int frame = features.frame_indices[static_cast<std::size_t>(f)];
        if (frame < 0 || frame >= static_cast<int>(trajectory.size()))
            throw ContractError("extrinsics block: frame index outside trajectory");
        const auto entries = trajectory[static_cast<std::size_t>(frame)].extrinsics.entries();
        for (int i = 0; i < 12; ++i) in[ch + i] = entries[static_cast<std::size_t>(i)];
        for (int y = 0; y < features.height; ++y)
            for (int px = 0; px < features.width; ++px) {
                in.head(ch) = features.pixel(f, y, px);
                Eigen::VectorXd h = ffn.l1.w * in + ffn.l1.b;
                for (int i = 0; i < h.size(); ++i) h[i] = silu(h[i]);
                out.pixel(f, y, px) += ffn.l2.w * h + ffn.l2.b;
            }
    }
    return out;
}

FeatureVideo condition_input_injection(const FeatureVideo& base_latent,
                                       const std::vector<FeatureVideo>& conditions,
                                       const Conv2d& base_conv,
                                       const std::vector<Conv2d>& condition_convs) {
    if (conditions.size() != condition_convs.size())
        throw ContractError("condition injection: one convolution per condition required");
    FeatureVideo out = conv2d_forward(base_latent, base_conv);
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        if (conditions[i].width != base_latent.width ||
            conditions[i].height != base_latent.height ||
            conditions[i].frames != base_latent.frames)
            throw ContractError("condition injection: condition dims must match the latent");
        accumulate(out, conv2d_forward(conditions[i], condition_convs[i]));
    }
    return out;
}

void ResidualStack::check() const {
    for (std::size_t i = 1; i < stages.size(); ++i) {
        if (stages[i].width >= stages[i - 1].width || stages[i].height >= stages[i - 1].height)
            throw ContractError("residual stack: stages must be strictly coarser");
    }
}

// ---------------------------------------------------------------------------

namespace {

TemporalBlockParams init_temporal_block(int ch, int ctx_dim, bool with_extrinsics, Rng& rng) {
    TemporalBlockParams t;
    t.self_attn.wq = random_matrix(ch, ch, rng);
    t.self_attn.wk = random_matrix(ch, ch, rng);
    t.self_attn.wv = random_matrix(ch, ch, rng);
    t.cross_attn.wq = random_matrix(ch, ch, rng);
    t.cross_attn.wk = random_matrix(ch, ctx_dim, rng);
    t.cross_attn.wv = random_matrix(ch, ctx_dim, rng);
    if (with_extrinsics) {
        ExtrinsicsFfn ffn;
        ffn.l1 = Linear::init(ch + 12, 2 * ch, rng);
        ffn.l2 = Linear::init(2 * ch, ch, rng);
        t.extrinsics = std::move(ffn);
    }
    return t;
}

RayTranBlockParams init_raytran_block(int ch, int voxel_count, Rng& rng, std::uint64_t seed) {
    RayTranBlockParams r;
    r.to_3d.wq = random_matrix(ch, ch, rng);
    r.to_3d.wk = random_matrix(ch, ch, rng);
    r.to_3d.wv = random_matrix(ch, ch, rng);
    r.to_2d.wq = random_matrix(ch, ch, rng);
    r.to_2d.wk = random_matrix(ch, ch, rng);
    r.to_2d.wv = random_matrix(ch, ch, rng);
    r.voxel_seeds = voxel_query_seeds(voxel_count, ch);
    r.body = Conv3dEncoderDecoder::init(ch, 2, seed);
    return r;
}

struct RayTranGrads {
    RayAttentionGrads to_3d;
    RayAttentionGrads to_2d;
    Eigen::MatrixXd voxel_seeds;
    Conv3dEncoderDecoder body;
};

RayTranGrads zero_raytran_grads(const RayTranBlockParams& p) {
    const int ch = static_cast<int>(p.to_3d.wq.rows());
    RayTranGrads g;
    g.to_3d = {Eigen::MatrixXd::Zero(ch, ch), Eigen::MatrixXd::Zero(ch, ch),
               Eigen::MatrixXd::Zero(ch, ch)};
    g.to_2d = g.to_3d;
    g.voxel_seeds = Eigen::MatrixXd::Zero(p.voxel_seeds.rows(), p.voxel_seeds.cols());
    g.body = p.body.zeros_like();
    return g;
}

std::vector<Eigen::VectorXd> frame_embeddings(const FeatureVideo& x) {
    std::vector<Eigen::VectorXd> emb;
    for (int f = 0; f < x.frames; ++f)
        emb.push_back(
            time_embedding(x.frame_indices[static_cast<std::size_t>(f)], x.channels));
    return emb;
}

FeatureVideo add_embeddings(const FeatureVideo& x, const std::vector<Eigen::VectorXd>& emb) {
    FeatureVideo out = x;
    for (int f = 0; f < x.frames; ++f)
        for (int y = 0; y < x.height; ++y)
            for (int px = 0; px < x.width; ++px)
                out.pixel(f, y, px) += emb[static_cast<std::size_t>(f)];
    return out;
}

}  // namespace

struct ToyConditioningNet::EncoderTrace {
    FeatureVideo latent_in;
    std::vector<FeatureVideo> conditions;
    FeatureVideo x0;
    FeatureVideo res1_pre, x1;
    FeatureVideo t1_a, t1_b, t1_out;
    VoxelFeatures rt1_vox, rt1_vox2;
    FeatureVideo rt1_px;
    FeatureVideo s1;
    FeatureVideo down_out;
    FeatureVideo res2_pre, x2;
    FeatureVideo t2_a, t2_b, t2_out;
    VoxelFeatures rt2_vox, rt2_vox2;
    FeatureVideo rt2_px;
    FeatureVideo s2;
};

namespace {

struct TemporalGrads {
    TemporalAttention self_attn;
    CrossAttention cross_attn;
    std::optional<ExtrinsicsFfn> extrinsics;
};

TemporalGrads zero_temporal_grads(const TemporalBlockParams& p) {
    TemporalGrads g;
    g.self_attn.wq = Eigen::MatrixXd::Zero(p.self_attn.wq.rows(), p.self_attn.wq.cols());
    g.self_attn.wk = g.self_attn.wq;
    g.self_attn.wv = g.self_attn.wq;
    g.cross_attn.wq = Eigen::MatrixXd::Zero(p.cross_attn.wq.rows(), p.cross_attn.wq.cols());
    g.cross_attn.wk = Eigen::MatrixXd::Zero(p.cross_attn.wk.rows(), p.cross_attn.wk.cols());
    g.cross_attn.wv = Eigen::MatrixXd::Zero(p.cross_attn.wv.rows(), p.cross_attn.wv.cols());
    if (p.extrinsics) {
        ExtrinsicsFfn z;
        z.l1 = Linear::zeros(static_cast<int>(p.extrinsics->l1.w.cols()),
                             static_cast<int>(p.extrinsics->l1.w.rows()));
        z.l2 = Linear::zeros(static_cast<int>(p.extrinsics->l2.w.cols()),
                             static_cast<int>(p.extrinsics->l2.w.rows()));
        g.extrinsics = std::move(z);
    }
    return g;
}

}  // namespace

struct ToyConditioningNet::Grads {
    struct EncoderGrads {
        Conv2d conv_in;
        ResBlock2d res1;
        TemporalGrads temp1;
        Conv2d down;
        ResBlock2d res2;
        TemporalGrads temp2;
        std::optional<RayTranGrads> raytran1;
        std::optional<RayTranGrads> raytran2;
        std::vector<Conv2d> condition_convs;
    };
    EncoderGrads base;
    struct DecoderGrads {
        ResBlock2d res2;
        Conv2d up;
        ResBlock2d res1;
        Conv2d conv_out;
    } decoder;
    EncoderGrads control;
    ZeroConvs zero;
};

namespace {

Conv2d zero_like(const Conv2d& c) { return Conv2d::zeros(c.in_ch, c.out_ch, c.ksize, c.stride); }

ResBlock2d zero_like(const ResBlock2d& r) { return {zero_like(r.c1), zero_like(r.c2)}; }

}  // namespace

ToyConditioningNet::ToyConditioningNet(const ToyNetConfig& config,
                                       const CameraTrajectory& trajectory)
    : config_(config), trajectory_(trajectory) {
    const int w = trajectory.width();
    const int h = trajectory.height();
    if (w % 8 != 0 || h % 8 != 0)
        throw ContractError("toy net: image dimensions must be divisible by 8");
    latent_width_ = w / 4;
    latent_height_ = h / 4;
    if (config_.raytran_stages < 0 || config_.raytran_stages > 2)
        throw ContractError("toy net: raytran_stages must be 0, 1, or 2");

    Rng rng(config_.seed * 0x9E3779B97F4A7C15ull + 0xC0FFEE);

    params_.context = random_matrix(config_.context_tokens, config_.context_dim, rng);

    // base encoder
    params_.base.conv_in = Conv2d::init(config_.latent_channels, config_.ch0, 3, 1, rng);
    params_.base.res1 = {Conv2d::init(config_.ch0, config_.ch0, 3, 1, rng),
                         Conv2d::init(config_.ch0, config_.ch0, 3, 1, rng)};
    params_.base.temp1 = init_temporal_block(config_.ch0, config_.context_dim, false, rng);
    params_.base.down = Conv2d::init(config_.ch0, config_.ch1, 3, 2, rng);
    params_.base.res2 = {Conv2d::init(config_.ch1, config_.ch1, 3, 1, rng),
                         Conv2d::init(config_.ch1, config_.ch1, 3, 1, rng)};
    params_.base.temp2 = init_temporal_block(config_.ch1, config_.context_dim, false, rng);

    // decoder
    params_.decoder.res2 = {Conv2d::init(config_.ch1, config_.ch1, 3, 1, rng),
                            Conv2d::init(config_.ch1, config_.ch1, 3, 1, rng)};
    params_.decoder.up = Conv2d::init(config_.ch1, config_.ch0, 3, 1, rng);
    params_.decoder.res1 = {Conv2d::init(config_.ch0, config_.ch0, 3, 1, rng),
                            Conv2d::init(config_.ch0, config_.ch0, 3, 1, rng)};
    params_.decoder.conv_out = Conv2d::init(config_.ch0, config_.latent_channels, 3, 1, rng);

    // control branch: parameter-clone of the base encoder at construction
    params_.control = params_.base;
    if (config_.cond_extrinsics) {
        ExtrinsicsFfn f1;
        f1.l1 = Linear::init(config_.ch0 + 12, 2 * config_.ch0, rng);
        f1.l2 = Linear::init(2 * config_.ch0, config_.ch0, rng);
        params_.control.temp1.extrinsics = std::move(f1);
        ExtrinsicsFfn f2;
        f2.l1 = Linear::init(config_.ch1 + 12, 2 * config_.ch1, rng);
        f2.l2 = Linear::init(2 * config_.ch1, config_.ch1, rng);
        params_.control.temp2.extrinsics = std::move(f2);
    }
    if (config_.raytran_stages >= 1) {
        const VoxelGrid grid1 = build_grid(trajectory_, config_.grid_resolution,
                                           Eigen::Vector3d::Constant(config_.grid_extent),
                                           config_.ch0);
        incidence1_ = build_incidence(trajectory_, grid1, 4);
        params_.control.raytran1 =
            init_raytran_block(config_.ch0, grid1.voxel_count(), rng, config_.seed + 101);
    }
    if (config_.raytran_stages >= 2) {
        const VoxelGrid grid2 = build_grid(trajectory_, config_.grid_resolution,
                                           Eigen::Vector3d::Constant(config_.grid_extent),
                                           config_.ch1);
        incidence2_ = build_incidence(trajectory_, grid2, 8);
        params_.control.raytran2 =
            init_raytran_block(config_.ch1, grid2.voxel_count(), rng, config_.seed + 202);
    }
    if (config_.cond_rays)
        params_.control.condition_convs.push_back(Conv2d::init(6, config_.ch0, 3, 1, rng));
    if (config_.cond_reproj)
        params_.control.condition_convs.push_back(Conv2d::init(3, config_.ch0, 3, 1, rng));

    // zero convolutions gate the control branch
    params_.zero.z1 = Conv2d::zeros(config_.ch0, config_.ch0, 1, 1);
    params_.zero.z2 = Conv2d::zeros(config_.ch1, config_.ch1, 1, 1);
}

std::vector<int> ToyConditioningNet::condition_channels() const {
    std::vector<int> ch;
    if (config_.cond_rays) ch.push_back(6);
    if (config_.cond_reproj) ch.push_back(3);
    return ch;
}

namespace {

FeatureVideo raytran_forward(const FeatureVideo& x, const RayTranBlockParams& p,
                             const SparseIncidence& inc, VoxelFeatures* vox_out,
                             VoxelFeatures* vox2_out, FeatureVideo* px_out) {
    const auto emb = frame_embeddings(x);
    const FeatureVideo px = add_embeddings(x, emb);
    VoxelFeatures vox = attend_2d_to_3d(x, emb, inc, p.to_3d, p.voxel_seeds);
    VoxelFeatures vox2 = p.body.forward(vox);
    FeatureVideo y = attend_3d_to_2d(vox2, px, inc, p.to_2d);
    if (vox_out) *vox_out = std::move(vox);
    if (vox2_out) *vox2_out = std::move(vox2);
    if (px_out) *px_out = px;
    return y;
}

void raytran_backward(const FeatureVideo& x, const RayTranBlockParams& p,
                      const SparseIncidence& inc, const VoxelFeatures& vox,
                      const VoxelFeatures& vox2, const FeatureVideo& px,
                      const FeatureVideo& grad_y, FeatureVideo& grad_x, RayTranGrads& grads) {
    const auto emb = frame_embeddings(x);

    VoxelFeatures grad_vox2(vox2.resolution, vox2.channels);
    FeatureVideo grad_px(px.frames, px.height, px.width, px.channels);
    attend_3d_to_2d_backward(vox2, px, inc, p.to_2d, grad_y, grad_vox2, grad_px, grads.to_2d);

    VoxelFeatures grad_vox(vox.resolution, vox.channels);
    p.body.backward(vox, grad_vox2, grad_vox, grads.body);

    attend_2d_to_3d_backward(x, emb, inc, p.to_3d, p.voxel_seeds, grad_vox, grad_x, grads.to_3d,
                             grads.voxel_seeds);
    accumulate(grad_x, grad_px);  // px = x + constant embedding
}

}  // namespace

FeatureVideo ToyConditioningNet::encoder_forward(const EncoderParams& enc,
                                                 const FeatureVideo& latent,
                                                 const std::vector<FeatureVideo>* conditions,
                                                 EncoderTrace* trace,
                                                 FeatureVideo* stage1_out) const {
    FeatureVideo x0 =
        conditions
            ? condition_input_injection(latent, *conditions, enc.conv_in, enc.condition_convs)
            : conv2d_forward(latent, enc.conv_in);

    FeatureVideo res1_pre;
    FeatureVideo x1 = resblock_forward(x0, enc.res1, &res1_pre);

    FeatureVideo a = add(x1, temporal_attention_forward(x1, enc.temp1.self_attn));
    FeatureVideo b = enc.temp1.extrinsics
                         ? extrinsics_residual_block(a, trajectory_, *enc.temp1.extrinsics)
                         : a;
    FeatureVideo t1 = add(b, cross_attention_forward(b, enc.temp1.cross_attn, params_.context));

    FeatureVideo s1 = t1;
    VoxelFeatures rt1_vox, rt1_vox2;
    FeatureVideo rt1_px;
    if (enc.raytran1) {
        const FeatureVideo y =
            raytran_forward(x1, *enc.raytran1, incidence1_, &rt1_vox, &rt1_vox2, &rt1_px);
        s1 = add(t1, y);
    }

    FeatureVideo down = conv2d_forward(s1, enc.down);
    FeatureVideo res2_pre;
    FeatureVideo x2 = resblock_forward(down, enc.res2, &res2_pre);

    FeatureVideo a2 = add(x2, temporal_attention_forward(x2, enc.temp2.self_attn));
    FeatureVideo b2 = enc.temp2.extrinsics
                          ? extrinsics_residual_block(a2, trajectory_, *enc.temp2.extrinsics)
                          : a2;
    FeatureVideo t2 = add(b2, cross_attention_forward(b2, enc.temp2.cross_attn, params_.context));

    FeatureVideo s2 = t2;
    VoxelFeatures rt2_vox, rt2_vox2;
    FeatureVideo rt2_px;
    if (enc.raytran2) {
        const FeatureVideo y =
            raytran_forward(x2, *enc.raytran2, incidence2_, &rt2_vox, &rt2_vox2, &rt2_px);
        s2 = add(t2, y);
    }

    if (stage1_out) *stage1_out = s1;
    if (trace) {
        trace->latent_in = latent;
        if (conditions) trace->conditions = *conditions;
        trace->x0 = std::move(x0);
        trace->res1_pre = std::move(res1_pre);
        trace->x1 = std::move(x1);
        trace->t1_a = std::move(a);
        trace->t1_b = std::move(b);
        trace->t1_out = std::move(t1);
        trace->rt1_vox = std::move(rt1_vox);
        trace->rt1_vox2 = std::move(rt1_vox2);
        trace->rt1_px = std::move(rt1_px);
        trace->s1 = s1;
        trace->down_out = std::move(down);
        trace->res2_pre = std::move(res2_pre);
        trace->x2 = std::move(x2);
        trace->t2_a = std::move(a2);
        trace->t2_b = std::move(b2);
        trace->t2_out = std::move(t2);
        trace->rt2_vox = std::move(rt2_vox);
        trace->rt2_vox2 = std::move(rt2_vox2);
        trace->rt2_px = std::move(rt2_px);
        trace->s2 = s2;
    }
    return s2;
}

namespace {

void check_latent(const FeatureVideo& latent, int frames, int h, int w, int ch) {
    if (latent.frames != frames || latent.height != h || latent.width != w ||
        latent.channels != ch)
        throw ContractError("toy net: latent video has the wrong shape");
}

}  // namespace

FeatureVideo ToyConditioningNet::base_forward(const FeatureVideo& latent) const {
    check_latent(latent, static_cast<int>(trajectory_.size()), latent_height_, latent_width_,
                 config_.latent_channels);
    FeatureVideo s1;
    FeatureVideo s2 = encoder_forward(params_.base, latent, nullptr, nullptr, &s1);

    FeatureVideo d2 = resblock_forward(s2, params_.decoder.res2, nullptr);
    FeatureVideo u = conv2d_forward(upsample2_forward(d2), params_.decoder.up);
    FeatureVideo m = add(u, s1);
    FeatureVideo d1 = resblock_forward(m, params_.decoder.res1, nullptr);
    return conv2d_forward(d1, params_.decoder.conv_out);
}

ResidualStack ToyConditioningNet::control_branch_forward(
    const FeatureVideo& latent, const std::vector<FeatureVideo>& conditions) const {
    check_latent(latent, static_cast<int>(trajectory_.size()), latent_height_, latent_width_,
                 config_.latent_channels);
    const auto expected = condition_channels();
    if (conditions.size() != expected.size())
        throw ContractError("toy net: wrong number of condition videos");
    for (std::size_t i = 0; i < conditions.size(); ++i)
        if (conditions[i].channels != expected[i])
            throw ContractError("toy net: condition channel mismatch");

    FeatureVideo c1;
    FeatureVideo c2 = encoder_forward(params_.control, latent, &conditions, nullptr, &c1);

    ResidualStack stack;
    stack.stages.push_back(conv2d_forward(c1, params_.zero.z1));
    stack.stages.push_back(conv2d_forward(c2, params_.zero.z2));
    stack.check();
    return stack;
}

FeatureVideo ToyConditioningNet::merged_forward(const FeatureVideo& latent,
                                                const ResidualStack& control_residuals) const {
    if (control_residuals.stages.size() != 2)
        throw ContractError("toy net: expected two control residual stages");

    FeatureVideo s1;
    FeatureVideo s2 = encoder_forward(params_.base, latent, nullptr, nullptr, &s1);
    if (!control_residuals.stages[0].same_shape(s1) ||
        !control_residuals.stages[1].same_shape(s2))
        throw ContractError("toy net: control residual shapes do not match the encoder");

    accumulate(s1, control_residuals.stages[0]);
    accumulate(s2, control_residuals.stages[1]);

    FeatureVideo d2 = resblock_forward(s2, params_.decoder.res2, nullptr);
    FeatureVideo u = conv2d_forward(upsample2_forward(d2), params_.decoder.up);
    FeatureVideo m = add(u, s1);
    FeatureVideo d1 = resblock_forward(m, params_.decoder.res1, nullptr);
    return conv2d_forward(d1, params_.decoder.conv_out);
}

FeatureVideo ToyConditioningNet::forward(const FeatureVideo& latent,
                                         const std::vector<FeatureVideo>& conditions) const {
    return merged_forward(latent, control_branch_forward(latent, conditions));
}

// ---------------------------------------------------------------------------
// backward

namespace {

struct EncoderBackwardContext {
    const CameraTrajectory* trajectory;
    const Eigen::MatrixXd* context;
    const SparseIncidence* incidence1;
    const SparseIncidence* incidence2;
};

// walks the encoder in reverse given gradients at both stage outputs
void encoder_backward(const EncoderParams& enc, const ToyConditioningNet::EncoderTrace& tr,
                      const EncoderBackwardContext& ctx, const FeatureVideo& grad_s1_in,
                      const FeatureVideo& grad_s2,
                      ToyConditioningNet::Grads::EncoderGrads& grads, FeatureVideo* grad_latent) {
    // stage 2
    FeatureVideo grad_t2 = grad_s2;
    FeatureVideo grad_x2(tr.x2.frames, tr.x2.height, tr.x2.width, tr.x2.channels);
    grad_x2.frame_indices = tr.x2.frame_indices;
    if (enc.raytran2)
        raytran_backward(tr.x2, *enc.raytran2, *ctx.incidence2, tr.rt2_vox, tr.rt2_vox2,
                         tr.rt2_px, grad_s2, grad_x2, *grads.raytran2);

    // t2 = b2 + cross(b2)
    FeatureVideo grad_b2 = grad_t2;
    cross_attention_backward(tr.t2_b, enc.temp2.cross_attn, *ctx.context, grad_t2, grad_b2,
                             grads.temp2.cross_attn);
    // b2 = extr(a2) or a2
    FeatureVideo grad_a2 = grad_b2;
    if (enc.temp2.extrinsics)
        extrinsics_ffn_backward(tr.t2_a, *ctx.trajectory, *enc.temp2.extrinsics, grad_b2,
                                grad_a2, *grads.temp2.extrinsics);
    // a2 = x2 + self(x2)
    accumulate(grad_x2, grad_a2);
    temporal_attention_backward(tr.x2, enc.temp2.self_attn, grad_a2, grad_x2,
                                grads.temp2.self_attn);

    FeatureVideo grad_down(tr.down_out.frames, tr.down_out.height, tr.down_out.width,
                           tr.down_out.channels);
    resblock_backward(tr.down_out, tr.res2_pre, enc.res2, grad_x2, grad_down, grads.res2);

    FeatureVideo grad_s1 = grad_s1_in;
    conv2d_backward(tr.s1, enc.down, grad_down, grad_s1, grads.down);

    // stage 1
    FeatureVideo grad_t1 = grad_s1;
    FeatureVideo grad_x1(tr.x1.frames, tr.x1.height, tr.x1.width, tr.x1.channels);
    grad_x1.frame_indices = tr.x1.frame_indices;
    if (enc.raytran1)
        raytran_backward(tr.x1, *enc.raytran1, *ctx.incidence1, tr.rt1_vox, tr.rt1_vox2,
                         tr.rt1_px, grad_s1, grad_x1, *grads.raytran1);

    FeatureVideo grad_b1 = grad_t1;
    cross_attention_backward(tr.t1_b, enc.temp1.cross_attn, *ctx.context, grad_t1, grad_b1,
                             grads.temp1.cross_attn);
    FeatureVideo grad_a1 = grad_b1;
    if (enc.temp1.extrinsics)
        extrinsics_ffn_backward(tr.t1_a, *ctx.trajectory, *enc.temp1.extrinsics, grad_b1,
                                grad_a1, *grads.temp1.extrinsics);
    accumulate(grad_x1, grad_a1);
    temporal_attention_backward(tr.x1, enc.temp1.self_attn, grad_a1, grad_x1,
                                grads.temp1.self_attn);

    FeatureVideo grad_x0(tr.x0.frames, tr.x0.height, tr.x0.width, tr.x0.channels);
    resblock_backward(tr.x0, tr.res1_pre, enc.res1, grad_x1, grad_x0, grads.res1);

    FeatureVideo sink(tr.latent_in.frames, tr.latent_in.height, tr.latent_in.width,
                      tr.latent_in.channels);
    conv2d_backward(tr.latent_in, enc.conv_in, grad_x0, grad_latent ? *grad_latent : sink,
                    grads.conv_in);
    for (std::size_t i = 0; i < tr.conditions.size(); ++i) {
        FeatureVideo cond_sink(tr.conditions[i].frames, tr.conditions[i].height,
                               tr.conditions[i].width, tr.conditions[i].channels);
        conv2d_backward(tr.conditions[i], enc.condition_convs[i], grad_x0, cond_sink,
                        grads.condition_convs[i]);
    }
}

}  // namespace

std::vector<double> ToyConditioningNet::loss_gradient(const FeatureVideo& latent,
                                                      const std::vector<FeatureVideo>& conditions,
                                                      const FeatureVideo& probe) const {
    // forward with traces
    EncoderTrace base_tr, control_tr;
    FeatureVideo base_s1;
    FeatureVideo base_s2 = encoder_forward(params_.base, latent, nullptr, &base_tr, &base_s1);
    FeatureVideo ctrl_s1;
    FeatureVideo ctrl_s2 =
        encoder_forward(params_.control, latent, &conditions, &control_tr, &ctrl_s1);

    FeatureVideo r1 = conv2d_forward(ctrl_s1, params_.zero.z1);
    FeatureVideo r2 = conv2d_forward(ctrl_s2, params_.zero.z2);

    FeatureVideo s1 = add(base_s1, r1);
    FeatureVideo s2 = add(base_s2, r2);

    FeatureVideo dec2_pre;
    FeatureVideo d2 = resblock_forward(s2, params_.decoder.res2, &dec2_pre);
    FeatureVideo up_in = upsample2_forward(d2);
    FeatureVideo u = conv2d_forward(up_in, params_.decoder.up);
    FeatureVideo m = add(u, s1);
    FeatureVideo dec1_pre;
    FeatureVideo d1 = resblock_forward(m, params_.decoder.res1, &dec1_pre);
    // loss = sum(conv_out(d1) * probe); grad at conv_out output is probe

    // zero-init gradient holders
    Grads grads;
    auto zero_encoder = [&](const EncoderParams& enc) {
        Grads::EncoderGrads g;
        g.conv_in = zero_like(enc.conv_in);
        g.res1 = zero_like(enc.res1);
        g.temp1 = zero_temporal_grads(enc.temp1);
        g.down = zero_like(enc.down);
        g.res2 = zero_like(enc.res2);
        g.temp2 = zero_temporal_grads(enc.temp2);
        if (enc.raytran1) g.raytran1 = zero_raytran_grads(*enc.raytran1);
        if (enc.raytran2) g.raytran2 = zero_raytran_grads(*enc.raytran2);
        for (const Conv2d& c : enc.condition_convs) g.condition_convs.push_back(zero_like(c));
        return g;
    };
    grads.base = zero_encoder(params_.base);
    grads.control = zero_encoder(params_.control);
    grads.decoder.res2 = zero_like(params_.decoder.res2);
    grads.decoder.up = zero_like(params_.decoder.up);
    grads.decoder.res1 = zero_like(params_.decoder.res1);
    grads.decoder.conv_out = zero_like(params_.decoder.conv_out);
    grads.zero.z1 = zero_like(params_.zero.z1);
    grads.zero.z2 = zero_like(params_.zero.z2);

    // decoder backward
    FeatureVideo grad_d1(d1.frames, d1.height, d1.width, d1.channels);
    conv2d_backward(d1, params_.decoder.conv_out, probe, grad_d1, grads.decoder.conv_out);

    FeatureVideo grad_m(m.frames, m.height, m.width, m.channels);
    resblock_backward(m, dec1_pre, params_.decoder.res1, grad_d1, grad_m, grads.decoder.res1);

    // m = u + s1
    FeatureVideo grad_s1 = grad_m;
    FeatureVideo grad_up_in(up_in.frames, up_in.height, up_in.width, up_in.channels);
    conv2d_backward(up_in, params_.decoder.up, grad_m, grad_up_in, grads.decoder.up);
    FeatureVideo grad_d2(d2.frames, d2.height, d2.width, d2.channels);
    upsample2_backward(grad_up_in, grad_d2);

    FeatureVideo grad_s2(s2.frames, s2.height, s2.width, s2.channels);
    resblock_backward(s2, dec2_pre, params_.decoder.res2, grad_d2, grad_s2, grads.decoder.res2);

    // s_k = base_sk + z_k(ctrl_sk)
    FeatureVideo grad_ctrl_s1(ctrl_s1.frames, ctrl_s1.height, ctrl_s1.width, ctrl_s1.channels);
    conv2d_backward(ctrl_s1, params_.zero.z1, grad_s1, grad_ctrl_s1, grads.zero.z1);
    FeatureVideo grad_ctrl_s2(ctrl_s2.frames, ctrl_s2.height, ctrl_s2.width, ctrl_s2.channels);
    conv2d_backward(ctrl_s2, params_.zero.z2, grad_s2, grad_ctrl_s2, grads.zero.z2);

    const EncoderBackwardContext ctx{&trajectory_, &params_.context, &incidence1_, &incidence2_};
    encoder_backward(params_.base, base_tr, ctx, grad_s1, grad_s2, grads.base, nullptr);
    encoder_backward(params_.control, control_tr, ctx, grad_ctrl_s1, grad_ctrl_s2, grads.control,
                     nullptr);

    // flatten in param_views order
    Params grads_as_params;
    grads_as_params.base.conv_in = grads.base.conv_in;
    grads_as_params.base.res1 = grads.base.res1;
    grads_as_params.base.temp1.self_attn = grads.base.temp1.self_attn;
    grads_as_params.base.temp1.cross_attn = grads.base.temp1.cross_attn;
    grads_as_params.base.down = grads.base.down;
    grads_as_params.base.res2 = grads.base.res2;
    grads_as_params.base.temp2.self_attn = grads.base.temp2.self_attn;
    grads_as_params.base.temp2.cross_attn = grads.base.temp2.cross_attn;
    grads_as_params.decoder.res2 = grads.decoder.res2;
    grads_as_params.decoder.up = grads.decoder.up;
    grads_as_params.decoder.res1 = grads.decoder.res1;
    grads_as_params.decoder.conv_out = grads.decoder.conv_out;
    grads_as_params.control.conv_in = grads.control.conv_in;
    grads_as_params.control.res1 = grads.control.res1;
    grads_as_params.control.temp1.self_attn = grads.control.temp1.self_attn;
    grads_as_params.control.temp1.cross_attn = grads.control.temp1.cross_attn;
    if (grads.control.temp1.extrinsics)
        grads_as_params.control.temp1.extrinsics = grads.control.temp1.extrinsics;
    grads_as_params.control.down = grads.control.down;
    grads_as_params.control.res2 = grads.control.res2;
    grads_as_params.control.temp2.self_attn = grads.control.temp2.self_attn;
    grads_as_params.control.temp2.cross_attn = grads.control.temp2.cross_attn;
    if (grads.control.temp2.extrinsics)
        grads_as_params.control.temp2.extrinsics = grads.control.temp2.extrinsics;
    if (grads.control.raytran1) {
        RayTranBlockParams r;
        r.to_3d = {grads.control.raytran1->to_3d.wq, grads.control.raytran1->to_3d.wk,
                   grads.control.raytran1->to_3d.wv};
        r.to_2d = {grads.control.raytran1->to_2d.wq, grads.control.raytran1->to_2d.wk,
                   grads.control.raytran1->to_2d.wv};
        r.voxel_seeds = grads.control.raytran1->voxel_seeds;
        r.body = grads.control.raytran1->body;
        grads_as_params.control.raytran1 = std::move(r);
    }
    if (grads.control.raytran2) {
        RayTranBlockParams r;
        r.to_3d = {grads.control.raytran2->to_3d.wq, grads.control.raytran2->to_3d.wk,
                   grads.control.raytran2->to_3d.wv};
        r.to_2d = {grads.control.raytran2->to_2d.wq, grads.control.raytran2->to_2d.wk,
                   grads.control.raytran2->to_2d.wv};
        r.voxel_seeds = grads.control.raytran2->voxel_seeds;
        r.body = grads.control.raytran2->body;
        grads_as_params.control.raytran2 = std::move(r);
    }
    grads_as_params.control.condition_convs = grads.control.condition_convs;
    grads_as_params.zero = grads.zero;
    grads_as_params.context = params_.context;  // placeholder, not flattened

    std::vector<ParamView> views = collect_param_views(grads_as_params);
    std::vector<double> flat;
    for (const ParamView& v : views)
        flat.insert(flat.end(), v.data, v.data + v.size);
    return flat;
}

// defined out-of-line so loss_gradient can reuse the exact ordering
std::vector<ParamView> collect_param_views(ToyConditioningNet::Params& p) {
    std::vector<ParamView> views;
    auto add_vec = [&](const std::string& name, std::vector<double>& v) {
        views.push_back({name, v.data(), v.size()});
    };
    auto add_mat = [&](const std::string& name, Eigen::MatrixXd& m) {
        views.push_back({name, m.data(), static_cast<std::size_t>(m.size())});
    };
    auto add_vecx = [&](const std::string& name, Eigen::VectorXd& v) {
        views.push_back({name, v.data(), static_cast<std::size_t>(v.size())});
    };
    auto add_conv = [&](const std::string& name, Conv2d& c) {
        add_vec(name + ".w", c.weight);
        add_vec(name + ".b", c.bias);
    };
    auto add_res = [&](const std::string& name, ResBlock2d& r) {
        add_conv(name + ".c1", r.c1);
        add_conv(name + ".c2", r.c2);
    };
    auto add_temporal = [&](const std::string& name, TemporalBlockParams& t) {
        add_mat(name + ".self.wq", t.self_attn.wq);
        add_mat(name + ".self.wk", t.self_attn.wk);
        add_mat(name + ".self.wv", t.self_attn.wv);
        add_mat(name + ".cross.wq", t.cross_attn.wq);
        add_mat(name + ".cross.wk", t.cross_attn.wk);
        add_mat(name + ".cross.wv", t.cross_attn.wv);
        if (t.extrinsics) {
            add_mat(name + ".extr.l1.w", t.extrinsics->l1.w);
            add_vecx(name + ".extr.l1.b", t.extrinsics->l1.b);
            add_mat(name + ".extr.l2.w", t.extrinsics->l2.w);
            add_vecx(name + ".extr.l2.b", t.extrinsics->l2.b);
        }
    };
    auto add_raytran = [&](const std::string& name, RayTranBlockParams& r) {
        add_mat(name + ".to3d.wq", r.to_3d.wq);
        add_mat(name + ".to3d.wk", r.to_3d.wk);
        add_mat(name + ".to3d.wv", r.to_3d.wv);
        add_mat(name + ".to2d.wq", r.to_2d.wq);
        add_mat(name + ".to2d.wk", r.to_2d.wk);
        add_mat(name + ".to2d.wv", r.to_2d.wv);
        add_mat(name + ".seeds", r.voxel_seeds);
        for (std::size_t b = 0; b < r.body.blocks.size(); ++b) {
            const std::string bn = name + ".body" + std::to_string(b);
            add_vec(bn + ".c1.w", r.body.blocks[b].c1.weight);
            add_vec(bn + ".c1.b", r.body.blocks[b].c1.bias);
            add_vec(bn + ".c2.w", r.body.blocks[b].c2.weight);
            add_vec(bn + ".c2.b", r.body.blocks[b].c2.bias);
        }
    };
    auto add_encoder = [&](const std::string& name, EncoderParams& e) {
        add_conv(name + ".conv_in", e.conv_in);
        add_res(name + ".res1", e.res1);
        add_temporal(name + ".temp1", e.temp1);
        add_conv(name + ".down", e.down);
        add_res(name + ".res2", e.res2);
        add_temporal(name + ".temp2", e.temp2);
        if (e.raytran1) add_raytran(name + ".raytran1", *e.raytran1);
        if (e.raytran2) add_raytran(name + ".raytran2", *e.raytran2);
        for (std::size_t i = 0; i < e.condition_convs.size(); ++i)
            add_conv(name + ".cond" + std::to_string(i), e.condition_convs[i]);
    };

    add_encoder("base", p.base);
    add_res("decoder.res2", p.decoder.res2);
    add_conv("decoder.up", p.decoder.up);
    add_res("decoder.res1", p.decoder.res1);
    add_conv("decoder.conv_out", p.decoder.conv_out);
    add_encoder("control", p.control);
    add_conv("zero.z1", p.zero.z1);
    add_conv("zero.z2", p.zero.z2);
    return views;
}

std::vector<ParamView> ToyConditioningNet::param_views() { return collect_param_views(params_); }

}  // namespace camcond
