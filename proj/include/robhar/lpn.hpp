// Light-PointNet frame embedder. Pipeline per aligned frame: a small
// transformation net predicts a 3x3 matrix that standardizes the input
// points, a shared per-point MLP (kernel-1 conv + BN + ReLU stacks) lifts
// each point, max-pooling over the point axis yields a global feature, and
// an FC+BN+ReLU gate branch multiplies elementwise into the pooled feature
// to form the embedding. Everything is order-independent per point, so the
// embedding is invariant to point permutations.

#pragma once

#include <vector>

#include "robhar/nn.hpp"
#include "robhar/pcloud.hpp"

namespace robhar {

struct LpnConfig {
    int as = 25;                            // points per aligned frame
    std::vector<int> mlp = {32, 64};        // per-point widths, from 3
    std::vector<int> tnet_conv = {16, 32};  // T-Net per-point widths, from 3
    int tnet_fc = 16;                       // T-Net pooled FC width, then -> 9

    int embed_dim() const { return mlp.back(); }
};

struct LpnParams {
    LpnConfig cfg;
    std::vector<DenseLayer> tnet_convs;
    std::vector<BatchNorm> tnet_conv_bns;
    DenseLayer tnet_fc1;
    BatchNorm tnet_fc1_bn;
    DenseLayer tnet_fc2;  // -> 9, initialized to emit the identity matrix
    std::vector<DenseLayer> mlp_convs;
    std::vector<BatchNorm> mlp_bns;
    DenseLayer gate_fc;  // embed_dim -> embed_dim
    BatchNorm gate_bn;

    void build(ParamStore& store, const LpnConfig& config) {
        cfg = config;
        if (cfg.as < 1 || cfg.mlp.empty() || cfg.tnet_conv.empty())
            throw ConfigError("invalid LPN config");
        int in = 3;
        for (int w : cfg.tnet_conv) {
            DenseLayer l;
            l.build(store, in, w);
            tnet_convs.push_back(l);
            BatchNorm bn;
            bn.build(store, w);
            tnet_conv_bns.push_back(bn);
            in = w;
        }
        tnet_fc1.build(store, in, cfg.tnet_fc);
        tnet_fc1_bn.build(store, cfg.tnet_fc);
        tnet_fc2.build(store, cfg.tnet_fc, 9);
        in = 3;
        for (int w : cfg.mlp) {
            DenseLayer l;
            l.build(store, in, w);
            mlp_convs.push_back(l);
            BatchNorm bn;
            bn.build(store, w);
            mlp_bns.push_back(bn);
            in = w;
        }
        gate_fc.build(store, cfg.embed_dim(), cfg.embed_dim());
        gate_bn.build(store, cfg.embed_dim());
    }

    void init(ParamStore& store, Rng& rng) {
        for (auto& l : tnet_convs) l.init(store, rng, std::sqrt(2.0 / l.in_dim));
        tnet_fc1.init(store, rng, std::sqrt(2.0 / tnet_fc1.in_dim));
        // Zero weights + identity bias: the transform starts as the identity.
        tnet_fc2.init(store, rng, 0.0);
        double* b = store.p(tnet_fc2.b_off);
        b[0] = b[4] = b[8] = 1.0;
        for (auto& l : mlp_convs) l.init(store, rng, std::sqrt(2.0 / l.in_dim));
        gate_fc.init(store, rng, std::sqrt(2.0 / gate_fc.in_dim));
    }
};

struct LpnCache {
    const TensorBuf* input = nullptr;  // [F*AS, 3]
    int frames = 0;
    std::vector<TensorBuf> t_pre, t_act;
    std::vector<BnCache> t_bn;
    TensorBuf t_pooled;
    std::vector<int> t_argmax;
    TensorBuf t_fc1_pre, t_fc1_act;
    BnCache t_fc1_bn;
    TensorBuf t_mat;        // [F, 9]
    TensorBuf transformed;  // [F*AS, 3]
    std::vector<TensorBuf> m_pre, m_act;
    std::vector<BnCache> m_bn;
    TensorBuf pooled;  // [F, D]
    std::vector<int> argmax;
    TensorBuf g_pre, g_act;
    BnCache g_bn;
};

namespace detail {

// out[r] = in[r] * M_f for every point row r of frame f.
inline void apply_transforms(const TensorBuf& pts, const TensorBuf& mats, int as,
                             TensorBuf& out) {
    const int frames = mats.rows();
    out.shape = {frames * as, 3};
    out.data.resize(static_cast<long>(frames) * as * 3);
    for (int f = 0; f < frames; ++f) {
        const double* m = mats.data.data() + static_cast<long>(f) * 9;
        for (int p = 0; p < as; ++p) {
            const double* in = pts.data.data() + (static_cast<long>(f) * as + p) * 3;
            double* o = out.data.data() + (static_cast<long>(f) * as + p) * 3;
            for (int j = 0; j < 3; ++j)
                o[j] = in[0] * m[j] + in[1] * m[3 + j] + in[2] * m[6 + j];
        }
    }
}

inline void conv_stack_forward(ParamStore& store, const std::vector<DenseLayer>& layers,
                               const std::vector<BatchNorm>& bns, const TensorBuf& input,
                               bool train, bool update_running, std::vector<TensorBuf>* pre,
                               std::vector<TensorBuf>* act, std::vector<BnCache>* bn_caches,
                               TensorBuf& out) {
    if (train) {
        pre->reserve(layers.size());
        act->reserve(layers.size());
        bn_caches->reserve(layers.size());
    }
    const TensorBuf* cur = &input;
    TensorBuf tmp;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        TensorBuf z;
        pointwise_conv_forward(store, layers[i], *cur, z);
        TensorBuf a;
        if (train) {
            BnCache bc;
            batchnorm_forward_train(store, bns[i], z, a, bc, update_running);
            bn_caches->push_back(std::move(bc));
        } else {
            batchnorm_forward_infer(store, bns[i], z, a);
        }
        relu_forward(a);
        if (train) {
            pre->push_back(std::move(z));
            act->push_back(std::move(a));
            cur = &act->back();
        } else {
            tmp = std::move(a);
            cur = &tmp;
        }
    }
    if (train)
        out = act->back();
    else
        out = std::move(tmp);
}

// Shared backward for a conv + BN + ReLU stack. The cached pre tensors
// must outlive this call (BnCache points into them).
inline void conv_stack_backward(ParamStore& store, const std::vector<DenseLayer>& layers,
                                const std::vector<BatchNorm>& bns, const TensorBuf& input,
                                const std::vector<TensorBuf>& pre,
                                const std::vector<TensorBuf>& act,
                                const std::vector<BnCache>& bn_caches, TensorBuf grad,
                                TensorBuf* grad_input) {
    for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i) {
        relu_backward(act[i], grad);
        TensorBuf d_pre;
        batchnorm_backward(store, bns[i], bn_caches[i], pre[i], grad, d_pre);
        const TensorBuf& layer_in = i == 0 ? input : act[i - 1];
        TensorBuf d_in;
        const bool need_input_grad = i > 0 || grad_input != nullptr;
        pointwise_conv_backward(store, layers[i], layer_in, d_pre,
                                need_input_grad ? &d_in : nullptr);
        grad = std::move(d_in);
    }
    if (grad_input) *grad_input = std::move(grad);
}

}  // namespace detail

// Forward over F frames stacked as [F*AS, 3]. In train mode the batch-norm
// layers use batch statistics across all points/frames of the call and the
// cache is filled for the backward pass.
inline void lpn_forward(ParamStore& store, const LpnParams& params, const TensorBuf& pts,
                        int frames, bool train, TensorBuf& emb, LpnCache* cache,
                        bool update_running = true) {
    const int as = params.cfg.as;
    require_shape(pts, frames * as, 3, "lpn_forward input");
    LpnCache local;
    LpnCache& c = cache ? *cache : local;
    c.input = &pts;
    c.frames = frames;

    // T-Net
    TensorBuf t_feat;
    detail::conv_stack_forward(store, params.tnet_convs, params.tnet_conv_bns, pts, train,
                               update_running, &c.t_pre, &c.t_act, &c.t_bn, t_feat);
    maxpool_points_forward(t_feat, as, c.t_pooled, c.t_argmax);
    dense_forward(store, params.tnet_fc1, c.t_pooled, c.t_fc1_pre);
    if (train)
        batchnorm_forward_train(store, params.tnet_fc1_bn, c.t_fc1_pre, c.t_fc1_act, c.t_fc1_bn,
                                update_running);
    else
        batchnorm_forward_infer(store, params.tnet_fc1_bn, c.t_fc1_pre, c.t_fc1_act);
    relu_forward(c.t_fc1_act);
    dense_forward(store, params.tnet_fc2, c.t_fc1_act, c.t_mat);
    detail::apply_transforms(pts, c.t_mat, as, c.transformed);

    // Shared per-point MLP
    TensorBuf feat;
    detail::conv_stack_forward(store, params.mlp_convs, params.mlp_bns, c.transformed, train,
                               update_running, &c.m_pre, &c.m_act, &c.m_bn, feat);
    maxpool_points_forward(feat, as, c.pooled, c.argmax);

    // Gate branch, multiplied into the pooled global feature
    dense_forward(store, params.gate_fc, c.pooled, c.g_pre);
    if (train)
        batchnorm_forward_train(store, params.gate_bn, c.g_pre, c.g_act, c.g_bn, update_running);
    else
        batchnorm_forward_infer(store, params.gate_bn, c.g_pre, c.g_act);
    relu_forward(c.g_act);

    const int d = params.cfg.embed_dim();
    emb.shape = {frames, d};
    emb.data.resize(static_cast<long>(frames) * d);
    for (long i = 0; i < static_cast<long>(frames) * d; ++i)
        emb.data[i] = c.g_act.data[i] * c.pooled.data[i];
}

// Backward for a train-mode forward; accumulates parameter gradients.
// Gradients w.r.t. the raw input points are not needed (leaf) and are
// not produced.
inline void lpn_backward(ParamStore& store, const LpnParams& params, LpnCache& c,
                         const TensorBuf& grad_emb) {
    const int as = params.cfg.as;
    const int d = params.cfg.embed_dim();
    const int frames = c.frames;

    // emb = gate_act ⊙ pooled
    TensorBuf d_gate = c.g_act;  // reuse shapes
    TensorBuf d_pooled = c.pooled;
    for (long i = 0; i < static_cast<long>(frames) * d; ++i) {
        d_gate.data[i] = grad_emb.data[i] * c.pooled.data[i];
        d_pooled.data[i] = grad_emb.data[i] * c.g_act.data[i];
    }

    relu_backward(c.g_act, d_gate);
    TensorBuf d_gpre;
    batchnorm_backward(store, params.gate_bn, c.g_bn, c.g_pre, d_gate, d_gpre);
    TensorBuf d_pooled_from_gate;
    dense_backward(store, params.gate_fc, c.pooled, d_gpre, &d_pooled_from_gate);
    for (long i = 0; i < static_cast<long>(frames) * d; ++i)
        d_pooled.data[i] += d_pooled_from_gate.data[i];

    TensorBuf d_feat;
    maxpool_points_backward(d_pooled, as, c.argmax, d_feat);
    TensorBuf d_transformed;
    detail::conv_stack_backward(store, params.mlp_convs, params.mlp_bns, c.transformed, c.m_pre,
                                c.m_act, c.m_bn, std::move(d_feat), &d_transformed);

    // transformed = pts * M_f  =>  dM_f += pts_p^T dT_p summed over points
    TensorBuf d_mat({frames, 9});
    const TensorBuf& pts = *c.input;
    for (int f = 0; f < frames; ++f) {
        double* dm = d_mat.data.data() + static_cast<long>(f) * 9;
        for (int p = 0; p < as; ++p) {
            const double* in = pts.data.data() + (static_cast<long>(f) * as + p) * 3;
            const double* dt = d_transformed.data.data() + (static_cast<long>(f) * as + p) * 3;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) dm[i * 3 + j] += in[i] * dt[j];
        }
    }

    TensorBuf d_fc1_act;
    dense_backward(store, params.tnet_fc2, c.t_fc1_act, d_mat, &d_fc1_act);
    relu_backward(c.t_fc1_act, d_fc1_act);
    TensorBuf d_fc1_pre;
    batchnorm_backward(store, params.tnet_fc1_bn, c.t_fc1_bn, c.t_fc1_pre, d_fc1_act, d_fc1_pre);
    TensorBuf d_t_pooled;
    dense_backward(store, params.tnet_fc1, c.t_pooled, d_fc1_pre, &d_t_pooled);
    TensorBuf d_t_feat;
    maxpool_points_backward(d_t_pooled, as, c.t_argmax, d_t_feat);
    detail::conv_stack_backward(store, params.tnet_convs, params.tnet_conv_bns, pts, c.t_pre,
                                c.t_act, c.t_bn, std::move(d_t_feat), nullptr);
}

// ---- inference conveniences ----

inline TensorBuf frames_to_tensor(std::span<const AlignedFrame> frames) {
    if (frames.empty()) throw DataError("no frames");
    const int as = static_cast<int>(frames[0].points.size());
    TensorBuf pts({static_cast<int>(frames.size()) * as, 3});
    long r = 0;
    for (const auto& f : frames) {
        if (static_cast<int>(f.points.size()) != as)
            throw ShapeError("frames_to_tensor: inconsistent alignment size");
        for (const auto& p : f.points) {
            pts.data[r * 3 + 0] = p.x;
            pts.data[r * 3 + 1] = p.y;
            pts.data[r * 3 + 2] = p.z;
            ++r;
        }
    }
    return pts;
}

// The 3x3 transform the T-Net predicts for one frame (inference mode).
inline std::array<double, 9> tnet_forward(ParamStore& store, const LpnParams& params,
                                          const AlignedFrame& frame) {
    if (static_cast<int>(frame.points.size()) != params.cfg.as)
        throw ShapeError("tnet_forward: frame not aligned to AS");
    TensorBuf pts = frames_to_tensor(std::span<const AlignedFrame>(&frame, 1));
    TensorBuf t_feat;
    std::vector<TensorBuf> pre, act;
    std::vector<BnCache> bn;
    detail::conv_stack_forward(store, params.tnet_convs, params.tnet_conv_bns, pts, false, false,
                               &pre, &act, &bn, t_feat);
    TensorBuf pooled;
    std::vector<int> argmax;
    maxpool_points_forward(t_feat, params.cfg.as, pooled, argmax);
    TensorBuf fc1_pre, fc1_act, mat;
    dense_forward(store, params.tnet_fc1, pooled, fc1_pre);
    batchnorm_forward_infer(store, params.tnet_fc1_bn, fc1_pre, fc1_act);
    relu_forward(fc1_act);
    dense_forward(store, params.tnet_fc2, fc1_act, mat);
    std::array<double, 9> out;
    for (int i = 0; i < 9; ++i) out[i] = mat.data[i];
    return out;
}

// Embeds frames in inference mode (running batch-norm statistics).
inline TensorBuf embed_frames(ParamStore& store, const LpnParams& params,
                              std::span<const AlignedFrame> frames) {
    TensorBuf pts = frames_to_tensor(frames);
    TensorBuf emb;
    lpn_forward(store, params, pts, static_cast<int>(frames.size()), false, emb, nullptr);
    return emb;
}

inline std::vector<double> embed_frame(ParamStore& store, const LpnParams& params,
                                       const AlignedFrame& frame) {
    TensorBuf emb = embed_frames(store, params, std::span<const AlignedFrame>(&frame, 1));
    return emb.data;
}

inline TensorBuf embed_segment(ParamStore& store, const LpnParams& params, const Segment& seg) {
    return embed_frames(store, params, seg.frames);
}

}  // namespace robhar
