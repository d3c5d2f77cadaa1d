// Bidirectional lightweight LSTM over the sequence of frame embeddings.
// The cell couples its input and forget gates (i = 1 - f) and reuses the
// shared gate pre-activation for the output gate through a learned bias
// offset, which keeps the recurrent parameter count at two weight matrices
// per direction. Final hidden states of both directions are concatenated,
// condensed by an FC+BN+ReLU stage and mapped to class logits by the
// activity classification layer.

#pragma once

#include <array>
#include <span>
#include <vector>

#include "robhar/nn.hpp"

namespace robhar {

struct RnnConfig {
    int input_dim = 64;
    int h_dir = 80;   // hidden units per direction
    int head = 128;   // condensed width before the AC layer
    int k = 5;        // activity classes
};

struct LiteCell {
    DenseLayer gate;  // [h_prev, x] -> H, shared gate pre-activation
    DenseLayer cand;  // [h_prev, x] -> H, candidate
    std::size_t bo_off = 0;  // output-gate bias offset
    int h = 0, in = 0;

    void build(ParamStore& store, int input_dim, int h_dim) {
        h = h_dim;
        in = input_dim;
        gate.build(store, h_dim + input_dim, h_dim);
        cand.build(store, h_dim + input_dim, h_dim);
        bo_off = store.add_params(h_dim);
    }

    void init(ParamStore& store, Rng& rng) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(gate.in_dim));
        gate.init(store, rng, scale);
        cand.init(store, rng, scale);
        // Bias the shared gate toward remembering at the start of training.
        double* bg = store.p(gate.b_off);
        for (int i = 0; i < h; ++i) bg[i] = 1.0;
    }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One recurrent step for a single sample.
// f = sigma(Wg.[h,x] + bg); i = 1 - f; c~ = tanh(Wc.[h,x] + bc);
// c' = f.c + i.c~; o = sigma(Wg.[h,x] + bg + bo); h' = o.tanh(c')
inline void cell_step(const ParamStore& store, const LiteCell& cell, std::span<const double> x,
                      std::span<const double> h_prev, std::span<const double> c_prev,
                      std::span<double> h_out, std::span<double> c_out) {
    if (static_cast<int>(x.size()) != cell.in || static_cast<int>(h_prev.size()) != cell.h)
        throw ShapeError("cell_step: input size mismatch");
    std::vector<double> hx(cell.h + cell.in);
    std::copy(h_prev.begin(), h_prev.end(), hx.begin());
    std::copy(x.begin(), x.end(), hx.begin() + cell.h);

    const double* wg = store.p(cell.gate.w_off);
    const double* bg = store.p(cell.gate.b_off);
    const double* wc = store.p(cell.cand.w_off);
    const double* bc = store.p(cell.cand.b_off);
    const double* bo = store.p(cell.bo_off);
    const int n = cell.h + cell.in;
    for (int j = 0; j < cell.h; ++j) {
        double z = bg[j], a = bc[j];
        for (int i = 0; i < n; ++i) {
            z += hx[i] * wg[static_cast<long>(i) * cell.h + j];
            a += hx[i] * wc[static_cast<long>(i) * cell.h + j];
        }
        const double f = sigmoid(z);
        const double o = sigmoid(z + bo[j]);
        const double ctil = std::tanh(a);
        c_out[j] = f * c_prev[j] + (1.0 - f) * ctil;
        h_out[j] = o * std::tanh(c_out[j]);
    }
}

struct RnnParams {
    RnnConfig cfg;
    LiteCell fwd, bwd;
    DenseLayer head_fc;  // 2*h_dir -> head
    BatchNorm head_bn;
    DenseLayer ac;  // head -> k

    void build(ParamStore& store, const RnnConfig& config) {
        cfg = config;
        fwd.build(store, cfg.input_dim, cfg.h_dir);
        bwd.build(store, cfg.input_dim, cfg.h_dir);
        head_fc.build(store, 2 * cfg.h_dir, cfg.head);
        head_bn.build(store, cfg.head);
        ac.build(store, cfg.head, cfg.k);
    }

    void init(ParamStore& store, Rng& rng) {
        fwd.init(store, rng);
        bwd.init(store, rng);
        head_fc.init(store, rng, std::sqrt(2.0 / head_fc.in_dim));
        ac.init(store, rng, std::sqrt(1.0 / ac.in_dim));
    }
};

struct DirCache {
    std::vector<TensorBuf> hx;  // [B, H+D] per step
    std::vector<TensorBuf> f, o, ctil, c, tanh_c;  // [B, H] per step
};

struct RnnCache {
    int b = 0, l = 0;
    DirCache fwd, bwd;
    TensorBuf feat;  // [B, 2H]
    TensorBuf head_pre, head_act;
    BnCache head_bn;
};

namespace detail {

// Runs one direction over the batch. Step s of the backward direction reads
// embedding row b*L + (L-1-s). Returns the final hidden state [B, H].
inline TensorBuf run_direction(ParamStore& store, const LiteCell& cell, const TensorBuf& emb,
                               int b, int l, bool reversed, DirCache* cache) {
    const int h = cell.h;
    const int d = cell.in;
    TensorBuf h_prev({b, h});
    TensorBuf c_prev({b, h});
    const double* bo = store.p(cell.bo_off);

    for (int s = 0; s < l; ++s) {
        const int t = reversed ? l - 1 - s : s;
        TensorBuf hx({b, h + d});
        for (int i = 0; i < b; ++i) {
            double* row = hx.data.data() + static_cast<long>(i) * (h + d);
            std::memcpy(row, h_prev.data.data() + static_cast<long>(i) * h, sizeof(double) * h);
            std::memcpy(row + h, emb.data.data() + (static_cast<long>(i) * l + t) * d,
                        sizeof(double) * d);
        }
        TensorBuf z, a;
        dense_forward(store, cell.gate, hx, z);
        dense_forward(store, cell.cand, hx, a);
        TensorBuf f({b, h}), o({b, h}), ctil({b, h}), c({b, h}), tc({b, h}), h_new({b, h});
        for (int i = 0; i < b; ++i) {
            for (int j = 0; j < h; ++j) {
                const long ix = static_cast<long>(i) * h + j;
                const double zv = z.data[ix];
                f.data[ix] = sigmoid(zv);
                o.data[ix] = sigmoid(zv + bo[j]);
                ctil.data[ix] = std::tanh(a.data[ix]);
                c.data[ix] = f.data[ix] * c_prev.data[ix] + (1.0 - f.data[ix]) * ctil.data[ix];
                tc.data[ix] = std::tanh(c.data[ix]);
                h_new.data[ix] = o.data[ix] * tc.data[ix];
            }
        }
        if (cache) {
            cache->hx.push_back(std::move(hx));
            cache->f.push_back(std::move(f));
            cache->o.push_back(std::move(o));
            cache->ctil.push_back(std::move(ctil));
            cache->c.push_back(c);
            cache->tanh_c.push_back(std::move(tc));
        }
        c_prev = std::move(c);
        h_prev = std::move(h_new);
    }
    return h_prev;
}

// BPTT through one direction. dh_final is the gradient at the final hidden
// state; dx gradients accumulate into grad_emb at the direction's time
// mapping.
inline void backprop_direction(ParamStore& store, const LiteCell& cell, const DirCache& cache,
                               int b, int l, bool reversed, const TensorBuf& dh_final,
                               TensorBuf& grad_emb) {
    const int h = cell.h;
    const int d = cell.in;
    TensorBuf dh = dh_final;
    TensorBuf dc({b, h});
    double* dbo = store.g(cell.bo_off);

    for (int s = l - 1; s >= 0; --s) {
        const int t = reversed ? l - 1 - s : s;
        const TensorBuf& f = cache.f[s];
        const TensorBuf& o = cache.o[s];
        const TensorBuf& ctil = cache.ctil[s];
        const TensorBuf& tc = cache.tanh_c[s];
        const TensorBuf* c_prev = s > 0 ? &cache.c[s - 1] : nullptr;

        TensorBuf dz({b, h}), da({b, h});
        for (int i = 0; i < b; ++i) {
            for (int j = 0; j < h; ++j) {
                const long ix = static_cast<long>(i) * h + j;
                const double fo = f.data[ix];
                const double ov = o.data[ix];
                const double tcv = tc.data[ix];
                const double cprev = c_prev ? c_prev->data[ix] : 0.0;
                const double dzo = dh.data[ix] * tcv * ov * (1.0 - ov);
                const double dct = dc.data[ix] + dh.data[ix] * ov * (1.0 - tcv * tcv);
                const double dzf = dct * (cprev - ctil.data[ix]) * fo * (1.0 - fo);
                const double dav = dct * (1.0 - fo) * (1.0 - ctil.data[ix] * ctil.data[ix]);
                dz.data[ix] = dzf + dzo;
                da.data[ix] = dav;
                dbo[j] += dzo;
                dc.data[ix] = dct * fo;
            }
        }
        TensorBuf dhx1, dhx2;
        dense_backward(store, cell.gate, cache.hx[s], dz, &dhx1);
        dense_backward(store, cell.cand, cache.hx[s], da, &dhx2);
        for (int i = 0; i < b; ++i) {
            const double* r1 = dhx1.data.data() + static_cast<long>(i) * (h + d);
            const double* r2 = dhx2.data.data() + static_cast<long>(i) * (h + d);
            double* dhr = dh.data.data() + static_cast<long>(i) * h;
            for (int j = 0; j < h; ++j) dhr[j] = r1[j] + r2[j];
            double* ger = grad_emb.data.data() + (static_cast<long>(i) * l + t) * d;
            for (int j = 0; j < d; ++j) ger[j] += r1[h + j] + r2[h + j];
        }
    }
}

}  // namespace detail

// Forward over a batch of B embedding sequences stacked as [B*L, D].
inline void rnn_forward(ParamStore& store, const RnnParams& params, const TensorBuf& emb, int b,
                        int l, bool train, TensorBuf& logits, RnnCache* cache,
                        bool update_running = true) {
    if (l < 1) throw ShapeError("rnn_forward: empty sequence");
    require_shape(emb, b * l, params.cfg.input_dim, "rnn_forward input");
    RnnCache local;
    RnnCache& c = cache ? *cache : local;
    c.b = b;
    c.l = l;

    TensorBuf h_fwd = detail::run_direction(store, params.fwd, emb, b, l, false,
                                            cache ? &c.fwd : nullptr);
    TensorBuf h_bwd = detail::run_direction(store, params.bwd, emb, b, l, true,
                                            cache ? &c.bwd : nullptr);

    const int h = params.cfg.h_dir;
    c.feat.shape = {b, 2 * h};
    c.feat.data.resize(static_cast<long>(b) * 2 * h);
    for (int i = 0; i < b; ++i) {
        std::memcpy(c.feat.data.data() + static_cast<long>(i) * 2 * h,
                    h_fwd.data.data() + static_cast<long>(i) * h, sizeof(double) * h);
        std::memcpy(c.feat.data.data() + static_cast<long>(i) * 2 * h + h,
                    h_bwd.data.data() + static_cast<long>(i) * h, sizeof(double) * h);
    }

    dense_forward(store, params.head_fc, c.feat, c.head_pre);
    if (train)
        batchnorm_forward_train(store, params.head_bn, c.head_pre, c.head_act, c.head_bn,
                                update_running);
    else
        batchnorm_forward_infer(store, params.head_bn, c.head_pre, c.head_act);
    relu_forward(c.head_act);
    dense_forward(store, params.ac, c.head_act, logits);
}

// Backward for a train-mode forward; writes dL/d(embeddings) into grad_emb.
inline void rnn_backward(ParamStore& store, const RnnParams& params, RnnCache& cache,
                         const TensorBuf& grad_logits, TensorBuf& grad_emb) {
    const int b = cache.b;
    const int l = cache.l;
    const int h = params.cfg.h_dir;
    const int d = params.cfg.input_dim;

    TensorBuf d_head_act;
    dense_backward(store, params.ac, cache.head_act, grad_logits, &d_head_act);
    relu_backward(cache.head_act, d_head_act);
    TensorBuf d_head_pre;
    batchnorm_backward(store, params.head_bn, cache.head_bn, cache.head_pre, d_head_act,
                       d_head_pre);
    TensorBuf d_feat;
    dense_backward(store, params.head_fc, cache.feat, d_head_pre, &d_feat);

    TensorBuf dh_fwd({b, h}), dh_bwd({b, h});
    for (int i = 0; i < b; ++i) {
        std::memcpy(dh_fwd.data.data() + static_cast<long>(i) * h,
                    d_feat.data.data() + static_cast<long>(i) * 2 * h, sizeof(double) * h);
        std::memcpy(dh_bwd.data.data() + static_cast<long>(i) * h,
                    d_feat.data.data() + static_cast<long>(i) * 2 * h + h, sizeof(double) * h);
    }

    grad_emb.shape = {b * l, d};
    grad_emb.data.assign(static_cast<long>(b) * l * d, 0.0);
    detail::backprop_direction(store, params.fwd, cache.fwd, b, l, false, dh_fwd, grad_emb);
    detail::backprop_direction(store, params.bwd, cache.bwd, b, l, true, dh_bwd, grad_emb);
}

// Concatenated final hidden states for one sequence (inference).
inline std::vector<double> bidir_feature(ParamStore& store, const RnnParams& params,
                                         const TensorBuf& emb) {
    const int l = emb.rows();
    TensorBuf h_fwd = detail::run_direction(store, params.fwd, emb, 1, l, false, nullptr);
    TensorBuf h_bwd = detail::run_direction(store, params.bwd, emb, 1, l, true, nullptr);
    std::vector<double> feat(h_fwd.data);
    feat.insert(feat.end(), h_bwd.data.begin(), h_bwd.data.end());
    return feat;
}

// Window logits for one embedding sequence [L, D] (inference).
inline std::vector<double> bidir_forward(ParamStore& store, const RnnParams& params,
                                         const TensorBuf& emb) {
    TensorBuf logits;
    rnn_forward(store, params, emb, 1, emb.rows(), false, logits, nullptr);
    return logits.data;
}

inline std::size_t count_parameters(const ParamStore& store) { return store.params.size(); }

}  // namespace robhar
