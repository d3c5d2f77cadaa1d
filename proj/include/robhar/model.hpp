// The full classifier: Light-PointNet frame embedder feeding the
// bidirectional lite-LSTM head. Training math runs in 64-bit with
// hand-written backprop end to end; deployed parameters are rounded to
// 32-bit values when a model is finalized for persistence.

#pragma once

#include "robhar/bililstm.hpp"
#include "robhar/lpn.hpp"
#include "robhar/pcloud.hpp"

namespace robhar {

struct ModelConfig {
    LpnConfig lpn;
    int h_dir = 80;
    int head = 128;
    int k = 5;

    RnnConfig rnn_config() const {
        RnnConfig r;
        r.input_dim = lpn.embed_dim();
        r.h_dir = h_dir;
        r.head = head;
        r.k = k;
        return r;
    }
};

// Defaults for 30 Hz MMActivity-like data (AS=25).
inline ModelConfig default_model_config(int k = 5, int as = 25) {
    ModelConfig c;
    c.lpn.as = as;
    c.k = k;
    return c;
}

// Small configuration used by gradient checks and fast tests.
inline ModelConfig tiny_model_config(int k = 3, int as = 4) {
    ModelConfig c;
    c.lpn.as = as;
    c.lpn.mlp = {8, 8};
    c.lpn.tnet_conv = {8, 8};
    c.lpn.tnet_fc = 8;
    c.h_dir = 8;
    c.head = 8;
    c.k = k;
    return c;
}

struct ForwardCache {
    LpnCache lpn;
    RnnCache rnn;
    TensorBuf emb;     // [B*L, D]
    TensorBuf logits;  // [B, K]
};

struct HarModel {
    ModelConfig cfg;
    ParamStore store;
    LpnParams lpn;
    RnnParams rnn;

    static HarModel build(const ModelConfig& config, uint64_t init_seed) {
        HarModel m;
        m.cfg = config;
        m.lpn.build(m.store, config.lpn);
        m.rnn.build(m.store, config.rnn_config());
        Rng rng(Rng::derive(init_seed, 0x1417));
        m.lpn.init(m.store, rng);
        m.rnn.init(m.store, rng);
        return m;
    }

    std::size_t param_count() const { return store.params.size(); }

    // Training-mode forward on a batch of B segments x L frames stacked as
    // [B*L*AS, 3]. Returns the mean cross-entropy; fills the cache and the
    // 1/B-scaled logits gradient for backward().
    double forward_train(const TensorBuf& pts, std::span<const int> labels, int b, int l,
                         ForwardCache& cache, TensorBuf& grad_logits, bool update_running = true) {
        lpn_forward(store, lpn, pts, b * l, true, cache.emb, &cache.lpn, update_running);
        rnn_forward(store, rnn, cache.emb, b, l, true, cache.logits, &cache.rnn, update_running);
        return softmax_xent_batch(cache.logits, labels, grad_logits);
    }

    void backward(ForwardCache& cache, const TensorBuf& grad_logits) {
        TensorBuf grad_emb;
        rnn_backward(store, rnn, cache.rnn, grad_logits, grad_emb);
        lpn_backward(store, lpn, cache.lpn, grad_emb);
    }

    // Train-mode loss without touching running statistics; used by the
    // finite-difference checker.
    double loss_only(const TensorBuf& pts, std::span<const int> labels, int b, int l) {
        ForwardCache cache;
        TensorBuf grad_logits;
        return forward_train(pts, labels, b, l, cache, grad_logits, false);
    }

    // ---- inference ----

    TensorBuf embed_segment(const Segment& seg) { return robhar::embed_segment(store, lpn, seg); }

    std::vector<double> classify_embeddings(const TensorBuf& emb) {
        const auto logits = bidir_forward(store, rnn, emb);
        return softmax(logits);
    }

    // Posterior over the K classes for one segment.
    std::vector<double> classify_window(const Segment& seg) {
        TensorBuf emb = embed_segment(seg);
        return classify_embeddings(emb);
    }

    // Rounds every parameter and running statistic through 32-bit floats;
    // deployed models carry exactly the values the model file stores.
    void round_params_to_f32() {
        for (double& v : store.params) v = static_cast<double>(static_cast<float>(v));
        for (double& v : store.state) v = static_cast<double>(static_cast<float>(v));
    }
};

// Finite-difference check of the full network gradient on one batch.
inline GradCheckResult grad_check_model(HarModel& model, const TensorBuf& pts,
                                        std::span<const int> labels, int b, int l, double h,
                                        uint64_t seed, int min_samples = 50,
                                        double fraction = 0.01) {
    auto loss_fn = [&]() { return model.loss_only(pts, labels, b, l); };
    auto grad_fn = [&]() {
        ForwardCache cache;
        TensorBuf grad_logits;
        model.forward_train(pts, labels, b, l, cache, grad_logits, false);
        model.backward(cache, grad_logits);
    };
    return grad_check(model.store, loss_fn, grad_fn, h, seed, min_samples, fraction);
}

}  // namespace robhar
