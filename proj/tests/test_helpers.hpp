// Shared fixtures for the training/streaming tests: a small synthetic
// dataset and a compact model trained on it once per test run.

#pragma once

#include "robhar/io.hpp"
#include "robhar/synth.hpp"
#include "robhar/train.hpp"

namespace robhar::testing {

inline Dataset quick_dataset(uint64_t seed, int recs_per_class = 3, double seconds = 4.0,
                             double rate = 10.0,
                             PointCountProfile profile = PointCountProfile::disc) {
    Dataset ds;
    const auto acts = builtin_activities();
    for (const auto& m : acts) ds.class_names.push_back(m.name);
    // builtin ids are already 0..4 in name order used here
    int rec_no = 0;
    for (const auto& m : acts) {
        for (int r = 0; r < recs_per_class; ++r) {
            Rng rng(Rng::derive(seed, 0xDA7A, m.id, r));
            Recording rec;
            rec.id = m.name + "_" + std::to_string(rec_no++);
            rec.frames = gen_discrete(m, seconds, rate, profile, rng);
            ds.recordings.push_back(std::move(rec));
        }
    }
    return ds;
}

// The default architecture and windowing on a compact dataset; trains in
// about a minute and is shared by every test that needs a real classifier.
inline TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 16;
    cfg.lr = 3e-3;
    cfg.seed = 1234;
    return cfg;
}

// Small 10 Hz variant for cheap structural tests (no accuracy claims).
inline TrainConfig quick_config_10hz() {
    TrainConfig cfg = quick_config();
    cfg.window_seconds = 1.0;
    cfg.stride_seconds = 0.5;
    cfg.alignment_size = 12;
    cfg.epochs = 2;
    cfg.h_dir = 16;
    cfg.head = 16;
    cfg.mlp = {8, 12};
    cfg.tnet_conv = {4, 4};
    cfg.tnet_fc = 4;
    return cfg;
}

struct QuickFixture {
    Dataset ds;
    TrainConfig cfg;
    TrainResult tr;
};

// Trained once, shared by every test that needs a working classifier.
inline QuickFixture& quick_fixture() {
    static QuickFixture fx = [] {
        QuickFixture f;
        f.ds = quick_dataset(7, 12, 5.5, 30.0, PointCountProfile::mmact);
        f.cfg = quick_config();
        f.tr = train(f.ds, f.cfg);
        return f;
    }();
    return fx;
}

}  // namespace robhar::testing
