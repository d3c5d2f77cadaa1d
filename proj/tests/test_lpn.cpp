#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "robhar/lpn.hpp"
#include "robhar/model.hpp"

using namespace robhar;

namespace {

AlignedFrame random_aligned(Rng& rng, int as) {
    AlignedFrame f;
    for (int i = 0; i < as; ++i)
        f.points.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 2)});
    return f;
}

struct LpnFixture {
    ParamStore store;
    LpnParams params;
    LpnFixture(const LpnConfig& cfg, uint64_t seed) {
        params.build(store, cfg);
        Rng rng(seed);
        params.init(store, rng);
    }
};

}  // namespace

TEST_CASE("tnet emits the identity transform at initialization", "[lpn]") {
    LpnConfig cfg;
    cfg.as = 6;
    LpnFixture fx(cfg, 51);
    Rng rng(52);
    for (int trial = 0; trial < 5; ++trial) {
        auto m = tnet_forward(fx.store, fx.params, random_aligned(rng, 6));
        REQUIRE(m.size() == 9);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                REQUIRE(m[i * 3 + j] == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-12));
    }
}

TEST_CASE("embedding is invariant to point permutations", "[lpn]") {
    LpnConfig cfg;
    cfg.as = 10;
    cfg.mlp = {8, 12};
    cfg.tnet_conv = {6, 6};
    cfg.tnet_fc = 4;
    LpnFixture fx(cfg, 53);
    // activate the transform so invariance is tested through a non-trivial T-Net
    Rng nrng(54);
    for (int i = 0; i < fx.params.tnet_fc2.in_dim * 9; ++i)
        fx.store.p(fx.params.tnet_fc2.w_off)[i] = nrng.normal(0, 0.1);

    Rng rng(55);
    for (int f = 0; f < 100; ++f) {
        AlignedFrame frame = random_aligned(rng, 10);
        const auto base = embed_frame(fx.store, fx.params, frame);
        for (int p = 0; p < 10; ++p) {
            AlignedFrame shuffled = frame;
            for (int i = 9; i > 0; --i)
                std::swap(shuffled.points[i], shuffled.points[rng.uniform_int(i + 1)]);
            const auto emb = embed_frame(fx.store, fx.params, shuffled);
            for (std::size_t j = 0; j < base.size(); ++j) REQUIRE(emb[j] == base[j]);
        }
    }
}

TEST_CASE("duplicating the argmax point leaves the pooled feature unchanged", "[lpn]") {
    // Identity-ish per-point map: one 3->3 conv with W=I so channel j tracks
    // coordinate j; all-positive points keep relu out of the way.
    LpnConfig cfg;
    cfg.as = 3;
    cfg.mlp = {3};
    cfg.tnet_conv = {2};
    cfg.tnet_fc = 2;
    LpnFixture fx(cfg, 56);
    double* w = fx.store.p(fx.params.mlp_convs[0].w_off);
    for (int i = 0; i < 9; ++i) w[i] = (i % 4 == 0) ? 1.0 : 0.0;
    for (int i = 0; i < 3; ++i) fx.store.p(fx.params.mlp_convs[0].b_off)[i] = 0.0;

    AlignedFrame frame;
    frame.points = {{5, 5, 5}, {1, 1, 1}, {2, 0.5, 1}};  // first point dominates everywhere
    AlignedFrame dup;
    dup.points = {{5, 5, 5}, {5, 5, 5}, {2, 0.5, 1}};  // duplicate argmax, drop a non-argmax
    const auto a = embed_frame(fx.store, fx.params, frame);
    const auto b = embed_frame(fx.store, fx.params, dup);
    REQUIRE(a == b);
}

TEST_CASE("tiny hand-set config matches a straight-line evaluation", "[lpn]") {
    LpnConfig cfg;
    cfg.as = 2;
    cfg.mlp = {2};
    cfg.tnet_conv = {2};
    cfg.tnet_fc = 2;
    LpnFixture fx(cfg, 57);
    ParamStore& st = fx.store;
    LpnParams& lp = fx.params;

    // Hand-set every weight.
    const double tc_w[6] = {0.5, -0.25, 0.1, 0.3, -0.2, 0.4};  // 3x2
    const double tc_b[2] = {0.05, -0.1};
    const double tf1_w[4] = {0.6, 0.2, -0.3, 0.5};  // 2x2
    const double tf1_b[2] = {0.1, 0.0};
    double tf2_w[18];  // 2x9
    for (int i = 0; i < 18; ++i) tf2_w[i] = 0.01 * (i + 1) * (i % 3 == 0 ? -1 : 1);
    const double mlp_w[6] = {0.7, -0.4, 0.2, 0.6, -0.5, 0.3};
    const double mlp_b[2] = {0.02, 0.03};
    const double gate_w[4] = {0.9, -0.1, 0.2, 0.8};
    const double gate_b[2] = {0.05, -0.02};

    std::copy(tc_w, tc_w + 6, st.p(lp.tnet_convs[0].w_off));
    std::copy(tc_b, tc_b + 2, st.p(lp.tnet_convs[0].b_off));
    std::copy(tf1_w, tf1_w + 4, st.p(lp.tnet_fc1.w_off));
    std::copy(tf1_b, tf1_b + 2, st.p(lp.tnet_fc1.b_off));
    std::copy(tf2_w, tf2_w + 18, st.p(lp.tnet_fc2.w_off));
    // tnet_fc2 bias stays the identity from init
    std::copy(mlp_w, mlp_w + 6, st.p(lp.mlp_convs[0].w_off));
    std::copy(mlp_b, mlp_b + 2, st.p(lp.mlp_convs[0].b_off));
    std::copy(gate_w, gate_w + 4, st.p(lp.gate_fc.w_off));
    std::copy(gate_b, gate_b + 2, st.p(lp.gate_fc.b_off));

    const double p1[3] = {0.4, -0.3, 0.8};
    const double p2[3] = {-0.2, 0.5, 0.1};
    AlignedFrame frame;
    frame.points = {{p1[0], p1[1], p1[2]}, {p2[0], p2[1], p2[2]}};

    // Straight-line oracle. BN layers are at inference defaults:
    // y = x / sqrt(1 + eps).
    const double bs = 1.0 / std::sqrt(1.0 + 1e-5);
    auto relu = [](double v) { return v > 0 ? v : 0.0; };

    double tfeat[2][2];
    for (int p = 0; p < 2; ++p) {
        const double* pt = p == 0 ? p1 : p2;
        for (int j = 0; j < 2; ++j) {
            double z = tc_b[j];
            for (int i = 0; i < 3; ++i) z += pt[i] * tc_w[i * 2 + j];
            tfeat[p][j] = relu(z * bs);
        }
    }
    double tpool[2] = {std::max(tfeat[0][0], tfeat[1][0]), std::max(tfeat[0][1], tfeat[1][1])};
    double tf1[2];
    for (int j = 0; j < 2; ++j) {
        double z = tf1_b[j];
        for (int i = 0; i < 2; ++i) z += tpool[i] * tf1_w[i * 2 + j];
        tf1[j] = relu(z * bs);
    }
    double m[9];
    for (int j = 0; j < 9; ++j) {
        m[j] = (j % 4 == 0 ? 1.0 : 0.0);  // identity bias
        for (int i = 0; i < 2; ++i) m[j] += tf1[i] * tf2_w[i * 9 + j];
    }
    double tp[2][3];
    for (int p = 0; p < 2; ++p) {
        const double* pt = p == 0 ? p1 : p2;
        for (int j = 0; j < 3; ++j) tp[p][j] = pt[0] * m[j] + pt[1] * m[3 + j] + pt[2] * m[6 + j];
    }
    double feat[2][2];
    for (int p = 0; p < 2; ++p)
        for (int j = 0; j < 2; ++j) {
            double z = mlp_b[j];
            for (int i = 0; i < 3; ++i) z += tp[p][i] * mlp_w[i * 2 + j];
            feat[p][j] = relu(z * bs);
        }
    double pooled[2] = {std::max(feat[0][0], feat[1][0]), std::max(feat[0][1], feat[1][1])};
    double gate[2];
    for (int j = 0; j < 2; ++j) {
        double z = gate_b[j];
        for (int i = 0; i < 2; ++i) z += pooled[i] * gate_w[i * 2 + j];
        gate[j] = relu(z * bs);
    }
    const double expected[2] = {gate[0] * pooled[0], gate[1] * pooled[1]};

    const auto emb = embed_frame(st, lp, frame);
    REQUIRE(emb.size() == 2);
    REQUIRE(emb[0] == Catch::Approx(expected[0]).margin(1e-12));
    REQUIRE(emb[1] == Catch::Approx(expected[1]).margin(1e-12));
}

TEST_CASE("embed_segment is time-distributed embed_frame", "[lpn]") {
    LpnConfig cfg;
    cfg.as = 5;
    cfg.mlp = {6, 7};
    cfg.tnet_conv = {4};
    cfg.tnet_fc = 3;
    LpnFixture fx(cfg, 58);
    Rng rng(59);

    Segment seg;
    for (int i = 0; i < 4; ++i) seg.frames.push_back(random_aligned(rng, 5));

    TensorBuf emb = embed_segment(fx.store, fx.params, seg);
    REQUIRE(emb.rows() == 4);
    REQUIRE(emb.cols() == 7);
    for (int t = 0; t < 4; ++t) {
        const auto single = embed_frame(fx.store, fx.params, seg.frames[t]);
        for (int j = 0; j < 7; ++j) REQUIRE(emb.at(t, j) == Catch::Approx(single[j]).margin(1e-12));
    }

    // single-frame segment reduces to embed_frame
    Segment one;
    one.frames = {seg.frames[0]};
    TensorBuf e1 = embed_segment(fx.store, fx.params, one);
    const auto f1 = embed_frame(fx.store, fx.params, seg.frames[0]);
    for (int j = 0; j < 7; ++j) REQUIRE(e1.data[j] == f1[j]);

    // shuffling points inside each frame leaves all embeddings unchanged
    Segment shuffled = seg;
    for (auto& f : shuffled.frames)
        for (int i = 4; i > 0; --i) std::swap(f.points[i], f.points[rng.uniform_int(i + 1)]);
    TensorBuf emb2 = embed_segment(fx.store, fx.params, shuffled);
    REQUIRE(emb2.data == emb.data);
}

TEST_CASE("small input perturbations move the embedding smoothly", "[lpn]") {
    LpnConfig cfg;
    cfg.as = 8;
    cfg.mlp = {8, 8};
    cfg.tnet_conv = {4};
    cfg.tnet_fc = 4;
    LpnFixture fx(cfg, 60);
    Rng rng(61);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        AlignedFrame f = random_aligned(rng, 8);
        const auto base = embed_frame(fx.store, fx.params, f);
        AlignedFrame g = f;
        g.points[rng.uniform_int(8)].x += 1e-6;
        const auto moved = embed_frame(fx.store, fx.params, g);
        for (std::size_t j = 0; j < base.size(); ++j)
            worst = std::max(worst, std::fabs(moved[j] - base[j]));
    }
    REQUIRE(worst < 1e-3);
}

TEST_CASE("LPN gradients match finite differences through the T-Net", "[lpn]") {
    LpnConfig cfg;
    cfg.as = 4;
    cfg.mlp = {6, 5};
    cfg.tnet_conv = {4, 4};
    cfg.tnet_fc = 3;
    ParamStore store;
    LpnParams params;
    params.build(store, cfg);
    Rng rng(62);
    params.init(store, rng);
    // wake the transform path up so the T-Net stack carries gradient
    for (int i = 0; i < params.tnet_fc2.in_dim * 9; ++i)
        store.p(params.tnet_fc2.w_off)[i] = rng.normal(0, 0.2);

    const int frames = 6;
    TensorBuf pts({frames * cfg.as, 3});
    for (double& v : pts.data) v = rng.normal(0, 1);
    TensorBuf wts({frames, cfg.embed_dim()});
    for (double& v : wts.data) v = rng.normal(0, 1);

    auto loss_fn = [&]() {
        TensorBuf emb;
        LpnCache cache;
        lpn_forward(store, params, pts, frames, true, emb, &cache, false);
        double s = 0;
        for (long i = 0; i < emb.numel(); ++i) s += wts.data[i] * emb.data[i];
        return s;
    };
    auto grad_fn = [&]() {
        TensorBuf emb;
        LpnCache cache;
        lpn_forward(store, params, pts, frames, true, emb, &cache, false);
        lpn_backward(store, params, cache, wts);
    };
    auto res = grad_check(store, loss_fn, grad_fn, 1e-5, 63, 200, 1.0);
    INFO("worst idx " << res.worst_index << " analytic " << res.analytic << " numeric "
                      << res.numeric);
    REQUIRE(res.max_rel_err < 1e-4);
}
