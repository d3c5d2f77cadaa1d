#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "robhar/nn.hpp"

using namespace robhar;

namespace {

TensorBuf random_tensor(int r, int c, Rng& rng, double scale = 1.0) {
    TensorBuf t({r, c});
    for (double& v : t.data) v = rng.normal(0.0, scale);
    return t;
}

// Brute-force central difference of a scalar loss w.r.t. one parameter.
template <typename F>
double fd(ParamStore& store, std::size_t idx, F&& loss, double h = 1e-5) {
    const double orig = store.params[idx];
    store.params[idx] = orig + h;
    const double lp = loss();
    store.params[idx] = orig - h;
    const double lm = loss();
    store.params[idx] = orig;
    return (lp - lm) / (2 * h);
}

}  // namespace

TEST_CASE("dense identity and scalar case", "[nn]") {
    ParamStore store;
    DenseLayer l;
    l.build(store, 3, 3);
    double* w = store.p(l.w_off);
    w[0] = w[4] = w[8] = 1.0;
    TensorBuf x({2, 3});
    x.data = {1, 2, 3, -1, 0.5, 2};
    TensorBuf y;
    dense_forward(store, l, x, y);
    REQUIRE(y.data == x.data);

    // 1x1: x=2, W=3, b=1 -> 7; with L = y, dL/dW = x = 2.
    ParamStore s1;
    DenseLayer one;
    one.build(s1, 1, 1);
    s1.params[one.w_off] = 3.0;
    s1.params[one.b_off] = 1.0;
    TensorBuf x1({1, 1});
    x1.data = {2.0};
    TensorBuf y1;
    dense_forward(s1, one, x1, y1);
    REQUIRE(y1.data[0] == 7.0);
    TensorBuf gy({1, 1});
    gy.data = {1.0};
    dense_backward(s1, one, x1, gy, nullptr);
    REQUIRE(s1.grads[one.w_off] == 2.0);
    REQUIRE(s1.grads[one.b_off] == 1.0);
}

TEST_CASE("dense gradients match finite differences", "[nn]") {
    Rng rng(41);
    ParamStore store;
    DenseLayer l;
    l.build(store, 4, 8);
    l.init(store, rng, 0.5);
    TensorBuf x = random_tensor(5, 4, rng);

    // Loss: sum of squares of outputs.
    auto loss = [&]() {
        TensorBuf y;
        dense_forward(store, l, x, y);
        double s = 0;
        for (double v : y.data) s += v * v;
        return 0.5 * s;
    };
    store.zero_grads();
    TensorBuf y;
    dense_forward(store, l, x, y);
    dense_backward(store, l, x, y, nullptr);  // dL/dy = y

    for (std::size_t i = 0; i < store.params.size(); ++i) {
        const double n = fd(store, i, loss);
        const double a = store.grads[i];
        REQUIRE(std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), 1e-4}) < 1e-4);
    }
}

TEST_CASE("pointwise conv equals dense applied per point", "[nn]") {
    Rng rng(42);
    ParamStore store;
    DenseLayer l;
    l.build(store, 3, 6);
    l.init(store, rng, 0.7);
    TensorBuf pts = random_tensor(10, 3, rng);

    TensorBuf out;
    pointwise_conv_forward(store, l, pts, out);
    for (int p = 0; p < 10; ++p) {
        TensorBuf single({1, 3});
        for (int j = 0; j < 3; ++j) single.data[j] = pts.at(p, j);
        TensorBuf y;
        dense_forward(store, l, single, y);
        for (int j = 0; j < 6; ++j) REQUIRE(std::fabs(out.at(p, j) - y.data[j]) < 1e-12);
    }
}

TEST_CASE("pointwise conv is equivariant under point permutation", "[nn]") {
    Rng rng(43);
    ParamStore store;
    DenseLayer l;
    l.build(store, 3, 5);
    l.init(store, rng, 0.7);
    TensorBuf pts = random_tensor(8, 3, rng);
    TensorBuf out;
    pointwise_conv_forward(store, l, pts, out);

    TensorBuf rev({8, 3});
    for (int p = 0; p < 8; ++p)
        for (int j = 0; j < 3; ++j) rev.at(p, j) = pts.at(7 - p, j);
    TensorBuf out_rev;
    pointwise_conv_forward(store, l, rev, out_rev);
    for (int p = 0; p < 8; ++p)
        for (int j = 0; j < 5; ++j) REQUIRE(out_rev.at(p, j) == out.at(7 - p, j));
}

TEST_CASE("batchnorm train mode on constant input returns the shift", "[nn]") {
    ParamStore store;
    BatchNorm bn;
    bn.build(store, 3);
    store.p(bn.beta_off)[0] = 0.7;
    store.p(bn.beta_off)[1] = -0.3;
    TensorBuf x({4, 3});
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) x.at(i, j) = 2.5;
    TensorBuf y;
    BnCache cache;
    batchnorm_forward_train(store, bn, x, y, cache);
    for (int i = 0; i < 4; ++i) {
        REQUIRE(y.at(i, 0) == Catch::Approx(0.7).margin(1e-12));
        REQUIRE(y.at(i, 1) == Catch::Approx(-0.3).margin(1e-12));
        REQUIRE(y.at(i, 2) == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("batchnorm with unit scale on standardized input is near identity", "[nn]") {
    ParamStore store;
    BatchNorm bn;
    bn.build(store, 1);
    TensorBuf x({4, 1});
    x.data = {-1.5, -0.5, 0.5, 1.5};  // mean 0, var 1.25
    const double istd = 1.0 / std::sqrt(1.25 + bn.eps);
    TensorBuf y;
    BnCache cache;
    batchnorm_forward_train(store, bn, x, y, cache);
    for (int i = 0; i < 4; ++i) REQUIRE(y.at(i, 0) == Catch::Approx(x.at(i, 0) * istd).margin(1e-12));
}

TEST_CASE("batchnorm rejects tiny train batches and updates running stats", "[nn]") {
    ParamStore store;
    BatchNorm bn;
    bn.build(store, 2);
    TensorBuf x({1, 2});
    TensorBuf y;
    BnCache cache;
    REQUIRE_THROWS_AS(batchnorm_forward_train(store, bn, x, y, cache), ConfigError);

    Rng rng(44);
    TensorBuf big = random_tensor(16, 2, rng);
    batchnorm_forward_train(store, bn, big, y, cache);
    // momentum 0.9 from (0, 1) toward batch stats
    REQUIRE(store.s(bn.rmean_off)[0] == Catch::Approx(0.1 * cache.mu[0]).margin(1e-12));
    REQUIRE(store.s(bn.rvar_off)[0] > 0.0);
}

TEST_CASE("batchnorm gradients match finite differences", "[nn]") {
    Rng rng(45);
    ParamStore store;
    BatchNorm bn;
    bn.build(store, 8);
    for (int j = 0; j < 8; ++j) {
        store.p(bn.gamma_off)[j] = rng.uniform(0.5, 1.5);
        store.p(bn.beta_off)[j] = rng.normal(0, 0.3);
    }
    TensorBuf x = random_tensor(16, 8, rng);
    // weighted-sum loss keeps gradients non-trivial
    TensorBuf wts = random_tensor(16, 8, rng);

    auto loss = [&]() {
        TensorBuf y;
        BnCache c;
        batchnorm_forward_train(store, bn, x, y, c, false);
        double s = 0;
        for (long i = 0; i < y.numel(); ++i) s += wts.data[i] * y.data[i];
        return s;
    };
    store.zero_grads();
    TensorBuf y;
    BnCache cache;
    batchnorm_forward_train(store, bn, x, y, cache, false);
    TensorBuf gx;
    batchnorm_backward(store, bn, cache, x, wts, gx);
    for (std::size_t i = 0; i < store.params.size(); ++i) {
        const double n = fd(store, i, loss);
        const double a = store.grads[i];
        REQUIRE(std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), 1e-4}) < 1e-4);
    }
}

TEST_CASE("maxpool basics and permutation invariance", "[nn]") {
    TensorBuf x({3, 2});
    x.data = {1, 5, 4, 2, 3, 3};
    TensorBuf out;
    std::vector<int> argmax;
    maxpool_points_forward(x, 3, out, argmax);
    REQUIRE(out.at(0, 0) == 4);
    REQUIRE(out.at(0, 1) == 5);
    REQUIRE(argmax[0] == 1);
    REQUIRE(argmax[1] == 0);

    // single point group is the identity
    TensorBuf single({1, 2});
    single.data = {7, -2};
    maxpool_points_forward(single, 1, out, argmax);
    REQUIRE(out.data == single.data);

    Rng rng(46);
    TensorBuf a = random_tensor(6, 3, rng);
    TensorBuf b({6, 3});
    for (int p = 0; p < 6; ++p)
        for (int j = 0; j < 3; ++j) b.at(p, j) = a.at(5 - p, j);
    TensorBuf oa, ob;
    std::vector<int> ia, ib;
    maxpool_points_forward(a, 6, oa, ia);
    maxpool_points_forward(b, 6, ob, ib);
    REQUIRE(oa.data == ob.data);
}

TEST_CASE("maxpool backward routes gradient to the argmax point", "[nn]") {
    Rng rng(47);
    TensorBuf x = random_tensor(8, 4, rng);
    TensorBuf out;
    std::vector<int> argmax;
    maxpool_points_forward(x, 8, out, argmax);
    TensorBuf gout({1, 4});
    gout.data = {1, 2, 3, 4};
    TensorBuf gx;
    maxpool_points_backward(gout, 8, argmax, gx);
    for (int p = 0; p < 8; ++p)
        for (int j = 0; j < 4; ++j)
            REQUIRE(gx.at(p, j) == (p == argmax[j] ? gout.data[j] : 0.0));

    // finite differences at non-tied points
    for (int j = 0; j < 4; ++j) {
        for (int p = 0; p < 8; ++p) {
            const double orig = x.at(p, j);
            const double h = 1e-6;
            auto pool_val = [&](double v) {
                x.at(p, j) = v;
                TensorBuf o;
                std::vector<int> am;
                maxpool_points_forward(x, 8, o, am);
                return o.data[j];
            };
            const double n = (pool_val(orig + h) - pool_val(orig - h)) / (2 * h);
            x.at(p, j) = orig;
            REQUIRE(n == Catch::Approx(gx.at(p, j) / gout.data[j]).margin(1e-9));
        }
    }
}

TEST_CASE("softmax cross-entropy values and gradient", "[nn]") {
    std::vector<double> logits(5, 0.3);
    std::vector<double> grad(5);
    const double loss = softmax_xent(logits, 2, grad);
    REQUIRE(loss == Catch::Approx(std::log(5.0)).margin(1e-12));

    // saturated case
    std::vector<double> hot = {0, 0, 20, 0};
    std::vector<double> g4(4);
    REQUIRE(softmax_xent(hot, 2, g4) < 1e-8);

    // gradient vs finite differences
    Rng rng(48);
    std::vector<double> l2 = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    std::vector<double> an(4);
    softmax_xent(l2, 1, an);
    for (int i = 0; i < 4; ++i) {
        const double h = 1e-6;
        std::vector<double> tmp = l2, scratch(4);
        tmp[i] += h;
        const double lp = softmax_xent(tmp, 1, scratch);
        tmp[i] -= 2 * h;
        const double lm = softmax_xent(tmp, 1, scratch);
        REQUIRE((lp - lm) / (2 * h) == Catch::Approx(an[i]).margin(1e-6));
    }
}

TEST_CASE("adam leaves params alone on zero gradient", "[nn]") {
    ParamStore store;
    store.add_params(4);
    store.params = {1, -2, 3, 0.5};
    AdamState state(4, 1e-3);
    store.zero_grads();
    adam_step(store, state);
    REQUIRE(store.params == std::vector<double>{1, -2, 3, 0.5});
}

TEST_CASE("adam first step magnitude is about lr", "[nn]") {
    ParamStore store;
    store.add_params(2);
    store.params = {0.0, 0.0};
    AdamState state(2, 0.01);
    store.grads = {0.5, -3.0};
    adam_step(store, state);
    // bias-corrected first step: lr * g / (|g| + eps) = lr * sign(g)
    REQUIRE(store.params[0] == Catch::Approx(-0.01).epsilon(1e-6));
    REQUIRE(store.params[1] == Catch::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("adam converges on a quadratic bowl", "[nn]") {
    ParamStore store;
    store.add_params(3);
    store.params = {4.0, -3.0, 2.0};
    const double target[3] = {1.0, 0.5, -2.0};
    AdamState state(3, 0.05);
    for (int step = 0; step < 5000; ++step) {
        for (int i = 0; i < 3; ++i) store.grads[i] = 2 * (store.params[i] - target[i]);
        adam_step(store, state);
    }
    for (int i = 0; i < 3; ++i) REQUIRE(std::fabs(store.params[i] - target[i]) < 1e-6);
}

TEST_CASE("grad_check harness agrees with itself on a dense relu stack", "[nn]") {
    Rng rng(49);
    ParamStore store;
    DenseLayer l1, l2;
    l1.build(store, 6, 10);
    l2.build(store, 10, 3);
    l1.init(store, rng, 0.5);
    l2.init(store, rng, 0.5);
    TensorBuf x = random_tensor(7, 6, rng);
    std::vector<int> targets = {0, 1, 2, 0, 1, 2, 0};

    auto forward = [&](TensorBuf* glogits) {
        TensorBuf h1, h2, logits;
        dense_forward(store, l1, x, h1);
        relu_forward(h1);
        dense_forward(store, l2, h1, logits);
        TensorBuf gl;
        const double loss = softmax_xent_batch(logits, targets, gl);
        if (glogits) {
            TensorBuf gh1;
            dense_backward(store, l2, h1, gl, &gh1);
            relu_backward(h1, gh1);
            dense_backward(store, l1, x, gh1, nullptr);
        }
        return loss;
    };
    auto loss_fn = [&]() { return forward(nullptr); };
    auto grad_fn = [&]() {
        TensorBuf g;
        forward(&g);
    };
    auto res = grad_check(store, loss_fn, grad_fn, 1e-5, 99, 50, 1.0);
    INFO("worst " << res.worst_index << " analytic " << res.analytic << " numeric "
                  << res.numeric);
    REQUIRE(res.max_rel_err < 1e-4);
    REQUIRE(res.sampled >= 50);

    // deterministic under the seed
    auto res2 = grad_check(store, loss_fn, grad_fn, 1e-5, 99, 50, 1.0);
    REQUIRE(res2.max_rel_err == res.max_rel_err);
    REQUIRE(res2.worst_index == res.worst_index);
}

TEST_CASE("rng determinism and derived streams", "[nn]") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
    REQUIRE(Rng::derive(1, 2, 3) == Rng::derive(1, 2, 3));
    REQUIRE(Rng::derive(1, 2, 3) != Rng::derive(1, 2, 4));
}
