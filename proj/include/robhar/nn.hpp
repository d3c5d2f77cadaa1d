// Minimal neural-network substrate with hand-written reverse-mode gradients:
// dense and per-point (kernel-1 convolution) layers, batch normalization,
// ReLU, max-pooling over the point axis, softmax cross-entropy, Adam, and a
// central-finite-difference gradient checker. Training math is 64-bit; the
// backward pass of every op is analytic and verified against finite
// differences in the test suite.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <vector>

#include "robhar/common.hpp"

namespace robhar {

// Row-major tensor of doubles.
struct TensorBuf {
    std::vector<int> shape;
    std::vector<double> data;

    TensorBuf() = default;
    explicit TensorBuf(std::vector<int> s) : shape(std::move(s)) {
        data.assign(numel(), 0.0);
    }

    long numel() const {
        long n = 1;
        for (int e : shape) n *= e;
        return n;
    }
    int rows() const { return shape.empty() ? 0 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(int i, int j) { return data[static_cast<long>(i) * cols() + j]; }
    double at(int i, int j) const { return data[static_cast<long>(i) * cols() + j]; }
};

inline void require_shape(const TensorBuf& t, int r, int c, const char* what) {
    if (t.rows() != r || t.cols() != c)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(r) + "x" +
                         std::to_string(c) + ", got " + std::to_string(t.rows()) + "x" +
                         std::to_string(t.cols()));
}

// Flat storage for all trainable parameters (with a parallel gradient
// buffer) and non-trainable state (batch-norm running statistics).
// Layers hold offsets into these buffers; the flat layout is what makes
// whole-network finite differencing and Adam trivial.
struct ParamStore {
    std::vector<double> params;
    std::vector<double> grads;
    std::vector<double> state;

    std::size_t add_params(std::size_t n) {
        std::size_t off = params.size();
        params.resize(off + n, 0.0);
        grads.resize(params.size(), 0.0);
        return off;
    }
    std::size_t add_state(std::size_t n) {
        std::size_t off = state.size();
        state.resize(off + n, 0.0);
        return off;
    }
    void zero_grads() { std::fill(grads.begin(), grads.end(), 0.0); }

    double* p(std::size_t off) { return params.data() + off; }
    const double* p(std::size_t off) const { return params.data() + off; }
    double* g(std::size_t off) { return grads.data() + off; }
    double* s(std::size_t off) { return state.data() + off; }
    const double* s(std::size_t off) const { return state.data() + off; }
};

// ---- matrix kernels (row-major, accumulate into C) ----

// C[M,N] += A[M,K] * B[K,N]
inline void mm_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<long>(i) * k;
        double* ci = c + static_cast<long>(i) * n;
        for (int kk = 0; kk < k; ++kk) {
            const double av = ai[kk];
            const double* bk = b + static_cast<long>(kk) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
        }
    }
}

// C[K,N] += A[M,K]^T * B[M,N]
inline void mtm_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<long>(i) * k;
        const double* bi = b + static_cast<long>(i) * n;
        for (int kk = 0; kk < k; ++kk) {
            const double av = ai[kk];
            double* ck = c + static_cast<long>(kk) * n;
            for (int j = 0; j < n; ++j) ck[j] += av * bi[j];
        }
    }
}

// C[M,K] += A[M,N] * B[K,N]^T
inline void mmt_acc(const double* a, const double* b, double* c, int m, int n, int k) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<long>(i) * n;
        double* ci = c + static_cast<long>(i) * k;
        for (int kk = 0; kk < k; ++kk) {
            const double* bk = b + static_cast<long>(kk) * n;
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += ai[j] * bk[j];
            ci[kk] += s;
        }
    }
}

// ---- dense / per-point layers ----

struct DenseLayer {
    std::size_t w_off = 0, b_off = 0;
    int in_dim = 0, out_dim = 0;

    void build(ParamStore& store, int in, int out) {
        in_dim = in;
        out_dim = out;
        w_off = store.add_params(static_cast<std::size_t>(in) * out);
        b_off = store.add_params(out);
    }
    std::size_t param_count() const { return static_cast<std::size_t>(in_dim) * out_dim + out_dim; }

    void init(ParamStore& store, Rng& rng, double w_scale) {
        double* w = store.p(w_off);
        for (int i = 0; i < in_dim * out_dim; ++i) w[i] = rng.normal(0.0, w_scale);
        double* b = store.p(b_off);
        for (int i = 0; i < out_dim; ++i) b[i] = 0.0;
    }
};

// y[R,out] = x[R,in] * W + b
inline void dense_forward(const ParamStore& store, const DenseLayer& layer, const TensorBuf& x,
                          TensorBuf& y) {
    if (x.cols() != layer.in_dim) throw ShapeError("dense_forward: input width mismatch");
    const int r = x.rows();
    y.shape = {r, layer.out_dim};
    y.data.assign(static_cast<long>(r) * layer.out_dim, 0.0);
    const double* b = store.p(layer.b_off);
    for (int i = 0; i < r; ++i)
        std::memcpy(y.data.data() + static_cast<long>(i) * layer.out_dim, b,
                    sizeof(double) * layer.out_dim);
    mm_acc(x.data.data(), store.p(layer.w_off), y.data.data(), r, layer.in_dim, layer.out_dim);
    require_finite(y.data, "dense output");
}

// Accumulates dW, db into the store and writes dL/dx into grad_x (if non-null).
inline void dense_backward(ParamStore& store, const DenseLayer& layer, const TensorBuf& x_cache,
                           const TensorBuf& grad_y, TensorBuf* grad_x) {
    if (grad_y.cols() != layer.out_dim) throw ShapeError("dense_backward: grad width mismatch");
    const int r = grad_y.rows();
    mtm_acc(x_cache.data.data(), grad_y.data.data(), store.g(layer.w_off), r, layer.in_dim,
            layer.out_dim);
    double* db = store.g(layer.b_off);
    for (int i = 0; i < r; ++i) {
        const double* gi = grad_y.data.data() + static_cast<long>(i) * layer.out_dim;
        for (int j = 0; j < layer.out_dim; ++j) db[j] += gi[j];
    }
    if (grad_x) {
        grad_x->shape = {r, layer.in_dim};
        grad_x->data.assign(static_cast<long>(r) * layer.in_dim, 0.0);
        mmt_acc(grad_y.data.data(), store.p(layer.w_off), grad_x->data.data(), r, layer.out_dim,
                layer.in_dim);
    }
}

// Kernel-1 convolution over the point axis: the same weights applied to
// every point independently. Points are rows, so this is a dense layer
// over [n_points, channels].
inline void pointwise_conv_forward(const ParamStore& store, const DenseLayer& layer,
                                   const TensorBuf& points, TensorBuf& out) {
    dense_forward(store, layer, points, out);
}

inline void pointwise_conv_backward(ParamStore& store, const DenseLayer& layer,
                                    const TensorBuf& points_cache, const TensorBuf& grad_out,
                                    TensorBuf* grad_points) {
    dense_backward(store, layer, points_cache, grad_out, grad_points);
}

// ---- ReLU ----

inline void relu_forward(TensorBuf& x) {
    for (double& v : x.data) v = v > 0.0 ? v : 0.0;
}

// post is the ReLU output (zero exactly where the unit was clipped).
inline void relu_backward(const TensorBuf& post, TensorBuf& grad) {
    for (long i = 0; i < grad.numel(); ++i)
        if (post.data[i] <= 0.0) grad.data[i] = 0.0;
}

// ---- batch normalization ----

struct BatchNorm {
    std::size_t gamma_off = 0, beta_off = 0;  // trainable
    std::size_t rmean_off = 0, rvar_off = 0;  // running stats (state)
    int channels = 0;
    double momentum = 0.9;
    double eps = 1e-5;

    void build(ParamStore& store, int c) {
        channels = c;
        gamma_off = store.add_params(c);
        beta_off = store.add_params(c);
        rmean_off = store.add_state(c);
        rvar_off = store.add_state(c);
        double* g = store.p(gamma_off);
        for (int i = 0; i < c; ++i) g[i] = 1.0;
        double* rv = store.s(rvar_off);
        for (int i = 0; i < c; ++i) rv[i] = 1.0;
    }
    std::size_t param_count() const { return 2 * static_cast<std::size_t>(channels); }
};

struct BnCache {
    std::vector<double> mu, istd;  // per channel
};

// Train mode: normalize by batch statistics (biased variance) and update the
// running stats with the configured momentum. Requires >= 2 rows.
inline void batchnorm_forward_train(ParamStore& store, const BatchNorm& bn, const TensorBuf& x,
                                    TensorBuf& y, BnCache& cache, bool update_running = true) {
    const int r = x.rows();
    const int c = x.cols();
    if (c != bn.channels) throw ShapeError("batchnorm: channel mismatch");
    if (r < 2) throw ConfigError("batchnorm train mode needs a batch of >= 2");

    cache.mu.assign(c, 0.0);
    cache.istd.assign(c, 0.0);
    std::vector<double> var(c, 0.0);
    for (int i = 0; i < r; ++i) {
        const double* xi = x.data.data() + static_cast<long>(i) * c;
        for (int j = 0; j < c; ++j) cache.mu[j] += xi[j];
    }
    for (int j = 0; j < c; ++j) cache.mu[j] /= r;
    for (int i = 0; i < r; ++i) {
        const double* xi = x.data.data() + static_cast<long>(i) * c;
        for (int j = 0; j < c; ++j) {
            const double d = xi[j] - cache.mu[j];
            var[j] += d * d;
        }
    }
    for (int j = 0; j < c; ++j) {
        var[j] /= r;
        cache.istd[j] = 1.0 / std::sqrt(var[j] + bn.eps);
    }

    y.shape = {r, c};
    y.data.resize(static_cast<long>(r) * c);
    const double* gamma = store.p(bn.gamma_off);
    const double* beta = store.p(bn.beta_off);
    for (int i = 0; i < r; ++i) {
        const double* xi = x.data.data() + static_cast<long>(i) * c;
        double* yi = y.data.data() + static_cast<long>(i) * c;
        for (int j = 0; j < c; ++j)
            yi[j] = gamma[j] * (xi[j] - cache.mu[j]) * cache.istd[j] + beta[j];
    }

    if (update_running) {
        double* rm = store.s(bn.rmean_off);
        double* rv = store.s(bn.rvar_off);
        for (int j = 0; j < c; ++j) {
            rm[j] = bn.momentum * rm[j] + (1.0 - bn.momentum) * cache.mu[j];
            rv[j] = bn.momentum * rv[j] + (1.0 - bn.momentum) * var[j];
        }
    }
    require_finite(y.data, "batchnorm output");
}

inline void batchnorm_forward_infer(const ParamStore& store, const BatchNorm& bn,
                                    const TensorBuf& x, TensorBuf& y) {
    const int r = x.rows();
    const int c = x.cols();
    if (c != bn.channels) throw ShapeError("batchnorm: channel mismatch");
    y.shape = {r, c};
    y.data.resize(static_cast<long>(r) * c);
    const double* gamma = store.p(bn.gamma_off);
    const double* beta = store.p(bn.beta_off);
    const double* rm = store.s(bn.rmean_off);
    const double* rv = store.s(bn.rvar_off);
    std::vector<double> scale(c), shift(c);
    for (int j = 0; j < c; ++j) {
        scale[j] = gamma[j] / std::sqrt(rv[j] + bn.eps);
        shift[j] = beta[j] - scale[j] * rm[j];
    }
    for (int i = 0; i < r; ++i) {
        const double* xi = x.data.data() + static_cast<long>(i) * c;
        double* yi = y.data.data() + static_cast<long>(i) * c;
        for (int j = 0; j < c; ++j) yi[j] = scale[j] * xi[j] + shift[j];
    }
}

// Backward through the batch statistics. x is the pre-normalization input
// seen by the train-mode forward that produced the cache.
inline void batchnorm_backward(ParamStore& store, const BatchNorm& bn, const BnCache& cache,
                               const TensorBuf& x, const TensorBuf& grad_y, TensorBuf& grad_x) {
    const int r = x.rows();
    const int c = x.cols();
    const double* gamma = store.p(bn.gamma_off);
    double* dgamma = store.g(bn.gamma_off);
    double* dbeta = store.g(bn.beta_off);

    std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
    for (int i = 0; i < r; ++i) {
        const double* xi = x.data.data() + static_cast<long>(i) * c;
        const double* gi = grad_y.data.data() + static_cast<long>(i) * c;
        for (int j = 0; j < c; ++j) {
            const double xhat = (xi[j] - cache.mu[j]) * cache.istd[j];
            sum_dy[j] += gi[j];
            sum_dy_xhat[j] += gi[j] * xhat;
        }
    }
    for (int j = 0; j < c; ++j) {
        dgamma[j] += sum_dy_xhat[j];
        dbeta[j] += sum_dy[j];
    }

    grad_x.shape = {r, c};
    grad_x.data.resize(static_cast<long>(r) * c);
    for (int i = 0; i < r; ++i) {
        const double* xi = x.data.data() + static_cast<long>(i) * c;
        const double* gi = grad_y.data.data() + static_cast<long>(i) * c;
        double* oi = grad_x.data.data() + static_cast<long>(i) * c;
        for (int j = 0; j < c; ++j) {
            const double xhat = (xi[j] - cache.mu[j]) * cache.istd[j];
            oi[j] = gamma[j] * cache.istd[j] / r *
                    (r * gi[j] - sum_dy[j] - xhat * sum_dy_xhat[j]);
        }
    }
}

// ---- max pooling over the point axis ----

// x is [groups * group_len, C]; out is [groups, C] with the per-channel max
// over each group of rows. Ties break to the lowest row index.
inline void maxpool_points_forward(const TensorBuf& x, int group_len, TensorBuf& out,
                                   std::vector<int>& argmax) {
    const int c = x.cols();
    if (group_len < 1 || x.rows() % group_len != 0)
        throw ShapeError("maxpool: rows not divisible by group length");
    const int groups = x.rows() / group_len;
    out.shape = {groups, c};
    out.data.resize(static_cast<long>(groups) * c);
    argmax.assign(static_cast<long>(groups) * c, 0);
    for (int g = 0; g < groups; ++g) {
        const double* base = x.data.data() + static_cast<long>(g) * group_len * c;
        double* og = out.data.data() + static_cast<long>(g) * c;
        int* ag = argmax.data() + static_cast<long>(g) * c;
        for (int j = 0; j < c; ++j) {
            og[j] = base[j];
            ag[j] = 0;
        }
        for (int p = 1; p < group_len; ++p) {
            const double* row = base + static_cast<long>(p) * c;
            for (int j = 0; j < c; ++j) {
                if (row[j] > og[j]) {
                    og[j] = row[j];
                    ag[j] = p;
                }
            }
        }
    }
}

// Routes each channel's gradient to the argmax point only.
inline void maxpool_points_backward(const TensorBuf& grad_out, int group_len,
                                    const std::vector<int>& argmax, TensorBuf& grad_x) {
    const int groups = grad_out.rows();
    const int c = grad_out.cols();
    grad_x.shape = {groups * group_len, c};
    grad_x.data.assign(static_cast<long>(groups) * group_len * c, 0.0);
    for (int g = 0; g < groups; ++g) {
        const double* gi = grad_out.data.data() + static_cast<long>(g) * c;
        const int* ag = argmax.data() + static_cast<long>(g) * c;
        double* base = grad_x.data.data() + static_cast<long>(g) * group_len * c;
        for (int j = 0; j < c; ++j) base[static_cast<long>(ag[j]) * c + j] += gi[j];
    }
}

// ---- softmax / cross-entropy ----

inline std::vector<double> softmax(std::span<const double> logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

// Single sample: loss = -log softmax(logits)[target], grad = softmax - onehot.
inline double softmax_xent(std::span<const double> logits, int target,
                           std::span<double> grad_logits) {
    const auto p = softmax(logits);
    for (std::size_t i = 0; i < p.size(); ++i) grad_logits[i] = p[i];
    grad_logits[target] -= 1.0;
    return -std::log(std::max(p[target], 1e-300));
}

// Batch mean loss; grad rows are scaled by 1/B so backprop of the mean is
// a single pass.
inline double softmax_xent_batch(const TensorBuf& logits, std::span<const int> targets,
                                 TensorBuf& grad_logits) {
    const int b = logits.rows();
    const int k = logits.cols();
    if (static_cast<int>(targets.size()) != b)
        throw ShapeError("softmax_xent_batch: target count mismatch");
    grad_logits.shape = {b, k};
    grad_logits.data.resize(static_cast<long>(b) * k);
    double loss = 0.0;
    std::vector<double> row_grad(k);
    for (int i = 0; i < b; ++i) {
        std::span<const double> row(logits.data.data() + static_cast<long>(i) * k, k);
        loss += softmax_xent(row, targets[i], row_grad);
        for (int j = 0; j < k; ++j)
            grad_logits.data[static_cast<long>(i) * k + j] = row_grad[j] / b;
    }
    return loss / b;
}

// ---- Adam ----

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n_params, double learning_rate = 1e-3)
        : m(n_params, 0.0), v(n_params, 0.0), lr(learning_rate) {}
};

inline void adam_step(ParamStore& store, AdamState& state) {
    if (state.m.size() != store.params.size()) throw ShapeError("adam: state size mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < store.params.size(); ++i) {
        const double g = store.grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        store.params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    require_finite(store.params, "adam parameters");
}

// ---- gradient checking ----

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    double analytic = 0.0, numeric = 0.0;
    int sampled = 0;
};

// Central finite differences over a random sample of parameters
// (max(min_samples, fraction * n), capped at n). loss_fn must evaluate the
// loss at the current store.params without mutating persistent state;
// grad_fn must populate store.grads for the same input.
template <typename LossFn, typename GradFn>
GradCheckResult grad_check(ParamStore& store, LossFn&& loss_fn, GradFn&& grad_fn, double h,
                           uint64_t seed, int min_samples = 50, double fraction = 0.01) {
    store.zero_grads();
    grad_fn();
    std::vector<double> analytic = store.grads;

    const std::size_t n = store.params.size();
    std::size_t want = std::max<std::size_t>(min_samples, static_cast<std::size_t>(fraction * n));
    want = std::min(want, n);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = 0; i < want; ++i)
        std::swap(idx[i], idx[i + rng.uniform_int(static_cast<int>(n - i))]);

    GradCheckResult res;
    res.sampled = static_cast<int>(want);
    for (std::size_t s = 0; s < want; ++s) {
        const std::size_t i = idx[s];
        const double orig = store.params[i];
        store.params[i] = orig + h;
        const double lp = loss_fn();
        store.params[i] = orig - h;
        const double lm = loss_fn();
        store.params[i] = orig;
        const double numeric = (lp - lm) / (2.0 * h);
        const double a = analytic[i];
        const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-4});
        const double rel = std::fabs(a - numeric) / denom;
        if (rel > res.max_rel_err) {
            res.max_rel_err = rel;
            res.worst_index = i;
            res.analytic = a;
            res.numeric = numeric;
        }
    }
    store.grads = analytic;
    return res;
}

}  // namespace robhar
