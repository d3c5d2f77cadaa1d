// Transition optimization over the window-level prediction stream. The
// hidden states are the true activities; observations are the classifier's
// predicted class ids. Naming follows the radar-HAR convention used by the
// rest of this project: A is the emission matrix P(predicted x | true y)
// and B is the transition matrix P(state j at t | state i at t-1).
// Forward filtering is the causal online mode; Viterbi decodes offline.

#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "robhar/common.hpp"

namespace robhar {

struct HMMParams {
    int k = 0;
    std::vector<double> pi;  // K start probabilities
    std::vector<double> a;   // K x K emission, row = true state
    std::vector<double> b;   // K x K transition, row = previous state

    double emission(int true_state, int pred) const { return a[static_cast<std::size_t>(true_state) * k + pred]; }
    double transition(int from, int to) const { return b[static_cast<std::size_t>(from) * k + to]; }

    void validate() const {
        if (k < 1 || static_cast<int>(pi.size()) != k ||
            static_cast<int>(a.size()) != k * k || static_cast<int>(b.size()) != k * k)
            throw ShapeError("HMM parameter sizes inconsistent with K");
        auto check_row = [&](const double* row, const char* what) {
            double sum = 0.0;
            for (int j = 0; j < k; ++j) {
                if (!(row[j] > 0.0)) throw DataError(std::string(what) + ": non-positive entry");
                sum += row[j];
            }
            if (std::fabs(sum - 1.0) > 1e-12)
                throw DataError(std::string(what) + ": row does not sum to 1");
        };
        check_row(pi.data(), "pi");
        for (int i = 0; i < k; ++i) check_row(a.data() + static_cast<std::size_t>(i) * k, "A row");
        for (int i = 0; i < k; ++i) check_row(b.data() + static_cast<std::size_t>(i) * k, "B row");
    }
};

// Fits pi from truth unigram frequencies, A from (truth -> prediction)
// confusion counts and B from truth bigram counts, all Laplace-smoothed
// with pseudo-count alpha and row-normalized.
inline HMMParams hmm_fit(std::span<const int> preds, std::span<const int> truths, int k,
                         double alpha = 1.0) {
    if (preds.size() != truths.size()) throw DataError("hmm_fit: sequence length mismatch");
    if (preds.size() < 2) throw DataError("hmm_fit: need at least 2 observations");
    if (alpha <= 0.0) throw ConfigError("hmm_fit: alpha must be > 0");
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] < 0 || preds[i] >= k || truths[i] < 0 || truths[i] >= k)
            throw DataError("hmm_fit: label out of range");

    HMMParams p;
    p.k = k;
    p.pi.assign(k, alpha);
    p.a.assign(static_cast<std::size_t>(k) * k, alpha);
    p.b.assign(static_cast<std::size_t>(k) * k, alpha);

    for (std::size_t i = 0; i < truths.size(); ++i) {
        p.pi[truths[i]] += 1.0;
        p.a[static_cast<std::size_t>(truths[i]) * k + preds[i]] += 1.0;
        if (i + 1 < truths.size())
            p.b[static_cast<std::size_t>(truths[i]) * k + truths[i + 1]] += 1.0;
    }

    auto normalize = [k](std::span<double> row) {
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += row[j];
        for (int j = 0; j < k; ++j) row[j] /= sum;
    };
    normalize(p.pi);
    for (int i = 0; i < k; ++i) {
        normalize(std::span<double>(p.a.data() + static_cast<std::size_t>(i) * k, k));
        normalize(std::span<double>(p.b.data() + static_cast<std::size_t>(i) * k, k));
    }
    return p;
}

// One step of the causal posterior recursion. Pass nullptr for the first
// observation of a stream.
inline std::vector<double> forward_filter(const HMMParams& p, int obs,
                                          const std::vector<double>* alpha_prev) {
    if (obs < 0 || obs >= p.k) throw DataError("forward_filter: observation out of range");
    std::vector<double> post(p.k, 0.0);
    if (!alpha_prev) {
        for (int j = 0; j < p.k; ++j) post[j] = p.pi[j] * p.emission(j, obs);
    } else {
        for (int j = 0; j < p.k; ++j) {
            double mass = 0.0;
            for (int i = 0; i < p.k; ++i) mass += (*alpha_prev)[i] * p.transition(i, j);
            post[j] = p.emission(j, obs) * mass;
        }
    }
    double sum = 0.0;
    for (double v : post) sum += v;
    if (!(sum > 0.0)) throw Error("forward_filter: zero posterior mass");
    for (double& v : post) v /= sum;
    return post;
}

struct ViterbiResult {
    std::vector<int> path;
    double log_prob = 0.0;
};

// Maximum-probability state path in log space. Ties break toward the lower
// class id at every step.
inline ViterbiResult viterbi_with_logp(const HMMParams& p, std::span<const int> obs) {
    ViterbiResult res;
    if (obs.empty()) return res;
    const int k = p.k;
    const int t_len = static_cast<int>(obs.size());
    std::vector<double> delta(k), next(k);
    std::vector<int> back(static_cast<std::size_t>(t_len) * k, 0);

    for (int j = 0; j < k; ++j) delta[j] = std::log(p.pi[j]) + std::log(p.emission(j, obs[0]));
    for (int t = 1; t < t_len; ++t) {
        for (int j = 0; j < k; ++j) {
            double best = -std::numeric_limits<double>::infinity();
            int best_i = 0;
            for (int i = 0; i < k; ++i) {
                const double cand = delta[i] + std::log(p.transition(i, j));
                if (cand > best) {
                    best = cand;
                    best_i = i;
                }
            }
            next[j] = best + std::log(p.emission(j, obs[t]));
            back[static_cast<std::size_t>(t) * k + j] = best_i;
        }
        delta = next;
    }

    int best_j = 0;
    for (int j = 1; j < k; ++j)
        if (delta[j] > delta[best_j]) best_j = j;
    res.log_prob = delta[best_j];
    res.path.assign(t_len, 0);
    res.path[t_len - 1] = best_j;
    for (int t = t_len - 1; t > 0; --t)
        res.path[t - 1] = back[static_cast<std::size_t>(t) * k + res.path[t]];
    return res;
}

inline std::vector<int> viterbi(const HMMParams& p, std::span<const int> obs) {
    return viterbi_with_logp(p, obs).path;
}

}  // namespace robhar
