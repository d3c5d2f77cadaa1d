// Window-level classification metrics (confusion matrix, micro accuracy,
// macro precision/recall and the F1 computed from them) plus event-sequence
// edit distance for continuous evaluation.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "robhar/common.hpp"

namespace robhar {

struct MetricsReport {
    int k = 0;
    std::vector<long> confusion;  // k*k counts, row = truth, col = prediction
    long total = 0;
    double micro_accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::optional<long> event_edit_distance;
    std::optional<double> edit_rate;  // distance / max(truth events, 1)

    long at(int truth, int pred) const { return confusion[static_cast<std::size_t>(truth) * k + pred]; }
};

// Folds blank labels in as class k, for scoring continuous ground truth
// where transitions are their own class.
inline std::vector<int> map_blank_labels(std::span<const int> labels, int k) {
    std::vector<int> out(labels.begin(), labels.end());
    for (int& l : out)
        if (l == kBlankLabel) l = k;
    return out;
}

// Micro accuracy is the raw correct fraction. Macro precision/recall are
// unweighted means over classes present in the truth; a truth class never
// predicted contributes precision 0. F1 = 2PR/(P+R) from the macro means.
inline MetricsReport compute_metrics(std::span<const int> preds, std::span<const int> truths,
                                     int k) {
    if (preds.size() != truths.size()) throw DataError("compute_metrics: length mismatch");
    if (preds.empty()) throw DataError("compute_metrics: empty input");
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] < 0 || preds[i] >= k || truths[i] < 0 || truths[i] >= k)
            throw DataError("compute_metrics: label out of range");

    MetricsReport r;
    r.k = k;
    r.confusion.assign(static_cast<std::size_t>(k) * k, 0);
    r.total = static_cast<long>(preds.size());
    long correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        r.confusion[static_cast<std::size_t>(truths[i]) * k + preds[i]]++;
        if (preds[i] == truths[i]) ++correct;
    }
    r.micro_accuracy = static_cast<double>(correct) / r.total;

    double p_sum = 0.0, r_sum = 0.0;
    int present = 0;
    for (int c = 0; c < k; ++c) {
        long truth_count = 0, pred_count = 0;
        for (int j = 0; j < k; ++j) {
            truth_count += r.at(c, j);
            pred_count += r.at(j, c);
        }
        if (truth_count == 0) continue;  // absent classes stay out of the macro mean
        ++present;
        const long tp = r.at(c, c);
        p_sum += pred_count > 0 ? static_cast<double>(tp) / pred_count : 0.0;
        r_sum += static_cast<double>(tp) / truth_count;
    }
    if (present > 0) {
        r.macro_precision = p_sum / present;
        r.macro_recall = r_sum / present;
        const double pr = r.macro_precision + r.macro_recall;
        r.macro_f1 = pr > 0.0 ? 2.0 * r.macro_precision * r.macro_recall / pr : 0.0;
    }
    return r;
}

// Unit-cost Levenshtein distance over event label sequences.
inline long event_edit_distance(std::span<const int> pred, std::span<const int> truth) {
    const std::size_t n = pred.size();
    const std::size_t m = truth.size();
    std::vector<long> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<long>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<long>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const long sub = prev[j - 1] + (pred[i - 1] == truth[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

}  // namespace robhar
