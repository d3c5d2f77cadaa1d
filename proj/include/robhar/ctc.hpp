// Blank gating and best-path collapse. Low-confidence windows become the
// blank placeholder; maximal runs of identical non-blank labels merge into
// one event each, blanks are dropped, and a blank between two runs of the
// same label keeps them separate events.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "robhar/common.hpp"

namespace robhar {

// One gated window-level prediction.
struct LabeledStep {
    int label = kBlankLabel;  // class id or kBlankLabel
    double t_start = 0.0, t_end = 0.0;
    double confidence = 0.0;
};

// A collapsed activity occurrence.
struct Event {
    int label = kNoLabel;
    double start = 0.0, end = 0.0;
    double confidence = 0.0;  // mean step confidence
};

// Argmax class if its posterior mass reaches tau, else blank. Ties break
// toward the lower class id.
inline int blank_gate(std::span<const double> posterior, double tau) {
    if (!(tau > 0.0) || tau > 1.0) throw ConfigError("blank_gate: tau must be in (0, 1]");
    if (posterior.empty()) throw ShapeError("blank_gate: empty posterior");
    int best = 0;
    for (int i = 1; i < static_cast<int>(posterior.size()); ++i)
        if (posterior[i] > posterior[best]) best = i;
    return posterior[best] >= tau ? best : kBlankLabel;
}

// Incremental collapse. push() emits an event exactly when a non-blank run
// ends; flush() emits the trailing open run at end of stream.
class StreamingCollapse {
public:
    std::optional<Event> push(const LabeledStep& step) {
        std::optional<Event> emitted;
        if (step.label == kBlankLabel) {
            emitted = take();
        } else if (open_ && step.label == run_.label) {
            run_.end = step.t_end;
            conf_sum_ += step.confidence;
            conf_n_ += 1;
        } else {
            emitted = take();
            open_ = true;
            run_.label = step.label;
            run_.start = step.t_start;
            run_.end = step.t_end;
            conf_sum_ = step.confidence;
            conf_n_ = 1;
        }
        return emitted;
    }

    std::optional<Event> flush() { return take(); }

private:
    std::optional<Event> take() {
        if (!open_) return std::nullopt;
        open_ = false;
        Event e = run_;
        e.confidence = conf_sum_ / conf_n_;
        return e;
    }

    bool open_ = false;
    Event run_;
    double conf_sum_ = 0.0;
    int conf_n_ = 0;
};

// Batch collapse by run scanning (kept independent of StreamingCollapse so
// the two paths check each other).
inline std::vector<Event> collapse_events(std::span<const LabeledStep> steps) {
    std::vector<Event> out;
    std::size_t i = 0;
    while (i < steps.size()) {
        if (steps[i].label == kBlankLabel) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double conf = 0.0;
        while (j < steps.size() && steps[j].label == steps[i].label) {
            conf += steps[j].confidence;
            ++j;
        }
        out.push_back({steps[i].label, steps[i].t_start, steps[j - 1].t_end,
                       conf / static_cast<double>(j - i)});
        i = j;
    }
    return out;
}

// Event label sequence only.
inline std::vector<int> collapse(std::span<const LabeledStep> steps) {
    std::vector<int> out;
    for (const auto& e : collapse_events(steps)) out.push_back(e.label);
    return out;
}

}  // namespace robhar
