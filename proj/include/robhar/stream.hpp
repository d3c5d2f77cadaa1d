// Real-time continuous pipeline: frames arrive in timestamp order, are
// aligned and embedded once each (embeddings are cached across overlapping
// windows), and every stride frames the buffered window is classified,
// HMM-filtered, blank-gated and folded into the streaming collapse. The
// offline run_batch mode replays the same stages over a whole recording
// and scores raw / HMM / HMM+CTC-gated predictions against ground truth.

#pragma once

#include <deque>

#include "robhar/ctc.hpp"
#include "robhar/hmm.hpp"
#include "robhar/train.hpp"

namespace robhar {

struct PipelineConfig {
    double rate_hz = 30.0;
    double window_seconds = 2.0;
    double stride_seconds = 1.0 / 3.0;
    int alignment_size = 25;
    double tau = 0.5;
    uint64_t seed = 0;

    int window_frames() const { return seconds_to_frames(window_seconds, rate_hz, "window"); }
    int stride_frames() const {
        const int s = seconds_to_frames(stride_seconds, rate_hz, "stride");
        if (s > window_frames()) throw ConfigError("stride must be <= window");
        return s;
    }
};

inline uint64_t stream_align_seed(uint64_t seed) {
    return Rng::derive(seed, seed_stream::align, 0x57AE);
}

enum class StepStatus { warming_up, active, blank };

struct StepResult {
    std::vector<Event> events;       // events completed by this frame
    StepStatus status = StepStatus::warming_up;
    bool hopped = false;             // a classification ran on this frame
    int label = kNoLabel;            // gated label at the latest hop
    std::vector<double> posterior;   // filtered posterior at the latest hop
};

class Pipeline {
public:
    Pipeline(HarModel& model, const HMMParams* hmm, const PipelineConfig& cfg)
        : model_(model), cfg_(cfg), rng_(stream_align_seed(cfg.seed)) {
        if (hmm) hmm_ = *hmm;
        window_frames_ = cfg_.window_frames();
        stride_frames_ = cfg_.stride_frames();
        if (cfg_.alignment_size != model_.cfg.lpn.as)
            throw ConfigError("pipeline alignment size does not match the model");
    }

    StepResult process_frame(const Frame& frame) {
        if (have_last_ts_ && frame.timestamp <= last_ts_)
            throw DataError("out-of-order frame timestamp in stream");
        last_ts_ = frame.timestamp;
        have_last_ts_ = true;

        // Empty frames get a sentinel point at the previous frame's centroid
        // so the stream never stalls.
        Frame use;
        const Frame* src = &frame;
        if (frame.points.empty()) {
            use = frame;
            use.points.push_back(last_centroid_);
            src = &use;
        } else {
            Point c{0, 0, 0};
            for (const auto& p : frame.points) {
                c.x += p.x;
                c.y += p.y;
                c.z += p.z;
            }
            const double n = static_cast<double>(frame.points.size());
            last_centroid_ = {c.x / n, c.y / n, c.z / n};
        }

        AlignedFrame aligned = align_frame(*src, cfg_.alignment_size, rng_);
        const auto emb = embed_frame(model_.store, model_.lpn, aligned);
        ring_.push_back({frame.timestamp, emb});
        if (static_cast<int>(ring_.size()) > window_frames_) ring_.pop_front();
        ++frames_seen_;

        StepResult res;
        res.status = last_status_;
        if (frames_seen_ < window_frames_) {
            res.status = last_status_ = StepStatus::warming_up;
            return res;
        }
        if ((frames_seen_ - window_frames_) % stride_frames_ != 0) return res;

        // hop: classify the buffered window
        const int d = model_.cfg.lpn.embed_dim();
        TensorBuf win({window_frames_, d});
        for (int t = 0; t < window_frames_; ++t)
            std::memcpy(win.data.data() + static_cast<long>(t) * d, ring_[t].emb.data(),
                        sizeof(double) * d);
        const auto raw = model_.classify_embeddings(win);
        const int obs = static_cast<int>(std::max_element(raw.begin(), raw.end()) - raw.begin());

        std::vector<double> post;
        if (hmm_) {
            alpha_ = forward_filter(*hmm_, obs, have_alpha_ ? &alpha_ : nullptr);
            have_alpha_ = true;
            post = alpha_;
        } else {
            post = raw;
        }
        const int gated = blank_gate(post, cfg_.tau);

        LabeledStep step;
        step.label = gated;
        step.t_start = ring_.front().ts;
        step.t_end = ring_.back().ts + 1.0 / cfg_.rate_hz;
        step.confidence = *std::max_element(post.begin(), post.end());
        if (auto e = collapse_.push(step)) res.events.push_back(*e);

        res.hopped = true;
        res.label = gated;
        res.posterior = std::move(post);
        res.status = last_status_ = gated == kBlankLabel ? StepStatus::blank : StepStatus::active;
        ++hops_;
        return res;
    }

    std::vector<Event> flush() {
        std::vector<Event> out;
        if (auto e = collapse_.flush()) out.push_back(*e);
        return out;
    }

    long hops() const { return hops_; }
    std::size_t buffered_frames() const { return ring_.size(); }
    std::size_t state_floats() const {
        return ring_.size() * (model_.cfg.lpn.embed_dim() + 1) + alpha_.size();
    }

private:
    struct Entry {
        double ts;
        std::vector<double> emb;
    };

    HarModel& model_;
    std::optional<HMMParams> hmm_;
    PipelineConfig cfg_;
    Rng rng_;
    int window_frames_ = 0, stride_frames_ = 0;
    std::deque<Entry> ring_;
    std::vector<double> alpha_;
    bool have_alpha_ = false;
    StreamingCollapse collapse_;
    long frames_seen_ = 0;
    long hops_ = 0;
    double last_ts_ = 0.0;
    bool have_last_ts_ = false;
    Point last_centroid_{0.0, 0.0, 0.0};
    StepStatus last_status_ = StepStatus::warming_up;
};

struct BatchResult {
    std::vector<Event> events;
    std::vector<int> raw_preds, hmm_preds, gated_preds;  // per window; gated may be blank
    std::vector<int> truth;                              // per window, may be blank
    std::vector<std::pair<double, double>> spans;        // window time spans
    std::vector<int> truth_event_labels;
    MetricsReport raw_metrics, hmm_metrics, gated_metrics;
    long edit_distance = 0;
};

// Offline replay over one labeled continuous recording. use_viterbi decodes
// the whole observation sequence at once instead of causal filtering (the
// gate then thresholds the causal posterior of the decoded stream).
inline BatchResult run_batch(const std::vector<Frame>& frames, HarModel& model,
                             const HMMParams* hmm, const PipelineConfig& cfg,
                             bool use_viterbi = false) {
    BatchResult res;
    if (frames.empty()) return res;
    const int window_frames = cfg.window_frames();
    const int stride_frames = cfg.stride_frames();
    const int k = model.cfg.k;

    Rng rng(stream_align_seed(cfg.seed));
    std::vector<AlignedFrame> aligned;
    aligned.reserve(frames.size());
    Point last_centroid{0, 0, 0};
    for (const auto& f : frames) {
        if (f.points.empty()) {
            Frame sub = f;
            sub.points.push_back(last_centroid);
            aligned.push_back(align_frame(sub, cfg.alignment_size, rng));
        } else {
            Point c{0, 0, 0};
            for (const auto& p : f.points) {
                c.x += p.x;
                c.y += p.y;
                c.z += p.z;
            }
            const double n = static_cast<double>(f.points.size());
            last_centroid = {c.x / n, c.y / n, c.z / n};
            aligned.push_back(align_frame(f, cfg.alignment_size, rng));
        }
    }
    const int n = static_cast<int>(aligned.size());
    if (n < window_frames) return res;

    // embed every frame once, in chunks
    const int d = model.cfg.lpn.embed_dim();
    TensorBuf emb({n, d});
    const int chunk = 512;
    for (int lo = 0; lo < n; lo += chunk) {
        const int len = std::min(chunk, n - lo);
        TensorBuf part = embed_frames(model.store, model.lpn,
                                      std::span<const AlignedFrame>(aligned.data() + lo, len));
        std::memcpy(emb.data.data() + static_cast<long>(lo) * d, part.data.data(),
                    sizeof(double) * len * d);
    }

    const int count = (n - window_frames) / stride_frames + 1;
    std::vector<std::vector<double>> raw_posts(count);
    for (int w = 0; w < count; ++w) {
        TensorBuf win({window_frames, d});
        std::memcpy(win.data.data(), emb.data.data() + static_cast<long>(w) * stride_frames * d,
                    sizeof(double) * window_frames * d);
        raw_posts[w] = model.classify_embeddings(win);
        res.raw_preds.push_back(static_cast<int>(
            std::max_element(raw_posts[w].begin(), raw_posts[w].end()) - raw_posts[w].begin()));

        const int start = w * stride_frames;
        res.spans.push_back({aligned[start].timestamp,
                             aligned[start + window_frames - 1].timestamp + 1.0 / cfg.rate_hz});
        std::vector<int> ls;
        for (int i = 0; i < window_frames; ++i) ls.push_back(aligned[start + i].label);
        res.truth.push_back(majority_label(ls));
    }

    // HMM stage and gating
    std::vector<std::vector<double>> posts(count);
    if (hmm) {
        std::vector<double> alpha;
        for (int w = 0; w < count; ++w) {
            alpha = forward_filter(*hmm, res.raw_preds[w], w == 0 ? nullptr : &alpha);
            posts[w] = alpha;
        }
        if (use_viterbi) {
            res.hmm_preds = viterbi(*hmm, res.raw_preds);
        } else {
            for (int w = 0; w < count; ++w)
                res.hmm_preds.push_back(static_cast<int>(
                    std::max_element(posts[w].begin(), posts[w].end()) - posts[w].begin()));
        }
    } else {
        posts = raw_posts;
        res.hmm_preds = res.raw_preds;
    }
    std::vector<LabeledStep> steps(count);
    for (int w = 0; w < count; ++w) {
        const int gated = blank_gate(posts[w], cfg.tau);
        res.gated_preds.push_back(gated);
        steps[w] = {gated, res.spans[w].first, res.spans[w].second,
                    *std::max_element(posts[w].begin(), posts[w].end())};
    }
    res.events = collapse_events(steps);

    // truth events from per-frame label runs
    std::vector<LabeledStep> truth_steps;
    for (const auto& f : aligned) {
        LabeledStep s;
        s.label = f.label >= 0 ? f.label : kBlankLabel;
        s.t_start = f.timestamp;
        s.t_end = f.timestamp + 1.0 / cfg.rate_hz;
        s.confidence = 1.0;
        truth_steps.push_back(s);
    }
    res.truth_event_labels = collapse(truth_steps);
    std::vector<int> pred_event_labels;
    for (const auto& e : res.events) pred_event_labels.push_back(e.label);
    res.edit_distance = event_edit_distance(pred_event_labels, res.truth_event_labels);

    // window metrics with blank as its own class
    const auto truth_m = map_blank_labels(res.truth, k);
    res.raw_metrics = compute_metrics(map_blank_labels(res.raw_preds, k), truth_m, k + 1);
    res.hmm_metrics = compute_metrics(map_blank_labels(res.hmm_preds, k), truth_m, k + 1);
    res.gated_metrics = compute_metrics(map_blank_labels(res.gated_preds, k), truth_m, k + 1);
    return res;
}

}  // namespace robhar
