// Supervised training of the LPN + BiLiLSTM classifier on windowed
// recordings, with fresh per-epoch segment augmentation on the training
// split only. Splits are recording-wise (stratified per class) so
// overlapping windows never straddle a split. Model-init, augmentation,
// shuffling and alignment randomness run on independent derived streams,
// and training is bit-reproducible given the seed.

#pragma once

#include <chrono>

#include "robhar/eval.hpp"
#include "robhar/io.hpp"
#include "robhar/model.hpp"
#include "robhar/spca.hpp"

namespace robhar {

struct TrainConfig {
    double window_seconds = 2.0;
    double stride_seconds = 1.0 / 3.0;
    int alignment_size = 0;  // 0 = by rate: 25 at >= 20 Hz, 64 below
    int epochs = 30;
    int batch_size = 32;
    double lr = 1e-3;
    double lr_decay = 0.5;
    int lr_decay_every = 20;
    uint64_t seed = 42;
    double split_train = 0.7, split_val = 0.1, split_test = 0.2;
    bool augment_enabled = true;
    SpcaRanges augment;
    // architecture overrides
    int h_dir = 80;
    int head = 128;
    std::vector<int> mlp = {32, 64};
    std::vector<int> tnet_conv = {16, 32};
    int tnet_fc = 16;

    void validate() const {
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (batch_size < 2) throw ConfigError("batch size must be >= 2");
        if (split_train <= 0 || split_train + split_val + split_test > 1.0 + 1e-9)
            throw ConfigError("split fractions must be positive and sum to <= 1");
        if (stride_seconds > window_seconds) throw ConfigError("stride must be <= window");
    }
};

// rng stream ids
namespace seed_stream {
inline constexpr uint64_t init = 1;
inline constexpr uint64_t augment = 2;
inline constexpr uint64_t shuffle = 3;
inline constexpr uint64_t split = 4;
inline constexpr uint64_t align = 5;
}  // namespace seed_stream

inline double infer_rate(const Dataset& ds) {
    std::vector<double> dts;
    for (const auto& rec : ds.recordings)
        for (std::size_t i = 1; i < rec.frames.size(); ++i)
            dts.push_back(rec.frames[i].timestamp - rec.frames[i - 1].timestamp);
    if (dts.empty()) throw DataError("cannot infer frame rate: no consecutive frames");
    std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
    const double dt = dts[dts.size() / 2];
    if (dt <= 0) throw DataError("cannot infer frame rate: non-positive frame spacing");
    return 1.0 / dt;
}

// Converts seconds to whole frames, tolerating rounded second values like
// 0.33 s at 30 Hz (= 10 frames) within 2%.
inline int seconds_to_frames(double seconds, double rate_hz, const char* what) {
    const double exact = seconds * rate_hz;
    const int frames = static_cast<int>(std::lround(exact));
    if (frames < 1) throw ConfigError(std::string(what) + ": shorter than one frame");
    if (std::fabs(exact - frames) > 0.02 * std::max(1.0, exact))
        throw ConfigError(std::string(what) + ": " + std::to_string(seconds) +
                          " s is not a whole number of frames at " + std::to_string(rate_hz) +
                          " Hz");
    return frames;
}

inline int default_alignment_size(double rate_hz) { return rate_hz >= 20.0 ? 25 : 64; }

// Aligns a recording and cuts sliding windows.
inline std::vector<Segment> window_recording(const Recording& rec, int as, int window_frames,
                                             int stride_frames, Rng& rng) {
    std::vector<AlignedFrame> aligned;
    aligned.reserve(rec.frames.size());
    for (const auto& f : rec.frames) aligned.push_back(align_frame(f, as, rng));
    return window_segments(aligned, window_frames, stride_frames);
}

struct SplitIndices {
    std::vector<int> train, val, test;
};

// Recording-wise split, stratified by recording label. Guarantees at least
// one training recording per class when the data allows it.
inline SplitIndices split_recordings(const Dataset& ds, double f_train, double f_val,
                                     double f_test, uint64_t seed) {
    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < ds.recordings.size(); ++i)
        by_class[ds.recordings[i].label()].push_back(static_cast<int>(i));

    SplitIndices out;
    Rng rng(Rng::derive(seed, seed_stream::split));
    for (auto& [label, recs] : by_class) {
        for (int i = static_cast<int>(recs.size()) - 1; i > 0; --i)
            std::swap(recs[i], recs[rng.uniform_int(i + 1)]);
        const int n = static_cast<int>(recs.size());
        int n_test = static_cast<int>(std::floor(f_test * n));
        int n_val = static_cast<int>(std::floor(f_val * n));
        int n_train = n - n_test - n_val;
        if (n_train < 1) {  // training always comes first
            n_train = 1;
            n_test = std::min(n_test, n - 1);
            n_val = n - n_train - n_test;
        }
        (void)f_train;
        for (int i = 0; i < n; ++i) {
            if (i < n_train)
                out.train.push_back(recs[i]);
            else if (i < n_train + n_val)
                out.val.push_back(recs[i]);
            else
                out.test.push_back(recs[i]);
        }
    }
    return out;
}

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;
    double val_accuracy = 0.0;
    double seconds = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    HarModel model;
    std::vector<EpochLog> log;
    double total_seconds = 0.0;
    double rate_hz = 0.0;
    int window_frames = 0, stride_frames = 0, alignment_size = 0;
    SplitIndices split;
};

// Batched inference over whole recordings: frames are embedded once and
// windows slice the embedding sequence, so overlapping windows share work.
inline std::vector<int> predict_windows(HarModel& model, const std::vector<AlignedFrame>& aligned,
                                        int window_frames, int stride_frames,
                                        std::vector<std::vector<double>>* posteriors = nullptr) {
    std::vector<int> preds;
    const int n = static_cast<int>(aligned.size());
    if (n < window_frames) return preds;
    TensorBuf emb = embed_frames(model.store, model.lpn, aligned);
    const int d = emb.cols();
    const int count = (n - window_frames) / stride_frames + 1;
    for (int w = 0; w < count; ++w) {
        TensorBuf win({window_frames, d});
        std::memcpy(win.data.data(), emb.data.data() + static_cast<long>(w) * stride_frames * d,
                    sizeof(double) * window_frames * d);
        const auto post = model.classify_embeddings(win);
        preds.push_back(static_cast<int>(std::max_element(post.begin(), post.end()) - post.begin()));
        if (posteriors) posteriors->push_back(post);
    }
    return preds;
}

inline MetricsReport evaluate_windows(HarModel& model, const std::vector<Segment>& windows) {
    if (windows.empty()) throw DataError("evaluate: no windows");
    std::vector<int> preds, truths;
    for (const auto& w : windows) {
        const auto post = model.classify_window(w);
        preds.push_back(static_cast<int>(std::max_element(post.begin(), post.end()) - post.begin()));
        truths.push_back(w.label);
    }
    return compute_metrics(preds, truths, model.cfg.k);
}

// Window-level accuracy over a set of recordings with shared embeddings.
inline double quick_accuracy(HarModel& model, const Dataset& ds, std::span<const int> recs,
                             int as, int window_frames, int stride_frames, uint64_t seed) {
    long correct = 0, total = 0;
    for (int r : recs) {
        Rng rng(Rng::derive(seed, seed_stream::align, r));
        const auto& rec = ds.recordings[r];
        std::vector<AlignedFrame> aligned;
        for (const auto& f : rec.frames) aligned.push_back(align_frame(f, as, rng));
        if (static_cast<int>(aligned.size()) < window_frames) continue;
        auto preds = predict_windows(model, aligned, window_frames, stride_frames);
        for (std::size_t w = 0; w < preds.size(); ++w) {
            std::vector<int> ls;
            for (int i = 0; i < window_frames; ++i)
                ls.push_back(aligned[w * stride_frames + i].label);
            if (preds[w] == majority_label(ls)) ++correct;
            ++total;
        }
    }
    return total > 0 ? static_cast<double>(correct) / total : 0.0;
}

inline TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    const int k = static_cast<int>(ds.class_names.size());
    if (k < 2) throw ConfigError("training needs at least 2 classes");

    TrainResult res;
    res.rate_hz = infer_rate(ds);
    res.window_frames = seconds_to_frames(cfg.window_seconds, res.rate_hz, "window");
    res.stride_frames = seconds_to_frames(cfg.stride_seconds, res.rate_hz, "stride");
    res.alignment_size =
        cfg.alignment_size > 0 ? cfg.alignment_size : default_alignment_size(res.rate_hz);
    res.split = split_recordings(ds, cfg.split_train, cfg.split_val, cfg.split_test, cfg.seed);

    // training windows
    std::vector<Segment> train_windows;
    for (int r : res.split.train) {
        Rng rng(Rng::derive(cfg.seed, seed_stream::align, r));
        auto wins = window_recording(ds.recordings[r], res.alignment_size, res.window_frames,
                                     res.stride_frames, rng);
        for (auto& w : wins)
            if (w.label >= 0) train_windows.push_back(std::move(w));
    }
    if (train_windows.size() < 2) throw ConfigError("not enough training windows");
    std::vector<long> class_count(k, 0);
    for (const auto& w : train_windows) class_count[w.label]++;
    for (int c = 0; c < k; ++c)
        if (class_count[c] == 0)
            throw ConfigError("class '" + ds.class_names[c] + "' absent from the training split");

    ModelConfig mc;
    mc.lpn.as = res.alignment_size;
    mc.lpn.mlp = cfg.mlp;
    mc.lpn.tnet_conv = cfg.tnet_conv;
    mc.lpn.tnet_fc = cfg.tnet_fc;
    mc.h_dir = cfg.h_dir;
    mc.head = cfg.head;
    mc.k = k;
    res.model = HarModel::build(mc, Rng::derive(cfg.seed, seed_stream::init));

    AdamState adam(res.model.store.params.size(), cfg.lr);
    const int l = res.window_frames;
    const int as = res.alignment_size;
    const int d3 = as * 3;

    const auto t_start = std::chrono::steady_clock::now();
    std::vector<int> order(train_windows.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto e_start = std::chrono::steady_clock::now();
        adam.lr = cfg.lr * std::pow(cfg.lr_decay, epoch / cfg.lr_decay_every);

        Rng shuffle_rng(Rng::derive(cfg.seed, seed_stream::shuffle, epoch));
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

        // batch boundaries; avoid a trailing batch of one
        std::vector<std::pair<int, int>> batches;
        int pos = 0;
        const int n = static_cast<int>(order.size());
        while (pos < n) {
            int len = std::min(cfg.batch_size, n - pos);
            if (n - pos - len == 1) --len;  // leave two for the last batch
            if (len < 2) len = n - pos;
            batches.push_back({pos, len});
            pos += len;
        }

        double loss_sum = 0.0;
        long loss_n = 0;
        for (const auto& [start, b] : batches) {
            TensorBuf pts({b * l * as, 3});
            std::vector<int> labels(b);
            for (int i = 0; i < b; ++i) {
                const int wi = order[start + i];
                const Segment& base = train_windows[wi];
                Segment seg;
                if (cfg.augment_enabled) {
                    Rng aug_rng(Rng::derive(cfg.seed, seed_stream::augment,
                                            static_cast<uint64_t>(epoch), wi));
                    seg = augment(base, sample_spca(cfg.augment, aug_rng), aug_rng);
                }
                const Segment& use = cfg.augment_enabled ? seg : base;
                labels[i] = use.label;
                double* dst = pts.data.data() + static_cast<long>(i) * l * d3;
                for (int t = 0; t < l; ++t)
                    for (int p = 0; p < as; ++p) {
                        const Point& pt = use.frames[t].points[p];
                        dst[(static_cast<long>(t) * as + p) * 3 + 0] = pt.x;
                        dst[(static_cast<long>(t) * as + p) * 3 + 1] = pt.y;
                        dst[(static_cast<long>(t) * as + p) * 3 + 2] = pt.z;
                    }
            }
            ForwardCache cache;
            TensorBuf grad_logits;
            const double loss = res.model.forward_train(pts, labels, b, l, cache, grad_logits);
            res.model.store.zero_grads();
            res.model.backward(cache, grad_logits);
            adam_step(res.model.store, adam);
            loss_sum += loss * b;
            loss_n += b;
        }

        EpochLog el;
        el.epoch = epoch;
        el.loss = loss_sum / loss_n;
        el.lr = adam.lr;
        const auto& probe = res.split.val.empty() ? res.split.train : res.split.val;
        el.val_accuracy = quick_accuracy(res.model, ds, probe, as, res.window_frames,
                                         res.stride_frames, cfg.seed);
        el.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - e_start).count();
        res.log.push_back(el);
    }

    res.model.round_params_to_f32();
    res.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

// Windows of a recording subset, for evaluation.
inline std::vector<Segment> windows_of(const Dataset& ds, std::span<const int> recs, int as,
                                       int window_frames, int stride_frames, uint64_t seed) {
    std::vector<Segment> out;
    for (int r : recs) {
        Rng rng(Rng::derive(seed, seed_stream::align, r));
        auto wins =
            window_recording(ds.recordings[r], as, window_frames, stride_frames, rng);
        for (auto& w : wins) out.push_back(std::move(w));
    }
    return out;
}

struct SweepRow {
    double value = 0.0;
    double accuracy = 0.0;
    double epoch_seconds = 0.0;  // mean training time per epoch
    double total_seconds = 0.0;
};

enum class SweepAxis { window_size, alignment_size };

// Re-runs train/evaluate along one experimental axis.
inline std::vector<SweepRow> sweep(const Dataset& ds, SweepAxis axis,
                                   std::span<const double> values, const TrainConfig& base) {
    std::vector<SweepRow> rows;
    for (double v : values) {
        TrainConfig cfg = base;
        if (axis == SweepAxis::window_size)
            cfg.window_seconds = v;
        else
            cfg.alignment_size = static_cast<int>(std::lround(v));
        TrainResult tr = train(ds, cfg);
        const auto& eval_recs = tr.split.test.empty() ? tr.split.val : tr.split.test;
        SweepRow row;
        row.value = v;
        row.accuracy = quick_accuracy(tr.model, ds, eval_recs, tr.alignment_size,
                                      tr.window_frames, tr.stride_frames, cfg.seed);
        double esum = 0;
        for (const auto& e : tr.log) esum += e.seconds;
        row.epoch_seconds = esum / tr.log.size();
        row.total_seconds = tr.total_seconds;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace robhar
