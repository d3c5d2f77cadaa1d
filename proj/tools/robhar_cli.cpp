// robhar: activities from sparse mmWave radar point-cloud streams.
// Subcommands: synth, augment, train, eval, stream, sweep, info.
// Exit codes: 0 success, 1 usage/configuration error, 2 data error.
// Diagnostics go to stderr; data goes to stdout or --out.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

#include "robhar/io.hpp"
#include "robhar/stream.hpp"
#include "robhar/synth.hpp"
#include "robhar/train.hpp"

using nlohmann::json;
using namespace robhar;

namespace {

std::unique_ptr<std::ofstream> open_out(const std::string& path, std::ostream*& out,
                                        bool binary = false) {
    if (path == "-") {
        out = &std::cout;
        return nullptr;
    }
    auto file = std::make_unique<std::ofstream>(
        path, binary ? std::ios::binary : std::ios::out);
    if (!*file) throw DataError("cannot write '" + path + "'");
    out = file.get();
    return file;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(detail::parse_double(item, 0, "value"));
    }
    if (out.empty()) throw ConfigError("no values given");
    return out;
}

ScenarioScript parse_script(const std::string& text, const std::vector<ActivityModel>& acts,
                            double gap_min, double gap_max) {
    ScenarioScript s;
    s.gap_min = gap_min;
    s.gap_max = gap_max;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("script entries are name:seconds, got '" + item + "'");
        const std::string name = item.substr(0, colon);
        const double dur = detail::parse_double(item.substr(colon + 1), 0, "duration");
        int id = -1;
        for (const auto& a : acts)
            if (a.name == name) id = a.id;
        if (id < 0) throw ConfigError("unknown activity '" + name + "'");
        s.events.push_back({id, dur});
    }
    if (s.events.empty()) throw ConfigError("empty script");
    return s;
}

json metrics_to_json(const MetricsReport& r) {
    json j = {{"micro_accuracy", r.micro_accuracy},
              {"macro_precision", r.macro_precision},
              {"macro_recall", r.macro_recall},
              {"macro_f1", r.macro_f1},
              {"total", r.total},
              {"k", r.k}};
    json rows = json::array();
    for (int i = 0; i < r.k; ++i) {
        json row = json::array();
        for (int c = 0; c < r.k; ++c) row.push_back(r.at(i, c));
        rows.push_back(row);
    }
    j["confusion"] = rows;
    if (r.event_edit_distance) j["event_edit_distance"] = *r.event_edit_distance;
    if (r.edit_rate) j["edit_rate"] = *r.edit_rate;
    return j;
}

struct TrainFlags {
    std::string data;
    std::string model_path;
    std::string log_path;
    TrainConfig cfg;
    bool fit_hmm = true;
    double tau = 0.5;
};

void add_train_options(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--data", f.data, "canonical CSV dataset ('-' for stdin)")->required();
    cmd->add_option("--seed", f.cfg.seed, "random seed");
    cmd->add_option("--window-seconds", f.cfg.window_seconds, "window length L in seconds");
    cmd->add_option("--stride-seconds", f.cfg.stride_seconds, "sliding stride in seconds");
    cmd->add_option("--alignment-size", f.cfg.alignment_size,
                    "points per frame after alignment (0 = by rate)");
    cmd->add_option("--epochs", f.cfg.epochs, "training epochs");
    cmd->add_option("--batch", f.cfg.batch_size, "batch size");
    cmd->add_option("--lr", f.cfg.lr, "Adam learning rate");
    cmd->add_option("--lr-decay", f.cfg.lr_decay, "learning-rate decay factor");
    cmd->add_option("--lr-decay-every", f.cfg.lr_decay_every, "epochs between decays");
    cmd->add_option("--hdir", f.cfg.h_dir, "hidden units per LSTM direction");
    cmd->add_option("--head", f.cfg.head, "condensed width before the AC layer");
    cmd->add_flag_callback("--no-augment", [&f] { f.cfg.augment_enabled = false; },
                           "disable per-epoch segment augmentation");
    cmd->add_option("--stretch-min", f.cfg.augment.stretch_min, "augmentation stretch lower bound");
    cmd->add_option("--stretch-max", f.cfg.augment.stretch_max, "augmentation stretch upper bound");
    cmd->add_option("--perturb-bound", f.cfg.augment.perturb_bound,
                    "augmentation perturbation bound (m)");
    cmd->add_option("--tau-blank", f.tau, "blank-gate threshold stored with the model");
}

int cmd_synth(const std::string& out_path, uint64_t seed, double rate,
              const std::string& profile_name, double seconds_per_class, int recs_per_class,
              bool continuous, int scenarios, int events, double gap_min, double gap_max,
              const std::string& script_text) {
    const PointCountProfile profile =
        profile_name == "disc" ? PointCountProfile::disc : PointCountProfile::mmact;
    const auto acts = builtin_activities();

    Dataset ds;
    for (const auto& m : acts) ds.class_names.push_back(m.name);

    if (!continuous) {
        if (recs_per_class < 1) throw ConfigError("need at least one recording per class");
        const double per_rec = seconds_per_class / recs_per_class;
        int rec_no = 0;
        for (const auto& m : acts) {
            for (int r = 0; r < recs_per_class; ++r) {
                Rng rng(Rng::derive(seed, 0x5F17, m.id, r));
                Recording rec;
                rec.id = m.name + "_" + std::to_string(rec_no++);
                rec.frames = gen_discrete(m, per_rec, rate, profile, rng);
                ds.recordings.push_back(std::move(rec));
            }
        }
    } else {
        for (int s = 0; s < scenarios; ++s) {
            Rng rng(Rng::derive(seed, 0x5CE2, s));
            ScenarioScript script = script_text.empty()
                                        ? random_script(events, rng, acts, gap_min, gap_max)
                                        : parse_script(script_text, acts, gap_min, gap_max);
            Recording rec;
            rec.id = "scenario_" + std::to_string(s);
            rec.frames = gen_continuous(script, rate, profile, rng, acts);
            ds.recordings.push_back(std::move(rec));
        }
    }
    save_dataset(out_path, ds);
    std::cerr << "synth: wrote " << ds.recordings.size() << " recordings\n";
    return 0;
}

int cmd_augment(const std::string& data, const std::string& out_path,
                const std::string& sidecar_path, uint64_t seed, double window_s, double stride_s,
                int alignment, const SpcaRanges& ranges) {
    Dataset ds = load_dataset(resolve_data_path(data));
    if (ds.recordings.empty()) throw DataError("dataset has no recordings");
    const double rate = infer_rate(ds);
    const int window_frames = seconds_to_frames(window_s, rate, "window");
    const int stride_frames = seconds_to_frames(stride_s, rate, "stride");
    const int as = alignment > 0 ? alignment : default_alignment_size(rate);

    Dataset out;
    out.class_names = ds.class_names;
    json sidecar = json::array();
    long seg_no = 0;
    for (std::size_t r = 0; r < ds.recordings.size(); ++r) {
        Rng align_rng(Rng::derive(seed, seed_stream::align, r));
        auto windows =
            window_recording(ds.recordings[r], as, window_frames, stride_frames, align_rng);
        for (auto& seg : windows) {
            Rng rng(Rng::derive(seed, seed_stream::augment, 0, seg_no));
            const SpcaParams p = sample_spca(ranges, rng);
            Segment aug = augment(seg, p, rng);
            Recording rec;
            rec.id = "aug_" + std::to_string(seg_no);
            for (const auto& f : aug.frames) {
                Frame frame;
                frame.timestamp = f.timestamp;
                frame.label = f.label;
                frame.points = f.points;
                rec.frames.push_back(std::move(frame));
            }
            out.recordings.push_back(std::move(rec));
            sidecar.push_back({{"segment", seg_no},
                               {"source_recording", ds.recordings[r].id},
                               {"seed", seed},
                               {"theta", p.theta},
                               {"s_h", p.s_h},
                               {"s_v", p.s_v},
                               {"p", {p.p[0], p.p[1], p.p[2]}},
                               {"rotate", p.rotate},
                               {"stretch", p.stretch},
                               {"perturb", p.perturb},
                               {"origin_relative_stretch", p.origin_relative_stretch},
                               {"per_point_jitter", p.per_point_jitter}});
            ++seg_no;
        }
    }
    save_dataset(out_path, out);
    if (!sidecar_path.empty()) {
        std::ostream* os = nullptr;
        auto file = open_out(sidecar_path, os);
        *os << json{{"schema_version", 1}, {"segments", sidecar}}.dump(2) << "\n";
    }
    std::cerr << "augment: wrote " << out.recordings.size() << " augmented segments\n";
    return 0;
}

// Window predictions and majority truth over a recording subset.
void predict_split(HarModel& model, const Dataset& ds, std::span<const int> recs, int as,
                   int window_frames, int stride_frames, uint64_t seed, std::vector<int>& preds,
                   std::vector<int>& truths) {
    for (int r : recs) {
        Rng rng(Rng::derive(seed, seed_stream::align, r));
        std::vector<AlignedFrame> aligned;
        for (const auto& f : ds.recordings[r].frames)
            aligned.push_back(align_frame(f, as, rng));
        if (static_cast<int>(aligned.size()) < window_frames) continue;
        auto p = predict_windows(model, aligned, window_frames, stride_frames);
        for (std::size_t w = 0; w < p.size(); ++w) {
            std::vector<int> ls;
            for (int i = 0; i < window_frames; ++i)
                ls.push_back(aligned[w * stride_frames + i].label);
            preds.push_back(p[w]);
            truths.push_back(majority_label(ls));
        }
    }
}

int cmd_train(const TrainFlags& f) {
    Dataset ds = load_dataset(resolve_data_path(f.data));
    TrainResult tr = train(ds, f.cfg);

    std::optional<HMMParams> hmm;
    if (f.fit_hmm) {
        std::vector<int> preds, truths;
        predict_split(tr.model, ds, tr.split.train, tr.alignment_size, tr.window_frames,
                      tr.stride_frames, f.cfg.seed, preds, truths);
        std::vector<int> fp, ft;
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (truths[i] >= 0) {
                fp.push_back(preds[i]);
                ft.push_back(truths[i]);
            }
        if (ft.size() >= 2) hmm = hmm_fit(fp, ft, static_cast<int>(ds.class_names.size()));
    }

    ModelMeta meta;
    meta.class_names = ds.class_names;
    meta.seed = f.cfg.seed;
    meta.window_seconds = f.cfg.window_seconds;
    meta.stride_seconds = f.cfg.stride_seconds;
    meta.rate_hz = tr.rate_hz;
    meta.tau = f.tau;
    meta.split_train = f.cfg.split_train;
    meta.split_val = f.cfg.split_val;
    meta.split_test = f.cfg.split_test;
    save_model(f.model_path, tr.model, meta, hmm ? &*hmm : nullptr);

    if (!f.log_path.empty()) {
        json epochs = json::array();
        for (const auto& e : tr.log)
            epochs.push_back({{"epoch", e.epoch},
                              {"loss", e.loss},
                              {"val_accuracy", e.val_accuracy},
                              {"seconds", e.seconds},
                              {"lr", e.lr}});
        json split = {{"train", json::array()}, {"val", json::array()}, {"test", json::array()}};
        for (int r : tr.split.train) split["train"].push_back(ds.recordings[r].id);
        for (int r : tr.split.val) split["val"].push_back(ds.recordings[r].id);
        for (int r : tr.split.test) split["test"].push_back(ds.recordings[r].id);
        json j = {{"schema_version", 1},
                  {"seed", f.cfg.seed},
                  {"epochs", epochs},
                  {"total_seconds", tr.total_seconds},
                  {"rate_hz", tr.rate_hz},
                  {"window_frames", tr.window_frames},
                  {"stride_frames", tr.stride_frames},
                  {"alignment_size", tr.alignment_size},
                  {"param_count", tr.model.param_count()},
                  {"hmm_fitted", hmm.has_value()},
                  {"split", split}};
        std::ostream* os = nullptr;
        auto file = open_out(f.log_path, os);
        *os << j.dump(2) << "\n";
    }
    std::cerr << "train: " << tr.model.param_count() << " params, final loss "
              << tr.log.back().loss << ", " << tr.total_seconds << " s\n";
    return 0;
}

// Window predictions/truths over whole recordings of a labeled dataset;
// blank-truth windows are dropped (the HMM has no blank state).
HMMParams refit_hmm(HarModel& model, Dataset& ds, int window_frames, int stride_frames,
                    uint64_t seed, double alpha) {
    std::vector<int> preds, truths;
    std::vector<int> all(ds.recordings.size());
    std::iota(all.begin(), all.end(), 0);
    predict_split(model, ds, all, model.cfg.lpn.as, window_frames, stride_frames, seed, preds,
                  truths);
    std::vector<int> fp, ft;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (truths[i] >= 0) {
            fp.push_back(preds[i]);
            ft.push_back(truths[i]);
        }
    if (ft.size() < 2) throw DataError("not enough labeled windows to fit the HMM");
    return hmm_fit(fp, ft, static_cast<int>(ds.class_names.size()), alpha);
}

int cmd_eval(const std::string& data, const std::string& model_path, const std::string& split,
             bool continuous, bool use_viterbi, const std::string& fmt,
             const std::string& out_path, double tau_override, uint64_t seed_override,
             bool have_seed, const std::string& hmm_data, double hmm_alpha) {
    LoadedModel lm = load_model(resolve_data_path(model_path));
    Dataset ds = load_dataset(resolve_data_path(data));
    remap_labels(ds, lm.meta.class_names);
    const uint64_t seed = have_seed ? seed_override : lm.meta.seed;
    const double rate = infer_rate(ds);
    const int window_frames = seconds_to_frames(lm.meta.window_seconds, rate, "window");
    const int stride_frames = seconds_to_frames(lm.meta.stride_seconds, rate, "stride");
    const int as = lm.model.cfg.lpn.as;
    const double tau = tau_override > 0 ? tau_override : lm.meta.tau;

    std::ostream* os = nullptr;
    auto file = open_out(out_path, os);

    if (!continuous) {
        SplitIndices si = split_recordings(ds, lm.meta.split_train, lm.meta.split_val,
                                           lm.meta.split_test, seed);
        std::vector<int> recs;
        if (split == "train")
            recs = si.train;
        else if (split == "val")
            recs = si.val;
        else if (split == "test")
            recs = si.test;
        else
            for (std::size_t i = 0; i < ds.recordings.size(); ++i)
                recs.push_back(static_cast<int>(i));
        if (recs.empty()) throw ConfigError("selected split has no recordings");

        std::vector<int> preds, truths;
        predict_split(lm.model, ds, recs, as, window_frames, stride_frames, seed, preds, truths);
        if (preds.empty()) throw DataError("no windows in the selected split");
        const int k = static_cast<int>(ds.class_names.size());
        const bool has_blank = std::any_of(truths.begin(), truths.end(),
                                           [](int t) { return t == kBlankLabel; });
        MetricsReport rep = has_blank
                                ? compute_metrics(map_blank_labels(preds, k),
                                                  map_blank_labels(truths, k), k + 1)
                                : compute_metrics(preds, truths, k);
        if (fmt == "csv") {
            *os << "metric,value\nmicro_accuracy," << rep.micro_accuracy << "\nmacro_precision,"
                << rep.macro_precision << "\nmacro_recall," << rep.macro_recall << "\nmacro_f1,"
                << rep.macro_f1 << "\n";
        } else {
            json j = {{"schema_version", 1}, {"split", split}, {"windows", rep.total},
                      {"metrics", metrics_to_json(rep)}};
            *os << j.dump(2) << "\n";
        }
        std::cerr << "eval: " << rep.total << " windows, micro accuracy " << rep.micro_accuracy
                  << "\n";
        return 0;
    }

    // continuous evaluation over every recording
    PipelineConfig pcfg;
    pcfg.rate_hz = rate;
    pcfg.window_seconds = lm.meta.window_seconds;
    pcfg.stride_seconds = lm.meta.stride_seconds;
    pcfg.alignment_size = as;
    pcfg.tau = tau;
    pcfg.seed = seed;

    if (!hmm_data.empty()) {
        Dataset hds = load_dataset(resolve_data_path(hmm_data));
        remap_labels(hds, lm.meta.class_names);
        lm.hmm = refit_hmm(lm.model, hds, window_frames, stride_frames, seed, hmm_alpha);
        std::cerr << "eval: transition statistics refitted on '" << hmm_data << "'\n";
    }

    std::vector<int> raw_p, hmm_p, gated_p, truths;
    long edit_sum = 0, truth_events = 0;
    json events = json::array();
    for (const auto& rec : ds.recordings) {
        auto br = run_batch(rec.frames, lm.model, lm.hmm ? &*lm.hmm : nullptr, pcfg, use_viterbi);
        raw_p.insert(raw_p.end(), br.raw_preds.begin(), br.raw_preds.end());
        hmm_p.insert(hmm_p.end(), br.hmm_preds.begin(), br.hmm_preds.end());
        gated_p.insert(gated_p.end(), br.gated_preds.begin(), br.gated_preds.end());
        truths.insert(truths.end(), br.truth.begin(), br.truth.end());
        edit_sum += br.edit_distance;
        truth_events += static_cast<long>(br.truth_event_labels.size());
        for (const auto& e : br.events)
            events.push_back({{"recording", rec.id},
                              {"label", ds.class_names[e.label]},
                              {"start", e.start},
                              {"end", e.end},
                              {"confidence", e.confidence}});
    }
    if (truths.empty()) throw DataError("no windows in the dataset");
    const int k = static_cast<int>(ds.class_names.size());
    const auto tm = map_blank_labels(truths, k);
    MetricsReport raw = compute_metrics(map_blank_labels(raw_p, k), tm, k + 1);
    MetricsReport hmm = compute_metrics(map_blank_labels(hmm_p, k), tm, k + 1);
    MetricsReport gated = compute_metrics(map_blank_labels(gated_p, k), tm, k + 1);
    gated.event_edit_distance = edit_sum;
    gated.edit_rate = truth_events > 0 ? static_cast<double>(edit_sum) / truth_events : 0.0;

    json j = {{"schema_version", 1},
              {"windows", raw.total},
              {"raw", metrics_to_json(raw)},
              {"hmm", metrics_to_json(hmm)},
              {"hmm_ctc", metrics_to_json(gated)},
              {"viterbi", use_viterbi},
              {"event_edit_distance", edit_sum},
              {"truth_events", truth_events},
              {"events", events}};
    *os << j.dump(2) << "\n";
    std::cerr << "eval: raw " << raw.micro_accuracy << " -> hmm " << hmm.micro_accuracy
              << " -> hmm+ctc " << gated.micro_accuracy << "\n";
    return 0;
}

int cmd_stream(const std::string& model_path, const std::string& input, const std::string& fmt,
               const std::string& out_path, const std::string& summary_path, double rate,
               double tau, uint64_t seed) {
    LoadedModel lm = load_model(resolve_data_path(model_path));
    PipelineConfig cfg;
    cfg.rate_hz = rate > 0 ? rate : lm.meta.rate_hz;
    cfg.window_seconds = lm.meta.window_seconds;
    cfg.stride_seconds = lm.meta.stride_seconds;
    cfg.alignment_size = lm.model.cfg.lpn.as;
    cfg.tau = tau > 0 ? tau : lm.meta.tau;
    cfg.seed = seed;

    std::ostream* os = nullptr;
    auto file = open_out(out_path, os);
    const auto& names = lm.meta.class_names;
    long hops = 0, frames_n = 0;
    json jevents = json::array();

    auto emit = [&](const Event& e) {
        if (fmt == "json") {
            *os << json{{"label", names[e.label]},
                        {"start", e.start},
                        {"end", e.end},
                        {"confidence", e.confidence}}
                       .dump()
                << "\n";
        } else {
            *os << names[e.label] << ',' << detail::format_double(e.start) << ','
                << detail::format_double(e.end) << ',' << detail::format_double(e.confidence)
                << "\n";
        }
        if (!summary_path.empty())
            jevents.push_back({{"label", names[e.label]},
                               {"start", e.start},
                               {"end", e.end},
                               {"confidence", e.confidence}});
    };

    if (input != "-") {
        Dataset ds = load_dataset(resolve_data_path(input));
        for (const auto& rec : ds.recordings) {
            Pipeline pipe(lm.model, lm.hmm ? &*lm.hmm : nullptr, cfg);
            for (const auto& f : rec.frames) {
                auto res = pipe.process_frame(f);
                ++frames_n;
                for (const auto& e : res.events) emit(e);
            }
            for (const auto& e : pipe.flush()) emit(e);
            hops += pipe.hops();
        }
    } else {
        // line feed: "timestamp x y z x y z ..." per frame
        Pipeline pipe(lm.model, lm.hmm ? &*lm.hmm : nullptr, cfg);
        std::string line;
        long line_no = 0;
        while (std::getline(std::cin, line)) {
            ++line_no;
            if (line.empty()) continue;
            std::stringstream ss(line);
            Frame f;
            if (!(ss >> f.timestamp))
                throw DataError("stdin line " + std::to_string(line_no) + ": bad timestamp");
            double x, y, z;
            while (ss >> x >> y >> z) f.points.push_back({x, y, z});
            auto res = pipe.process_frame(f);
            ++frames_n;
            for (const auto& e : res.events) emit(e);
        }
        for (const auto& e : pipe.flush()) emit(e);
        hops += pipe.hops();
    }

    if (!summary_path.empty()) {
        std::ostream* ss = nullptr;
        auto sfile = open_out(summary_path, ss);
        *ss << json{{"schema_version", 1},
                    {"frames", frames_n},
                    {"hops", hops},
                    {"events", jevents}}
                   .dump(2)
            << "\n";
    }
    std::cerr << "stream: " << frames_n << " frames, " << hops << " classifications\n";
    return 0;
}

int cmd_sweep(const TrainFlags& f, const std::string& axis, const std::string& values_csv,
              const std::string& fmt, const std::string& out_path) {
    Dataset ds = load_dataset(resolve_data_path(f.data));
    const auto values = parse_values(values_csv);
    const SweepAxis ax = axis == "alignment" ? SweepAxis::alignment_size : SweepAxis::window_size;
    auto rows = sweep(ds, ax, values, f.cfg);

    std::ostream* os = nullptr;
    auto file = open_out(out_path, os);
    if (fmt == "json") {
        json j = json::array();
        for (const auto& r : rows)
            j.push_back({{"value", r.value},
                         {"accuracy", r.accuracy},
                         {"epoch_seconds", r.epoch_seconds},
                         {"total_seconds", r.total_seconds}});
        *os << json{{"schema_version", 1}, {"axis", axis}, {"rows", j}}.dump(2) << "\n";
    } else {
        *os << "value,accuracy,epoch_seconds,total_seconds\n";
        for (const auto& r : rows)
            *os << detail::format_double(r.value) << ',' << detail::format_double(r.accuracy)
                << ',' << detail::format_double(r.epoch_seconds) << ','
                << detail::format_double(r.total_seconds) << "\n";
    }
    std::cerr << "sweep: " << rows.size() << " settings evaluated\n";
    return 0;
}

int cmd_info(const std::string& model_path, const std::string& fmt) {
    LoadedModel lm = load_model(resolve_data_path(model_path));
    const auto& c = lm.model.cfg;
    if (fmt == "json") {
        json j = {{"schema_version", 1},
                  {"param_count", lm.model.param_count()},
                  {"class_names", lm.meta.class_names},
                  {"config",
                   {{"as", c.lpn.as},
                    {"mlp", c.lpn.mlp},
                    {"tnet_conv", c.lpn.tnet_conv},
                    {"tnet_fc", c.lpn.tnet_fc},
                    {"h_dir", c.h_dir},
                    {"head", c.head},
                    {"k", c.k}}},
                  {"window_seconds", lm.meta.window_seconds},
                  {"stride_seconds", lm.meta.stride_seconds},
                  {"rate_hz", lm.meta.rate_hz},
                  {"tau", lm.meta.tau},
                  {"seed", lm.meta.seed},
                  {"has_hmm", lm.hmm.has_value()}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "parameters: " << lm.model.param_count() << "\n";
        std::cout << "classes:";
        for (const auto& n : lm.meta.class_names) std::cout << ' ' << n;
        std::cout << "\nembedding: AS=" << c.lpn.as << " mlp=";
        for (std::size_t i = 0; i < c.lpn.mlp.size(); ++i)
            std::cout << (i ? "-" : "") << c.lpn.mlp[i];
        std::cout << " tnet=";
        for (std::size_t i = 0; i < c.lpn.tnet_conv.size(); ++i)
            std::cout << (i ? "-" : "") << c.lpn.tnet_conv[i];
        std::cout << "/" << c.lpn.tnet_fc << "\n";
        std::cout << "recurrent: h_dir=" << c.h_dir << " head=" << c.head << " k=" << c.k << "\n";
        std::cout << "window: " << lm.meta.window_seconds << " s, stride "
                  << lm.meta.stride_seconds << " s at " << lm.meta.rate_hz << " Hz\n";
        std::cout << "tau: " << lm.meta.tau << "  seed: " << lm.meta.seed
                  << "  hmm: " << (lm.hmm ? "yes" : "no") << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"activity recognition engine for sparse mmWave radar point clouds"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI configuration file (flags override file values)");

    // synth
    auto* synth = app.add_subcommand("synth", "generate synthetic point-cloud datasets");
    std::string sy_out = "-", sy_profile = "mmact", sy_script;
    uint64_t sy_seed = 42;
    double sy_rate = 30.0, sy_seconds = 66.0, sy_gap_min = 1.0, sy_gap_max = 2.0;
    int sy_recs = 12, sy_scenarios = 3, sy_events = 8;
    bool sy_continuous = false;
    synth->add_option("--out,-o", sy_out, "output CSV path ('-' for stdout)");
    synth->add_option("--seed", sy_seed, "random seed");
    synth->add_option("--rate", sy_rate, "frame rate in Hz");
    synth->add_option("--profile", sy_profile, "point-count profile: mmact or disc")
        ->check(CLI::IsMember({"mmact", "disc"}));
    synth->add_option("--seconds-per-class", sy_seconds, "total seconds per activity class");
    synth->add_option("--recordings-per-class", sy_recs, "recordings per activity class");
    synth->add_flag("--continuous", sy_continuous, "generate continuous scenarios with gaps");
    synth->add_option("--scenarios", sy_scenarios, "number of continuous scenario recordings");
    synth->add_option("--events", sy_events, "events per random scenario");
    synth->add_option("--gap-min", sy_gap_min, "minimum transition gap (s)");
    synth->add_option("--gap-max", sy_gap_max, "maximum transition gap (s)");
    synth->add_option("--script", sy_script, "fixed scenario script, e.g. walking:4,falling:1.5");

    // augment
    auto* aug = app.add_subcommand("augment", "rewrite a dataset as augmented training segments");
    std::string ag_data, ag_out = "-", ag_sidecar;
    uint64_t ag_seed = 42;
    double ag_window = 2.0, ag_stride = 1.0 / 3.0;
    int ag_as = 0;
    SpcaRanges ag_ranges;
    aug->add_option("--data", ag_data, "input canonical CSV")->required();
    aug->add_option("--out,-o", ag_out, "output CSV path");
    aug->add_option("--sidecar", ag_sidecar,
                    "provenance JSON path (default <out>.sidecar.json)");
    aug->add_option("--seed", ag_seed, "random seed");
    aug->add_option("--window-seconds", ag_window, "window length (s)");
    aug->add_option("--stride-seconds", ag_stride, "stride (s)");
    aug->add_option("--alignment-size", ag_as, "points per frame (0 = by rate)");
    aug->add_option("--stretch-min", ag_ranges.stretch_min, "stretch factor lower bound");
    aug->add_option("--stretch-max", ag_ranges.stretch_max, "stretch factor upper bound");
    aug->add_option("--perturb-bound", ag_ranges.perturb_bound, "perturbation bound (m)");
    aug->add_flag("--origin-relative-stretch", ag_ranges.origin_relative_stretch,
                  "scale about the origin instead of the segment centroid");
    aug->add_flag("--jitter", ag_ranges.per_point_jitter, "per-point Gaussian jitter mode");
    aug->add_option("--jitter-sigma", ag_ranges.jitter_sigma, "jitter sigma (m)");
    bool ag_no_rotate = false, ag_no_stretch = false, ag_no_perturb = false;
    aug->add_flag("--no-rotate", ag_no_rotate, "disable rotation");
    aug->add_flag("--no-stretch", ag_no_stretch, "disable stretching");
    aug->add_flag("--no-perturb", ag_no_perturb, "disable perturbation");

    // train
    auto* tr = app.add_subcommand("train", "train a classifier on a discrete dataset");
    TrainFlags tf;
    add_train_options(tr, tf);
    tr->add_option("--model,-m", tf.model_path, "output model path")->required();
    tr->add_option("--log", tf.log_path, "training log JSON path");
    tr->add_flag_callback("--no-hmm", [&tf] { tf.fit_hmm = false; },
                          "skip fitting transition parameters");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a model on a dataset");
    std::string ev_data, ev_model, ev_split = "test", ev_fmt = "json", ev_out = "-";
    bool ev_continuous = false, ev_viterbi = false;
    double ev_tau = 0.0;
    uint64_t ev_seed = 0;
    bool ev_have_seed = false;
    ev->add_option("--data", ev_data, "canonical CSV dataset")->required();
    ev->add_option("--model,-m", ev_model, "model path")->required();
    ev->add_option("--split", ev_split, "train|val|test|all")
        ->check(CLI::IsMember({"train", "val", "test", "all"}));
    ev->add_flag("--continuous", ev_continuous,
                 "continuous evaluation: raw vs HMM vs HMM+CTC plus events");
    ev->add_flag("--viterbi", ev_viterbi, "decode offline with Viterbi instead of filtering");
    ev->add_option("--format", ev_fmt, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    ev->add_option("--out,-o", ev_out, "output path ('-' for stdout)");
    ev->add_option("--tau-blank", ev_tau, "blank-gate threshold override");
    ev->add_option_function<uint64_t>(
        "--seed", [&](const uint64_t& v) { ev_seed = v; ev_have_seed = true; },
        "split seed override (defaults to the model's)");
    std::string ev_hmm_data;
    ev->add_option("--hmm-data", ev_hmm_data,
                   "labeled dataset used to refit transition statistics (continuous mode)");
    double ev_hmm_alpha = 1.0;
    ev->add_option("--hmm-alpha", ev_hmm_alpha, "Laplace pseudo-count for the HMM fit");

    // stream
    auto* st = app.add_subcommand("stream", "run the real-time pipeline over a frame stream");
    std::string st_model, st_input = "-", st_fmt = "csv", st_out = "-", st_summary;
    double st_rate = 0.0, st_tau = 0.0;
    uint64_t st_seed = 0;
    st->add_option("--model,-m", st_model, "model path")->required();
    st->add_option("--input,-i", st_input,
                   "canonical CSV replay, or '-' for a line-delimited stdin feed");
    st->add_option("--format", st_fmt, "event format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    st->add_option("--out,-o", st_out, "event output path");
    st->add_option("--summary", st_summary, "JSON summary path");
    st->add_option("--rate", st_rate, "frame rate override (Hz)");
    st->add_option("--tau-blank", st_tau, "blank-gate threshold override");
    st->add_option("--seed", st_seed, "alignment seed");

    // sweep
    auto* sw = app.add_subcommand("sweep", "train/evaluate along one experimental axis");
    TrainFlags swf;
    add_train_options(sw, swf);
    std::string sw_axis, sw_values, sw_fmt = "csv", sw_out = "-";
    sw->add_option("--axis", sw_axis, "window or alignment")
        ->required()
        ->check(CLI::IsMember({"window", "alignment"}));
    sw->add_option("--values", sw_values, "comma-separated sweep values")->required();
    sw->add_option("--format", sw_fmt, "csv or json")->check(CLI::IsMember({"json", "csv"}));
    sw->add_option("--out,-o", sw_out, "output path");

    // info
    auto* in = app.add_subcommand("info", "print a model file's parameters and configuration");
    std::string in_model, in_fmt = "text";
    in->add_option("--model,-m", in_model, "model path")->required();
    in->add_option("--format", in_fmt, "text or json")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 1;
    }

    try {
        if (synth->parsed())
            return cmd_synth(sy_out, sy_seed, sy_rate, sy_profile, sy_seconds, sy_recs,
                             sy_continuous, sy_scenarios, sy_events, sy_gap_min, sy_gap_max,
                             sy_script);
        if (aug->parsed()) {
            ag_ranges.rotate = !ag_no_rotate;
            ag_ranges.stretch = !ag_no_stretch;
            ag_ranges.perturb = !ag_no_perturb;
            std::string sidecar = ag_sidecar;
            if (sidecar.empty() && ag_out != "-") sidecar = ag_out + ".sidecar.json";
            return cmd_augment(ag_data, ag_out, sidecar, ag_seed, ag_window, ag_stride, ag_as,
                               ag_ranges);
        }
        if (tr->parsed()) return cmd_train(tf);
        if (ev->parsed())
            return cmd_eval(ev_data, ev_model, ev_split, ev_continuous, ev_viterbi, ev_fmt,
                            ev_out, ev_tau, ev_seed, ev_have_seed, ev_hmm_data, ev_hmm_alpha);
        if (st->parsed())
            return cmd_stream(st_model, st_input, st_fmt, st_out, st_summary, st_rate, st_tau,
                              st_seed);
        if (sw->parsed()) return cmd_sweep(swf, sw_axis, sw_values, sw_fmt, sw_out);
        if (in->parsed()) return cmd_info(in_model, in_fmt);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
