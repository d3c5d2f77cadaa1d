// Dataset ingestion and persistence. Datasets travel as canonical CSV
// (one point per row); trained models are a small binary container with a
// JSON metadata header, 32-bit little-endian parameter blocks in
// registration order, an optional HMM block and a CRC32 trailer. All round
// trips are bit-exact.

#pragma once

#include <bit>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "robhar/hmm.hpp"
#include "robhar/model.hpp"
#include "robhar/pcloud.hpp"

namespace robhar {

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts are not supported");

struct Recording {
    std::string id;
    std::vector<Frame> frames;

    // Window-level class of a discrete recording.
    int label() const {
        std::vector<int> ls;
        ls.reserve(frames.size());
        for (const auto& f : frames) ls.push_back(f.label);
        return majority_label(ls);
    }
};

struct Dataset {
    std::vector<Recording> recordings;
    std::vector<std::string> class_names;  // index = class id

    int id_of(const std::string& name) const {
        for (std::size_t i = 0; i < class_names.size(); ++i)
            if (class_names[i] == name) return static_cast<int>(i);
        return kNoLabel;
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, long line_no, const char* what) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw DataError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
    return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

inline constexpr const char* kCsvHeader = "recording_id,frame_index,timestamp_s,x_m,y_m,z_m,label";

// Loads a canonical dataset. Rows are grouped into frames by
// (recording_id, frame_index); class ids are assigned to the sorted set of
// label names seen in the file.
inline Dataset load_dataset(std::istream& in) {
    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty dataset: missing header");
    ++line_no;
    if (line.ends_with('\r')) line.pop_back();
    if (line != kCsvHeader)
        throw DataError("line 1: unexpected header '" + line + "'");

    struct RawPoint {
        long frame_index;
        double ts, x, y, z;
        std::string label;
    };
    std::vector<std::pair<std::string, std::vector<RawPoint>>> recs;
    std::map<std::string, std::size_t> rec_index;
    std::vector<std::string> names;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.ends_with('\r')) line.pop_back();
        if (line.empty()) continue;
        auto cols = detail::split_csv(line);
        if (cols.size() != 7)
            throw DataError("line " + std::to_string(line_no) + ": expected 7 columns, got " +
                            std::to_string(cols.size()));
        RawPoint p;
        p.frame_index = static_cast<long>(detail::parse_double(cols[1], line_no, "frame_index"));
        p.ts = detail::parse_double(cols[2], line_no, "timestamp_s");
        p.x = detail::parse_double(cols[3], line_no, "x_m");
        p.y = detail::parse_double(cols[4], line_no, "y_m");
        p.z = detail::parse_double(cols[5], line_no, "z_m");
        p.label = cols[6];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw DataError("line " + std::to_string(line_no) + ": non-finite coordinate");

        auto [it, inserted] = rec_index.try_emplace(cols[0], recs.size());
        if (inserted) recs.push_back({cols[0], {}});
        auto& rec = recs[it->second].second;
        if (!rec.empty() && p.frame_index < rec.back().frame_index)
            throw DataError("line " + std::to_string(line_no) + ": frame_index decreases in recording '" +
                            cols[0] + "'");
        rec.push_back(std::move(p));
        if (!cols[6].empty() && cols[6] != "eps" &&
            std::find(names.begin(), names.end(), cols[6]) == names.end())
            names.push_back(cols[6]);
    }

    std::sort(names.begin(), names.end());
    Dataset ds;
    ds.class_names = names;

    for (auto& [id, pts] : recs) {
        Recording rec;
        rec.id = id;
        Frame cur;
        long cur_index = -1;
        bool open = false;
        auto close_frame = [&]() {
            if (!open) return;
            if (cur.points.empty()) throw DataError("recording '" + id + "': empty frame");
            if (!rec.frames.empty() && cur.timestamp <= rec.frames.back().timestamp)
                throw DataError("recording '" + id + "': timestamps not strictly increasing");
            rec.frames.push_back(std::move(cur));
            cur = Frame{};
        };
        for (const auto& p : pts) {
            if (!open || p.frame_index != cur_index) {
                close_frame();
                open = true;
                cur_index = p.frame_index;
                cur.timestamp = p.ts;
                cur.label = p.label.empty() ? kNoLabel
                            : p.label == "eps" ? kBlankLabel
                                               : ds.id_of(p.label);
            }
            cur.points.push_back({p.x, p.y, p.z});
        }
        close_frame();
        ds.recordings.push_back(std::move(rec));
    }
    return ds;
}

inline Dataset load_dataset(const std::string& path) {
    if (path == "-") return load_dataset(std::cin);
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset '" + path + "'");
    return load_dataset(in);
}

inline void save_dataset(std::ostream& out, const Dataset& ds) {
    out << kCsvHeader << "\n";
    for (const auto& rec : ds.recordings) {
        long fi = 0;
        for (const auto& f : rec.frames) {
            std::string label;
            if (f.label == kBlankLabel)
                label = "eps";
            else if (f.label >= 0 && f.label < static_cast<int>(ds.class_names.size()))
                label = ds.class_names[f.label];
            for (const auto& p : f.points) {
                out << rec.id << ',' << fi << ',' << detail::format_double(f.timestamp) << ','
                    << detail::format_double(p.x) << ',' << detail::format_double(p.y) << ','
                    << detail::format_double(p.z) << ',' << label << "\n";
            }
            ++fi;
        }
    }
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
    if (path == "-") {
        save_dataset(std::cout, ds);
        return;
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset '" + path + "'");
    save_dataset(out, ds);
}

// Re-indexes a dataset's labels onto a target class-name table (usually a
// model's). Datasets only know the names that happen to appear in the file,
// so ids must be reconciled before predictions and truth can be compared.
inline void remap_labels(Dataset& ds, const std::vector<std::string>& target) {
    std::vector<int> map(ds.class_names.size(), -1);
    for (std::size_t i = 0; i < ds.class_names.size(); ++i) {
        const auto it = std::find(target.begin(), target.end(), ds.class_names[i]);
        if (it == target.end())
            throw DataError("dataset class '" + ds.class_names[i] + "' is unknown to the model");
        map[i] = static_cast<int>(it - target.begin());
    }
    for (auto& rec : ds.recordings)
        for (auto& f : rec.frames)
            if (f.label >= 0) f.label = map[f.label];
    ds.class_names = target;
}

// Resolves a data path against ROBHAR_DATA_DIR when the path is relative
// and does not exist as given.
inline std::string resolve_data_path(const std::string& path) {
    namespace fs = std::filesystem;
    if (path == "-" || fs::path(path).is_absolute() || fs::exists(path)) return path;
    if (const char* dir = std::getenv("ROBHAR_DATA_DIR")) {
        fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;
}

// ---- model persistence ----

inline uint32_t crc32(const unsigned char* data, std::size_t n, uint32_t seed = 0) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int b = 0; b < 8; ++b) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t crc = ~seed;
    for (std::size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return ~crc;
}

struct ModelMeta {
    std::vector<std::string> class_names;
    uint64_t seed = 0;
    double window_seconds = 2.0;
    double stride_seconds = 1.0 / 3.0;
    double rate_hz = 30.0;
    double tau = 0.5;
    double split_train = 0.7, split_val = 0.1, split_test = 0.2;
};

inline constexpr char kModelMagic[8] = {'R', 'B', 'H', 'A', 'R', 'M', 'D', '1'};
inline constexpr uint32_t kModelVersion = 1;

namespace detail {

inline nlohmann::json config_to_json(const ModelConfig& c) {
    return {{"as", c.lpn.as},     {"mlp", c.lpn.mlp}, {"tnet_conv", c.lpn.tnet_conv},
            {"tnet_fc", c.lpn.tnet_fc}, {"h_dir", c.h_dir}, {"head", c.head},
            {"k", c.k}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.lpn.as = j.at("as").get<int>();
    c.lpn.mlp = j.at("mlp").get<std::vector<int>>();
    c.lpn.tnet_conv = j.at("tnet_conv").get<std::vector<int>>();
    c.lpn.tnet_fc = j.at("tnet_fc").get<int>();
    c.h_dir = j.at("h_dir").get<int>();
    c.head = j.at("head").get<int>();
    c.k = j.at("k").get<int>();
    return c;
}

template <typename T>
void put(std::string& buf, T v) {
    buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& buf, std::size_t& off) {
    if (off + sizeof(T) > buf.size()) throw DataError("model file truncated");
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace detail

inline void save_model(const std::string& path, const HarModel& model, const ModelMeta& meta,
                       const HMMParams* hmm = nullptr) {
    nlohmann::json j = {
        {"schema_version", 1},
        {"class_names", meta.class_names},
        {"seed", meta.seed},
        {"config", detail::config_to_json(model.cfg)},
        {"window_seconds", meta.window_seconds},
        {"stride_seconds", meta.stride_seconds},
        {"rate_hz", meta.rate_hz},
        {"tau", meta.tau},
        {"split", {meta.split_train, meta.split_val, meta.split_test}},
        {"param_count", model.store.params.size()},
        {"state_count", model.store.state.size()},
    };
    const std::string meta_str = j.dump();

    std::string buf;
    buf.append(kModelMagic, sizeof(kModelMagic));
    detail::put<uint32_t>(buf, kModelVersion);
    detail::put<uint32_t>(buf, static_cast<uint32_t>(meta_str.size()));
    buf.append(meta_str);
    detail::put<uint64_t>(buf, model.store.params.size());
    for (double v : model.store.params) detail::put<float>(buf, static_cast<float>(v));
    detail::put<uint64_t>(buf, model.store.state.size());
    for (double v : model.store.state) detail::put<float>(buf, static_cast<float>(v));
    detail::put<uint8_t>(buf, hmm ? 1 : 0);
    if (hmm) {
        detail::put<uint32_t>(buf, static_cast<uint32_t>(hmm->k));
        for (double v : hmm->pi) detail::put<double>(buf, v);
        for (double v : hmm->a) detail::put<double>(buf, v);
        for (double v : hmm->b) detail::put<double>(buf, v);
    }
    detail::put<uint32_t>(buf, crc32(reinterpret_cast<const unsigned char*>(buf.data()), buf.size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model '" + path + "'");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("failed writing model '" + path + "'");
}

struct LoadedModel {
    HarModel model;
    ModelMeta meta;
    std::optional<HMMParams> hmm;
};

inline LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string buf = ss.str();

    if (buf.size() < sizeof(kModelMagic) + 12) throw DataError("model file truncated");
    if (std::memcmp(buf.data(), kModelMagic, sizeof(kModelMagic)) != 0)
        throw DataError("not a model file (bad magic)");
    const uint32_t stored_crc = [&] {
        uint32_t v;
        std::memcpy(&v, buf.data() + buf.size() - 4, 4);
        return v;
    }();
    const uint32_t computed =
        crc32(reinterpret_cast<const unsigned char*>(buf.data()), buf.size() - 4);
    if (stored_crc != computed) throw DataError("model file checksum mismatch");

    std::size_t off = sizeof(kModelMagic);
    const uint32_t version = detail::take<uint32_t>(buf, off);
    if (version != kModelVersion)
        throw DataError("unsupported model version " + std::to_string(version));
    const uint32_t meta_len = detail::take<uint32_t>(buf, off);
    if (off + meta_len > buf.size()) throw DataError("model file truncated");
    nlohmann::json j = nlohmann::json::parse(buf.substr(off, meta_len));
    off += meta_len;

    LoadedModel lm;
    lm.meta.class_names = j.at("class_names").get<std::vector<std::string>>();
    lm.meta.seed = j.at("seed").get<uint64_t>();
    lm.meta.window_seconds = j.at("window_seconds").get<double>();
    lm.meta.stride_seconds = j.at("stride_seconds").get<double>();
    lm.meta.rate_hz = j.at("rate_hz").get<double>();
    lm.meta.tau = j.at("tau").get<double>();
    const auto split = j.at("split").get<std::vector<double>>();
    lm.meta.split_train = split.at(0);
    lm.meta.split_val = split.at(1);
    lm.meta.split_test = split.at(2);

    lm.model = HarModel::build(detail::config_from_json(j.at("config")), 0);
    const uint64_t n_params = detail::take<uint64_t>(buf, off);
    if (n_params != j.at("param_count").get<uint64_t>() ||
        n_params != lm.model.store.params.size())
        throw DataError("model parameter count mismatch");
    for (uint64_t i = 0; i < n_params; ++i)
        lm.model.store.params[i] = static_cast<double>(detail::take<float>(buf, off));
    const uint64_t n_state = detail::take<uint64_t>(buf, off);
    if (n_state != lm.model.store.state.size()) throw DataError("model state count mismatch");
    for (uint64_t i = 0; i < n_state; ++i)
        lm.model.store.state[i] = static_cast<double>(detail::take<float>(buf, off));
    if (!all_finite(lm.model.store.params) || !all_finite(lm.model.store.state))
        throw DataError("model contains non-finite values");

    const uint8_t has_hmm = detail::take<uint8_t>(buf, off);
    if (has_hmm) {
        HMMParams h;
        h.k = static_cast<int>(detail::take<uint32_t>(buf, off));
        h.pi.resize(h.k);
        h.a.resize(static_cast<std::size_t>(h.k) * h.k);
        h.b.resize(static_cast<std::size_t>(h.k) * h.k);
        for (double& v : h.pi) v = detail::take<double>(buf, off);
        for (double& v : h.a) v = detail::take<double>(buf, off);
        for (double& v : h.b) v = detail::take<double>(buf, off);
        h.validate();
        lm.hmm = std::move(h);
    }
    if (off + 4 != buf.size()) throw DataError("model file has trailing bytes");
    return lm;
}

// ---- RadHAR-style text adapter ----

// Best-effort converter for the public dataset's per-point text format
// ("point_id:", "x:", "y:", "z:", with header secs/nsecs). A point_id of 0
// starts a new frame. The whole file becomes one recording; label_name, if
// given, labels every frame.
inline Dataset convert_radhar(const std::string& path, const std::string& label_name = "") {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open radhar file '" + path + "'");

    Dataset ds;
    if (!label_name.empty()) ds.class_names.push_back(label_name);
    Recording rec;
    rec.id = std::filesystem::path(path).stem().string();

    Frame cur;
    bool open = false;
    double secs = 0.0, nsecs = 0.0;
    bool have_time = false;
    double x = 0, y = 0, z = 0;
    int have_xyz = 0;
    long frame_count = 0;

    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    auto close_frame = [&]() {
        if (!open) return;
        have_xyz = 0;
        if (!cur.points.empty()) {
            if (!have_time) cur.timestamp = frame_count / 30.0;
            if (!rec.frames.empty() && cur.timestamp <= rec.frames.back().timestamp)
                cur.timestamp = rec.frames.back().timestamp + 1e-4;
            cur.label = label_name.empty() ? kNoLabel : 0;
            rec.frames.push_back(std::move(cur));
            ++frame_count;
        }
        cur = Frame{};
        open = false;
    };

    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        auto starts = [&](const char* prefix) { return t.rfind(prefix, 0) == 0; };
        auto value = [&](const char* prefix) {
            return detail::parse_double(trim(t.substr(std::strlen(prefix))), line_no, prefix);
        };
        if (starts("point_id:")) {
            const long pid = static_cast<long>(value("point_id:"));
            if (pid == 0) {
                close_frame();
                open = true;
                if (have_time) cur.timestamp = secs + nsecs * 1e-9;
            }
        } else if (starts("secs:")) {
            secs = value("secs:");
            have_time = true;
        } else if (starts("nsecs:")) {
            nsecs = value("nsecs:");
        } else if (starts("x:")) {
            x = value("x:");
            have_xyz |= 1;
        } else if (starts("y:")) {
            y = value("y:");
            have_xyz |= 2;
        } else if (starts("z:")) {
            z = value("z:");
            have_xyz |= 4;
        }
        if (have_xyz == 7) {
            if (open) cur.points.push_back({x, y, z});
            have_xyz = 0;
        }
    }
    close_frame();
    if (!rec.frames.empty()) ds.recordings.push_back(std::move(rec));
    return ds;
}

}  // namespace robhar
