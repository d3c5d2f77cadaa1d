// Domain types for radar point cloud streams: frames of variable point
// count, frames aligned to a fixed size AS by hybrid up/down-sampling,
// and (L, AS, 3) segments cut by a sliding window.

#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <vector>

#include "robhar/common.hpp"

namespace robhar {

struct Point {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// One radar sweep. Point count varies frame to frame (possibly zero).
struct Frame {
    double timestamp = 0.0;
    std::vector<Point> points;
    int label = kNoLabel;
};

// A frame resampled to exactly AS points.
struct AlignedFrame {
    double timestamp = 0.0;
    std::vector<Point> points;
    int label = kNoLabel;
};

// L consecutive aligned frames; the unit of classification.
// label is the window-level class for discrete data; per-frame labels
// stay on the frames for continuous data.
struct Segment {
    std::vector<AlignedFrame> frames;
    int label = kNoLabel;

    int length() const { return static_cast<int>(frames.size()); }
    int alignment_size() const { return frames.empty() ? 0 : static_cast<int>(frames[0].points.size()); }
};

// Most frequent label in a sequence; ties go to the smaller label id,
// so the blank sentinel wins a tie against any real class.
inline int majority_label(std::span<const int> labels) {
    if (labels.empty()) return kNoLabel;
    std::map<int, int> counts;
    for (int l : labels) counts[l]++;
    int best = labels[0];
    int best_count = 0;
    for (const auto& [label, count] : counts) {
        if (count > best_count) {
            best = label;
            best_count = count;
        }
    }
    return best;
}

// Hybrid alignment: upsampling randomly replicates points until the frame
// holds AS points; downsampling keeps a uniformly random size-AS subset.
inline AlignedFrame align_frame(const Frame& frame, int as, Rng& rng) {
    if (as < 1) throw ConfigError("alignment size must be >= 1");
    const int n = static_cast<int>(frame.points.size());
    if (n == 0) throw DataError("cannot align an empty frame");

    AlignedFrame out;
    out.timestamp = frame.timestamp;
    out.label = frame.label;

    if (n == as) {
        out.points = frame.points;
    } else if (n < as) {
        out.points = frame.points;
        out.points.reserve(as);
        for (int i = n; i < as; ++i)
            out.points.push_back(frame.points[rng.uniform_int(n)]);
    } else {
        // Partial Fisher-Yates: the first AS slots end up a uniform
        // subset without replacement.
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        for (int i = 0; i < as; ++i)
            std::swap(idx[i], idx[i + rng.uniform_int(n - i)]);
        out.points.reserve(as);
        for (int i = 0; i < as; ++i) out.points.push_back(frame.points[idx[i]]);
    }
    return out;
}

// Sliding windows: segment i covers frames [i*stride, i*stride + L).
// Inputs shorter than L yield no segments.
inline std::vector<Segment> window_segments(std::span<const AlignedFrame> frames, int window_len,
                                            int stride) {
    if (window_len < 1 || stride < 1) throw ConfigError("window length and stride must be >= 1");
    std::vector<Segment> out;
    const int n = static_cast<int>(frames.size());
    if (n < window_len) return out;
    const int count = (n - window_len) / stride + 1;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        Segment seg;
        seg.frames.assign(frames.begin() + i * stride, frames.begin() + i * stride + window_len);
        std::vector<int> labels;
        labels.reserve(window_len);
        for (const auto& f : seg.frames) labels.push_back(f.label);
        seg.label = majority_label(labels);
        out.push_back(std::move(seg));
    }
    return out;
}

// Arithmetic mean of all L*AS points.
inline Point centroid(const Segment& segment) {
    double sx = 0.0, sy = 0.0, sz = 0.0;
    long n = 0;
    for (const auto& frame : segment.frames) {
        for (const auto& p : frame.points) {
            sx += p.x;
            sy += p.y;
            sz += p.z;
            ++n;
        }
    }
    if (n == 0) throw DataError("centroid of an empty segment");
    return Point{sx / n, sy / n, sz / n};
}

}  // namespace robhar
