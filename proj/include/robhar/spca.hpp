// Segment-wise point cloud augmentation: rotation on the horizontal plane
// about the vertical axis through the segment centroid, horizontal/vertical
// stretching, and perturbation. Applied to training segments only, with
// fresh parameters each epoch.

#pragma once

#include <cmath>

#include "robhar/pcloud.hpp"

namespace robhar {

// Sampling ranges and mode flags for the augmentation.
struct SpcaRanges {
    bool rotate = true;
    bool stretch = true;
    bool perturb = true;
    double stretch_min = 0.8;
    double stretch_max = 1.2;
    double perturb_bound = 0.05;  // meters, per component
    bool origin_relative_stretch = false;  // scale about the origin instead of the centroid
    bool per_point_jitter = false;         // Gaussian jitter instead of one shift per segment
    double jitter_sigma = 0.02;            // meters
};

// One concrete draw of augmentation parameters.
struct SpcaParams {
    double theta = 0.0;          // radians, [0, 2pi)
    double s_h = 1.0, s_v = 1.0;  // stretch factors, > 0
    double p[3] = {0.0, 0.0, 0.0};
    bool rotate = true;
    bool stretch = true;
    bool perturb = true;
    bool origin_relative_stretch = false;
    bool per_point_jitter = false;
    double jitter_sigma = 0.0;
};

inline SpcaParams sample_spca(const SpcaRanges& r, Rng& rng) {
    SpcaParams p;
    p.rotate = r.rotate;
    p.stretch = r.stretch;
    p.perturb = r.perturb;
    p.origin_relative_stretch = r.origin_relative_stretch;
    p.per_point_jitter = r.per_point_jitter;
    p.jitter_sigma = r.jitter_sigma;
    p.theta = rng.uniform(0.0, 2.0 * M_PI);
    p.s_h = rng.uniform(r.stretch_min, r.stretch_max);
    p.s_v = rng.uniform(r.stretch_min, r.stretch_max);
    for (double& c : p.p) c = rng.uniform(-r.perturb_bound, r.perturb_bound);
    return p;
}

// Rotates every point about the vertical axis through the segment centroid.
// z coordinates are untouched; the centroid is preserved.
inline Segment rotate_horizontal(const Segment& segment, double theta) {
    if (segment.frames.empty()) throw DataError("rotate_horizontal on an empty segment");
    const Point c = centroid(segment);
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    Segment out = segment;
    for (auto& frame : out.frames) {
        for (auto& p : frame.points) {
            const double dx = p.x - c.x;
            const double dy = p.y - c.y;
            p.x = c.x + ct * dx - st * dy;
            p.y = c.y + st * dx + ct * dy;
        }
    }
    return out;
}

// Scales horizontal offsets by s_h and vertical offsets by s_v. Default is
// centroid-relative (subject stays in place); origin_relative applies the
// factors to raw coordinates, which also moves the subject.
inline Segment stretch(const Segment& segment, double s_h, double s_v,
                       bool origin_relative = false) {
    if (s_h <= 0.0 || s_v <= 0.0) throw ConfigError("stretch factors must be > 0");
    if (s_h == 1.0 && s_v == 1.0) return segment;
    Segment out = segment;
    if (origin_relative) {
        for (auto& frame : out.frames) {
            for (auto& p : frame.points) {
                p.x *= s_h;
                p.y *= s_h;
                p.z *= s_v;
            }
        }
    } else {
        const Point c = centroid(segment);
        for (auto& frame : out.frames) {
            for (auto& p : frame.points) {
                p.x = c.x + s_h * (p.x - c.x);
                p.y = c.y + s_h * (p.y - c.y);
                p.z = c.z + s_v * (p.z - c.z);
            }
        }
    }
    return out;
}

// Translates the whole segment by p. Optional per-point Gaussian jitter mode
// draws an independent displacement for every point instead.
inline Segment perturb(const Segment& segment, const double p[3]) {
    Segment out = segment;
    for (auto& frame : out.frames) {
        for (auto& pt : frame.points) {
            pt.x += p[0];
            pt.y += p[1];
            pt.z += p[2];
        }
    }
    return out;
}

inline Segment perturb_jitter(const Segment& segment, double sigma, Rng& rng) {
    Segment out = segment;
    for (auto& frame : out.frames) {
        for (auto& pt : frame.points) {
            pt.x += rng.normal(0.0, sigma);
            pt.y += rng.normal(0.0, sigma);
            pt.z += rng.normal(0.0, sigma);
        }
    }
    return out;
}

// Full augmentation: rotate, then stretch, then perturb. Disabled
// sub-transforms are skipped; with everything off this is the identity.
inline Segment augment(const Segment& segment, const SpcaParams& params, Rng& rng) {
    Segment out = segment;
    if (params.rotate && params.theta != 0.0) out = rotate_horizontal(out, params.theta);
    if (params.stretch) out = stretch(out, params.s_h, params.s_v, params.origin_relative_stretch);
    if (params.perturb) {
        if (params.per_point_jitter)
            out = perturb_jitter(out, params.jitter_sigma, rng);
        else
            out = perturb(out, params.p);
    }
    return out;
}

}  // namespace robhar
