// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "percep/percep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace jointvid::percep {

namespace {

struct AxisRange {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    float normalize(double v) const {
        if (!(hi > lo)) return 0.5f;
        return float(std::clamp((v - lo) / (hi - lo), 0.0, 1.0));
    }
};

Vec3 color_coords(const Vec3& p) { return {p.x(), p.y(), 1.0 / p.z()}; }

Color hsv(double h, double s, double v) {
    const double c = v * s;
    const double hp = std::fmod(h, 1.0) * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = v - c;
    return {float(r + m), float(g + m), float(b + m)};
}

}  // namespace

LayerConfig LayerConfig::from_layers(const std::string& layers) {
    LayerConfig cfg;
    cfg.pointmap = cfg.segmentation = cfg.tracks = false;
    std::stringstream ss(layers);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "seg") cfg.segmentation = true;
        else if (item == "xyz") cfg.pointmap = true;
        else if (item == "tracks") cfg.tracks = true;
        else if (item == "unified") cfg.pointmap = cfg.segmentation = cfg.tracks = true;
        else if (!item.empty()) fail(ErrorKind::Config, "unknown perception layer '" + item + "'");
    }
    return cfg;
}

std::string LayerConfig::layers() const {
    std::vector<std::string> parts;
    if (segmentation) parts.push_back("seg");
    if (pointmap) parts.push_back("xyz");
    if (tracks) parts.push_back("tracks");
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
    return out;
}

Color instance_hue(int label) { return hsv(0.13 + 0.38 * label, 0.85, 1.0); }

std::vector<SampledPoint> sample_points(const world::SceneTruth& truth, int n_points,
                                        std::uint64_t seed) {
    require(n_points >= 1, "n_points must be at least 1");
    std::vector<std::size_t> masked;
    const std::size_t plane = std::size_t(truth.height) * truth.width;
    for (std::size_t i = 0; i < plane; ++i) {
        if (truth.masks[i] != 0) masked.push_back(i);
    }
    if (masked.empty()) fail(ErrorKind::InvalidArgument, "no physical subject");

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> chosen;
    std::sample(masked.begin(), masked.end(), std::back_inserter(chosen),
                std::min<std::size_t>(std::size_t(n_points), masked.size()), rng);
    std::vector<SampledPoint> points;
    points.reserve(chosen.size());
    for (std::size_t i : chosen) {
        const int y = int(i / truth.width), x = int(i % truth.width);
        points.push_back(SampledPoint{x, y, truth.masks[i], truth.point(0, y, x)});
    }
    return points;
}

std::vector<Color> assign_colors(std::span<const Vec3> points) {
    std::array<AxisRange, 3> range;
    for (const Vec3& p : points) {
        require(p.z() > 0.0, "track point must lie in front of the camera");
        const Vec3 c = color_coords(p);
        for (int k = 0; k < 3; ++k) range[k].add(c[k]);
    }
    std::vector<Color> colors;
    colors.reserve(points.size());
    for (const Vec3& p : points) {
        const Vec3 c = color_coords(p);
        colors.push_back({range[0].normalize(c[0]), range[1].normalize(c[1]), range[2].normalize(c[2])});
    }
    return colors;
}

PercepClip render_percep(std::span<const ColoredTrack> tracks, const world::SceneTruth& truth,
                         const world::Camera& camera, const LayerConfig& config) {
    const int F = truth.frames, H = truth.height, W = truth.width;
    PercepClip clip;
    clip.layers = config;
    clip.n_points = int(tracks.size());
    clip.video = Video(F, H, W);
    Video& v = clip.video;
    for (int c = 0; c < 3; ++c) {
        std::fill_n(v.data.begin() + std::ptrdiff_t(c) * F * H * W, std::size_t(F) * H * W,
                    config.background[c]);
    }

    // Pointmap layer shares the frame-0 normalization basis across the clip.
    std::array<AxisRange, 3> basis;
    if (config.pointmap) {
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                const Vec3 p = truth.point(0, y, x);
                if (p.z() <= 0.0) continue;
                const Vec3 c = color_coords(p);
                for (int k = 0; k < 3; ++k) basis[k].add(c[k]);
            }
        }
    }

    const double radius = config.radius_for_width(W);
    const int reach = int(std::ceil(radius));

    for (int f = 0; f < F; ++f) {
        if (config.pointmap) {
            for (int y = 0; y < H; ++y) {
                for (int x = 0; x < W; ++x) {
                    const Vec3 p = truth.point(f, y, x);
                    if (p.z() <= 0.0) continue;
                    const Vec3 c = color_coords(p);
                    for (int k = 0; k < 3; ++k) v.at(k, f, y, x) = basis[k].normalize(c[k]);
                }
            }
        }
        if (config.segmentation) {
            for (int y = 0; y < H; ++y) {
                for (int x = 0; x < W; ++x) {
                    const int label = truth.mask(f, y, x);
                    if (label == 0) continue;
                    const Color hue = instance_hue(label);
                    for (int k = 0; k < 3; ++k) {
                        float& dst = v.at(k, f, y, x);
                        dst = (1.0f - config.seg_alpha) * dst + config.seg_alpha * hue[k];
                    }
                }
            }
        }
        if (config.tracks && !tracks.empty()) {
            // Far points first so nearer discs end up on top.
            std::vector<std::size_t> order(tracks.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return tracks[a].track.positions[f].z() > tracks[b].track.positions[f].z();
            });
            for (std::size_t idx : order) {
                const Vec3& p = tracks[idx].track.positions[f];
                if (p.z() <= 0.0) continue;
                const Eigen::Vector2d uv = camera.project(p);
                const long cu = std::lround(uv.x()), cv = std::lround(uv.y());
                for (long y = cv - reach; y <= cv + reach; ++y) {
                    for (long x = cu - reach; x <= cu + reach; ++x) {
                        if (x < 0 || y < 0 || x >= W || y >= H) continue;
                        const double dx = double(x - cu), dy = double(y - cv);
                        if (dx * dx + dy * dy > radius * radius) continue;
                        for (int k = 0; k < 3; ++k) v.at(k, f, int(y), int(x)) = tracks[idx].color[k];
                    }
                }
            }
        }
    }
    return clip;
}

PercepClip encode(const world::SceneTruth& truth, const world::Camera& camera,
                  const LayerConfig& config) {
    std::vector<ColoredTrack> colored;
    if (config.tracks) {
        const auto sampled = sample_points(truth, config.n_points, config.seed);
        std::vector<Vec3> points;
        std::vector<int> labels;
        for (const SampledPoint& s : sampled) {
            points.push_back(s.position);
            labels.push_back(s.label);
        }
        const auto tracks = world::propagate_tracks(truth, points, labels);
        const auto colors = assign_colors(points);
        for (std::size_t i = 0; i < tracks.size(); ++i) colored.push_back({tracks[i], colors[i]});
    }
    return render_percep(colored, truth, camera, config);
}

}  // namespace jointvid::percep
