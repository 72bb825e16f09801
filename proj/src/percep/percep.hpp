// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common/video.hpp"
#include "world/scene.hpp"

namespace jointvid::percep {

using world::Vec3;
using Color = std::array<float, 3>;

/// Which layers are composited into the pseudo-RGB frames.
struct LayerConfig {
    bool pointmap = true;
    bool segmentation = true;
    bool tracks = true;
    int n_points = 256;
    /// Disc radius in pixels at a 64-pixel-wide frame; scaled with width.
    double point_radius = 1.0;
    float seg_alpha = 0.5f;
    Color background{0.0f, 0.0f, 0.0f};
    std::uint64_t seed = 0;

    /// Parses a comma list drawn from {seg, xyz, tracks}, or "unified".
    static LayerConfig from_layers(const std::string& layers);
    std::string layers() const;
    double radius_for_width(int width) const { return point_radius * width / 64.0; }
};

struct SampledPoint {
    int x = 0;
    int y = 0;
    int label = 0;
    Vec3 position;  // camera frame, frame 0
};

/// Uniformly samples min(n_points, masked pixel count) distinct masked pixels
/// of frame 0 and lifts them to 3D through the pointmap. Throws "no physical
/// subject" when frame 0 has no masked pixel.
std::vector<SampledPoint> sample_points(const world::SceneTruth& truth, int n_points,
                                        std::uint64_t seed);

/// Colors from frame-0 (x, y, 1/z), each axis min-max normalized over the
/// point set; a degenerate axis maps to 0.5.
std::vector<Color> assign_colors(std::span<const Vec3> points);

struct ColoredTrack {
    world::Track track;
    Color color;
};

struct PercepClip {
    Video video;
    LayerConfig layers;
    int n_points = 0;
};

PercepClip render_percep(std::span<const ColoredTrack> tracks, const world::SceneTruth& truth,
                         const world::Camera& camera, const LayerConfig& config);

/// sample_points -> propagate_tracks -> assign_colors -> render_percep.
PercepClip encode(const world::SceneTruth& truth, const world::Camera& camera,
                  const LayerConfig& config);

/// Hue used to tint instance `label` in the segmentation layer.
Color instance_hue(int label);

}  // namespace jointvid::percep
