// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "common/video.hpp"
#include "harness/config.hpp"
#include "world/scene.hpp"

namespace jointvid::harness {

/// A colored blob: all kept pixels within tolerance of one palette color.
struct Blob {
    int color = 0;
    int area = 0;
    double cx = 0.0;
    double cy = 0.0;
    bool outside_box = false;
};

/// Palette-color blobs of frame `f` whose kept area reaches the scaled
/// minimum. Connected components smaller than the scaled minimum are dropped
/// first.
std::vector<Blob> detect_blobs(const Video& video, int f, const DetectorConfig& config,
                               const world::Camera& camera, double box_extent);

/// Image rectangle (x0, y0, x1, y1) covered by the box's front face.
std::array<double, 4> box_outline(const world::Camera& camera, double box_extent);

struct EvalClip {
    std::string id;
    Video video;
    int expected_count = 1;
    world::Camera camera;
    double box_extent = 1.0;
};

struct ClipMetrics {
    std::string id;
    double wall_penetration = 0.0;  // fraction of frames with a blob past the box outline
    double count_stability = 0.0;   // fraction of frames showing the expected object count
    double smoothness = 0.0;        // mean |second difference| of blob centroids, pixels
};

struct ToyPCReport {
    std::vector<ClipMetrics> clips;
    double wall_penetration = 0.0;
    double count_stability = 0.0;
    double smoothness = 0.0;
};

ClipMetrics evaluate_clip(const EvalClip& clip, const DetectorConfig& config);
ToyPCReport evaluate_toy_pc(const std::vector<EvalClip>& clips, const DetectorConfig& config);

}  // namespace jointvid::harness
