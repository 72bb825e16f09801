// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "harness/toypc.hpp"

#include <cmath>
#include <map>

#include <opencv2/imgproc.hpp>

#include "common/error.hpp"

namespace jointvid::harness {

std::array<double, 4> box_outline(const world::Camera& camera, double box_extent) {
    const double z = camera.distance - box_extent;
    const auto lo = camera.project({-box_extent, -box_extent, z});
    const auto hi = camera.project({box_extent, box_extent, z});
    return {lo.x(), lo.y(), hi.x(), hi.y()};
}

std::vector<Blob> detect_blobs(const Video& video, int f, const DetectorConfig& config,
                               const world::Camera& camera, double box_extent) {
    require(f >= 0 && f < video.frames, "frame index out of range");
    const int min_component = config.scaled(config.min_component, video.height, video.width);
    const int min_area = config.scaled(config.min_area, video.height, video.width);
    const auto box = box_outline(camera, box_extent);

    std::vector<Blob> blobs;
    for (int k = 0; k < world::kPaletteSize; ++k) {
        const auto color = world::object_color(k);
        cv::Mat mask(video.height, video.width, CV_8U, cv::Scalar(0));
        for (int y = 0; y < video.height; ++y) {
            for (int x = 0; x < video.width; ++x) {
                double d = 0.0;
                for (int c = 0; c < 3; ++c) d = std::max(d, std::abs(double(video.at(c, f, y, x)) - color[c]));
                if (d <= config.color_tolerance) mask.at<uchar>(y, x) = 1;
            }
        }
        cv::Mat labels, stats, centroids;
        const int n = cv::connectedComponentsWithStats(mask, labels, stats, centroids, 8, CV_32S);
        Blob blob;
        blob.color = k;
        double sx = 0.0, sy = 0.0;
        std::vector<bool> keep(std::size_t(n), false);
        for (int c = 1; c < n; ++c) {
            const int area = stats.at<int>(c, cv::CC_STAT_AREA);
            if (area < min_component) continue;
            keep[std::size_t(c)] = true;
            blob.area += area;
            sx += centroids.at<double>(c, 0) * area;
            sy += centroids.at<double>(c, 1) * area;
        }
        if (blob.area < min_area) continue;
        blob.cx = sx / blob.area;
        blob.cy = sy / blob.area;
        for (int y = 0; y < video.height && !blob.outside_box; ++y) {
            for (int x = 0; x < video.width; ++x) {
                if (!keep[std::size_t(labels.at<int>(y, x))]) continue;
                if (x < box[0] - config.slack || x > box[2] + config.slack || y < box[1] - config.slack ||
                    y > box[3] + config.slack) {
                    blob.outside_box = true;
                    break;
                }
            }
        }
        blobs.push_back(blob);
    }
    return blobs;
}

ClipMetrics evaluate_clip(const EvalClip& clip, const DetectorConfig& config) {
    ClipMetrics m;
    m.id = clip.id;
    const int F = clip.video.frames;
    require(F >= 1, "clip has no frames");
    int penetrating = 0, stable = 0;
    std::vector<std::map<int, std::array<double, 2>>> centers(static_cast<std::size_t>(F));
    for (int f = 0; f < F; ++f) {
        auto blobs = detect_blobs(clip.video, f, config, clip.camera, clip.box_extent);
        bool out = false;
        for (const auto& b : blobs) {
            out = out || b.outside_box;
            centers[std::size_t(f)][b.color] = {b.cx, b.cy};
        }
        penetrating += out ? 1 : 0;
        stable += int(blobs.size()) == clip.expected_count ? 1 : 0;
    }
    m.wall_penetration = double(penetrating) / F;
    m.count_stability = double(stable) / F;
    double sum = 0.0;
    int count = 0;
    for (int f = 1; f + 1 < F; ++f) {
        for (const auto& [color, c] : centers[std::size_t(f)]) {
            auto prev = centers[std::size_t(f - 1)].find(color);
            auto next = centers[std::size_t(f + 1)].find(color);
            if (prev == centers[std::size_t(f - 1)].end() || next == centers[std::size_t(f + 1)].end()) continue;
            const double ax = next->second[0] - 2.0 * c[0] + prev->second[0];
            const double ay = next->second[1] - 2.0 * c[1] + prev->second[1];
            sum += std::hypot(ax, ay);
            ++count;
        }
    }
    m.smoothness = count ? sum / count : 0.0;
    return m;
}

ToyPCReport evaluate_toy_pc(const std::vector<EvalClip>& clips, const DetectorConfig& config) {
    ToyPCReport r;
    for (const auto& c : clips) {
        r.clips.push_back(evaluate_clip(c, config));
        r.wall_penetration += r.clips.back().wall_penetration;
        r.count_stability += r.clips.back().count_stability;
        r.smoothness += r.clips.back().smoothness;
    }
    if (!clips.empty()) {
        r.wall_penetration /= double(clips.size());
        r.count_stability /= double(clips.size());
        r.smoothness /= double(clips.size());
    }
    return r;
}

}  // namespace jointvid::harness
