// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "common/error.hpp"

namespace jointvid {

/// Planar RGB video, channel-major [3, F, H, W], values nominally in [0, 1].
/// Used for both the RGB clip and its pseudo-RGB perception companion.
struct Video {
    int frames = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    Video() = default;
    Video(int f, int h, int w, float fill = 0.0f)
        : frames(f), height(h), width(w), data(std::size_t(3) * f * h * w, fill) {
        require(f > 0 && h > 0 && w > 0, "video dimensions must be positive");
    }

    std::size_t index(int c, int f, int y, int x) const {
        return ((std::size_t(c) * frames + f) * height + y) * width + x;
    }
    float& at(int c, int f, int y, int x) { return data[index(c, f, y, x)]; }
    float at(int c, int f, int y, int x) const { return data[index(c, f, y, x)]; }

    bool same_shape(const Video& o) const {
        return frames == o.frames && height == o.height && width == o.width;
    }
};

}  // namespace jointvid
