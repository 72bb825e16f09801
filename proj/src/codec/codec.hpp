// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include "common/video.hpp"

namespace jointvid::codec {

/// Space/time-to-depth rearrangement with a fixed affine rescale. Stands in for
/// a learned video autoencoder while keeping its latent shape contract.
struct CodecConfig {
    int temporal_factor = 2;
    int spatial_factor = 2;
    double shift = 0.5;
    double scale = 0.5;

    int latent_channels(int pixel_channels = 3) const {
        return pixel_channels * temporal_factor * spatial_factor * spatial_factor;
    }
};

struct LatentBlock {
    torch::Tensor data;  // [c, f, h, w]
    CodecConfig config;
};

class LatentCodec {
public:
    explicit LatentCodec(CodecConfig config = {});

    const CodecConfig& config() const { return config_; }

    /// [3, F, H, W] pixels (unbatched) or [B, 3, F, H, W] to latents.
    torch::Tensor encode(const torch::Tensor& pixels) const;
    torch::Tensor decode(const torch::Tensor& latents) const;

    LatentBlock encode(const Video& video) const;
    Video decode(const LatentBlock& latent) const;

    /// Latent shape [c, f, h, w] for a pixel clip of the given size.
    std::vector<int64_t> latent_shape(int frames, int height, int width) const;

private:
    void check_divisible(int64_t frames, int64_t height, int64_t width) const;
    CodecConfig config_;
};

torch::Tensor to_tensor(const Video& video);
Video to_video(const torch::Tensor& pixels);

}  // namespace jointvid::codec
