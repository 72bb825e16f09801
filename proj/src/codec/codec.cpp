// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "codec/codec.hpp"

#include <cstring>

#include "common/error.hpp"

namespace jointvid::codec {

LatentCodec::LatentCodec(CodecConfig config) : config_(config) {
    require(config_.temporal_factor >= 1 && config_.spatial_factor >= 1,
            "codec factors must be at least 1");
    require(config_.scale != 0.0, "codec scale must be non-zero");
}

void LatentCodec::check_divisible(int64_t frames, int64_t height, int64_t width) const {
    if (frames % config_.temporal_factor != 0) {
        fail(ErrorKind::InvalidArgument, "frames axis (" + std::to_string(frames) +
                                             ") not divisible by temporal factor " +
                                             std::to_string(config_.temporal_factor));
    }
    if (height % config_.spatial_factor != 0) {
        fail(ErrorKind::InvalidArgument, "height axis (" + std::to_string(height) +
                                             ") not divisible by spatial factor " +
                                             std::to_string(config_.spatial_factor));
    }
    if (width % config_.spatial_factor != 0) {
        fail(ErrorKind::InvalidArgument, "width axis (" + std::to_string(width) +
                                             ") not divisible by spatial factor " +
                                             std::to_string(config_.spatial_factor));
    }
}

std::vector<int64_t> LatentCodec::latent_shape(int frames, int height, int width) const {
    check_divisible(frames, height, width);
    return {config_.latent_channels(), frames / config_.temporal_factor,
            height / config_.spatial_factor, width / config_.spatial_factor};
}

torch::Tensor LatentCodec::encode(const torch::Tensor& pixels) const {
    require(pixels.dim() == 4 || pixels.dim() == 5, "pixels must be [3,F,H,W] or [B,3,F,H,W]");
    const bool batched = pixels.dim() == 5;
    auto x = batched ? pixels : pixels.unsqueeze(0);
    const int64_t B = x.size(0), C = x.size(1), F = x.size(2), H = x.size(3), W = x.size(4);
    check_divisible(F, H, W);
    const int64_t tf = config_.temporal_factor, sf = config_.spatial_factor;
    // [B, C, f, tf, h, sf, w, sf] -> [B, C, tf, sf, sf, f, h, w]
    auto z = x.reshape({B, C, F / tf, tf, H / sf, sf, W / sf, sf})
                 .permute({0, 1, 3, 5, 7, 2, 4, 6})
                 .reshape({B, C * tf * sf * sf, F / tf, H / sf, W / sf});
    z = (z - config_.shift) / config_.scale;
    return batched ? z : z.squeeze(0);
}

torch::Tensor LatentCodec::decode(const torch::Tensor& latents) const {
    require(latents.dim() == 4 || latents.dim() == 5, "latents must be [c,f,h,w] or [B,c,f,h,w]");
    const bool batched = latents.dim() == 5;
    auto z = batched ? latents : latents.unsqueeze(0);
    const int64_t tf = config_.temporal_factor, sf = config_.spatial_factor;
    const int64_t B = z.size(0), c = z.size(1), f = z.size(2), h = z.size(3), w = z.size(4);
    if (c % (tf * sf * sf) != 0) {
        fail(ErrorKind::InvalidArgument, "latent channel count " + std::to_string(c) +
                                             " does not match codec factors");
    }
    const int64_t C = c / (tf * sf * sf);
    auto x = (z * config_.scale + config_.shift)
                 .reshape({B, C, tf, sf, sf, f, h, w})
                 .permute({0, 1, 5, 2, 6, 3, 7, 4})
                 .reshape({B, C, f * tf, h * sf, w * sf});
    return batched ? x : x.squeeze(0);
}

LatentBlock LatentCodec::encode(const Video& video) const {
    return LatentBlock{encode(to_tensor(video)), config_};
}

Video LatentCodec::decode(const LatentBlock& latent) const {
    if (latent.config.temporal_factor != config_.temporal_factor ||
        latent.config.spatial_factor != config_.spatial_factor ||
        latent.config.shift != config_.shift || latent.config.scale != config_.scale) {
        fail(ErrorKind::InvalidArgument, "latent was produced by a different codec config");
    }
    return to_video(decode(latent.data));
}

torch::Tensor to_tensor(const Video& video) {
    return torch::from_blob(const_cast<float*>(video.data.data()),
                            {3, video.frames, video.height, video.width}, torch::kFloat32)
        .clone();
}

Video to_video(const torch::Tensor& pixels) {
    require(pixels.dim() == 4 && pixels.size(0) == 3, "pixels must be [3,F,H,W]");
    auto t = pixels.to(torch::kFloat32).contiguous();
    Video v(int(t.size(1)), int(t.size(2)), int(t.size(3)));
    std::memcpy(v.data.data(), t.data_ptr<float>(), v.data.size() * sizeof(float));
    return v;
}

}  // namespace jointvid::codec
