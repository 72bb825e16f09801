// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include <torch/torch.h>

#include "dit/backbone.hpp"

namespace jointvid::dit {

/// Noise variance schedule: sigma_t^2 = t.
inline torch::Tensor noise_variance(const torch::Tensor& t) { return t; }

/// z_t = z0 + sigma_t^2 * eps, with t a scalar or a per-sample [B] tensor.
torch::Tensor noise_forward(const torch::Tensor& z0, const torch::Tensor& t, const torch::Tensor& eps);
torch::Tensor noise_forward(const torch::Tensor& z0, double t, const torch::Tensor& eps);

/// Random draws for one training step: t ~ U(0, 1) per sample and standard
/// normal noise shaped like z0.
struct NoiseDraw {
    torch::Tensor t;    // [B]
    torch::Tensor eps;  // like z0
};

NoiseDraw draw_noise(const torch::Tensor& z0, torch::Generator& gen);
torch::Tensor draw_normal_like(const torch::Tensor& like, torch::Generator& gen);

/// Replaces each label by the null class with probability `p`.
torch::Tensor drop_condition(const torch::Tensor& y, double p, int null_class, torch::Generator& gen);

/// Mean squared noise-prediction error averaged over batch and elements.
torch::Tensor noise_mse(const torch::Tensor& eps_hat, const torch::Tensor& eps);

/// Noise-estimation loss of the backbone on clean latents z0 with labels y.
torch::Tensor diffusion_loss(Backbone& model, const torch::Tensor& z0, const torch::Tensor& y,
                             const NoiseDraw& noise);

using EpsFn = std::function<torch::Tensor(const torch::Tensor& z, const torch::Tensor& y,
                                          const torch::Tensor& t)>;

struct SamplerOptions {
    int steps = 50;
    double guidance = 1.0;   // 1 disables classifier-free guidance
    double data_std = 1.0;   // std of clean latents, sets the t = 1 marginal
    int null_class = -1;     // required when guidance != 1
};

/// Deterministic reverse process for z_t = z0 + t * eps.
///
/// Starting from z_1 ~ N(0, (1 + data_std^2) I), each step on the uniform grid
/// 1 = t_0 > t_1 > ... > t_n = 0 estimates the clean latent
///     z0_hat = z_t - t * eps_hat
/// and re-noises it with the same predicted noise:
///     z_{t'} = z0_hat + t' * eps_hat.
/// The last step (t' = 0) returns z0_hat.
torch::Tensor sample_latents(const EpsFn& eps_fn, const std::vector<int64_t>& latent_shape,
                             const torch::Tensor& y, const SamplerOptions& options,
                             uint64_t seed);

}  // namespace jointvid::dit
