// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "dit/diffusion.hpp"

#include <cmath>

#include "common/error.hpp"

namespace jointvid::dit {

namespace {

torch::Tensor broadcast_time(const torch::Tensor& t, const torch::Tensor& like) {
    std::vector<int64_t> shape(like.dim(), 1);
    if (t.dim() == 0) return t.to(like.options());
    shape[0] = t.size(0);
    return t.to(like.options()).view(shape);
}

}  // namespace

torch::Tensor noise_forward(const torch::Tensor& z0, const torch::Tensor& t, const torch::Tensor& eps) {
    if ((t < 0).any().item<bool>() || (t > 1).any().item<bool>()) {
        fail(ErrorKind::InvalidArgument, "diffusion time must lie in [0, 1]");
    }
    require(z0.sizes() == eps.sizes(), "noise must match the latent shape");
    return z0 + broadcast_time(noise_variance(t), z0) * eps;
}

torch::Tensor noise_forward(const torch::Tensor& z0, double t, const torch::Tensor& eps) {
    if (!(t >= 0.0 && t <= 1.0)) fail(ErrorKind::InvalidArgument, "diffusion time must lie in [0, 1]");
    require(z0.sizes() == eps.sizes(), "noise must match the latent shape");
    return z0 + t * eps;
}

NoiseDraw draw_noise(const torch::Tensor& z0, torch::Generator& gen) {
    auto t = torch::rand({z0.size(0)}, gen, z0.options());
    return NoiseDraw{t, draw_normal_like(z0, gen)};
}

torch::Tensor draw_normal_like(const torch::Tensor& like, torch::Generator& gen) {
    return torch::randn(like.sizes(), gen, like.options());
}

torch::Tensor drop_condition(const torch::Tensor& y, double p, int null_class, torch::Generator& gen) {
    if (p <= 0.0) return y;
    auto u = torch::rand({y.size(0)}, gen, torch::kFloat64);
    return torch::where(u < p, torch::full_like(y, null_class), y);
}

torch::Tensor noise_mse(const torch::Tensor& eps_hat, const torch::Tensor& eps) {
    return (eps_hat - eps).pow(2).mean();
}

torch::Tensor diffusion_loss(Backbone& model, const torch::Tensor& z0, const torch::Tensor& y,
                             const NoiseDraw& noise) {
    if (z0.size(0) == 0) fail(ErrorKind::InvalidArgument, "empty batch");
    auto zt = noise_forward(z0, noise.t, noise.eps);
    return noise_mse(model->forward(zt, y, noise.t).eps, noise.eps);
}

torch::Tensor sample_latents(const EpsFn& eps_fn, const std::vector<int64_t>& latent_shape,
                             const torch::Tensor& y, const SamplerOptions& options, uint64_t seed) {
    require(options.steps >= 1, "sampler needs at least one step");
    require(options.guidance == 1.0 || options.null_class >= 0,
            "guidance requires the null class index");
    torch::NoGradGuard no_grad;
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    std::vector<int64_t> shape{y.size(0)};
    shape.insert(shape.end(), latent_shape.begin(), latent_shape.end());
    auto z = torch::randn(shape, gen, torch::kFloat32) *
             std::sqrt(1.0 + options.data_std * options.data_std);
    const int64_t B = y.size(0);
    for (int k = 0; k < options.steps; ++k) {
        const double t_now = 1.0 - double(k) / options.steps;
        const double t_next = 1.0 - double(k + 1) / options.steps;
        auto t = torch::full({B}, t_now, torch::kFloat32);
        auto eps_hat = eps_fn(z, y, t);
        if (options.guidance != 1.0) {
            auto uncond = eps_fn(z, torch::full_like(y, options.null_class), t);
            eps_hat = uncond + options.guidance * (eps_hat - uncond);
        }
        auto z0_hat = z - noise_variance(t).view({B, 1, 1, 1, 1}) * eps_hat;
        z = k + 1 == options.steps ? z0_hat : z0_hat + t_next * eps_hat;
    }
    return z;
}

}  // namespace jointvid::dit
