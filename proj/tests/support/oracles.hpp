// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <torch/torch.h>

#include "bct/train.hpp"
#include "curation/records.hpp"
#include "dit/backbone.hpp"

namespace jointvid::test {

/// Latent [12, 2, 4, 4] (a [3, 4, 8, 8] clip through the default codec), two
/// blocks of width 32, eight tokens.
inline dit::BackboneConfig tiny_backbone() {
    dit::BackboneConfig c;
    c.latent_channels = 12;
    c.latent_grid = {2, 4, 4};
    c.depth = 2;
    c.width = 32;
    c.heads = 2;
    c.patch = {1, 2, 2};
    c.num_classes = 4;
    return c;
}

/// Random paired latents shaped for tiny_backbone(), labels cycling 0..3.
inline bct::PairedLatents random_pairs(int64_t n, uint64_t seed, torch::Dtype dtype = torch::kFloat32) {
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    bct::PairedLatents d;
    d.rgb = torch::randn({n, 12, 2, 4, 4}, gen, dtype) * 0.5;
    d.percep = torch::randn({n, 12, 2, 4, 4}, gen, dtype) * 0.5;
    d.labels = torch::arange(n, torch::kLong) % 4;
    return d;
}

/// Adds small noise to every parameter so zero-initialized layers carry
/// gradient through the whole network.
inline void perturb_zero_init(torch::nn::Module& m, uint64_t seed, double scale = 0.05) {
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    torch::NoGradGuard g;
    for (auto& p : m.parameters()) p.add_(torch::randn(p.sizes(), gen, p.options()) * scale);
}

/// Worst relative error between the autograd directional derivative and a
/// central difference along `directions` random unit directions in
/// parameter space.
inline double directional_gradient_check(torch::nn::Module& m, const std::function<torch::Tensor()>& loss,
                                         int directions, uint64_t seed, double h = 1e-5) {
    auto params = m.parameters();
    for (auto& p : params) {
        p.set_requires_grad(true);
        if (p.grad().defined()) p.mutable_grad().zero_();
    }
    loss().backward();
    std::vector<torch::Tensor> grads;
    for (auto& p : params) grads.push_back(p.grad().defined() ? p.grad().clone() : torch::zeros_like(p));

    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    double worst = 0.0;
    for (int k = 0; k < directions; ++k) {
        std::vector<torch::Tensor> dir;
        double norm2 = 0.0;
        for (auto& p : params) {
            dir.push_back(torch::randn(p.sizes(), gen, p.options()));
            norm2 += dir.back().pow(2).sum().item<double>();
        }
        const double inv = 1.0 / std::sqrt(norm2);
        double analytic = 0.0;
        for (std::size_t i = 0; i < params.size(); ++i) {
            dir[i].mul_(inv);
            analytic += (grads[i] * dir[i]).sum().item<double>();
        }
        auto shift = [&](double s) {
            torch::NoGradGuard g;
            for (std::size_t i = 0; i < params.size(); ++i) params[i].add_(dir[i] * s);
        };
        double plus, minus;
        {
            torch::NoGradGuard g;
            shift(h);
            plus = loss().item<double>();
            shift(-2.0 * h);
            minus = loss().item<double>();
            shift(h);
        }
        const double numeric = (plus - minus) / (2.0 * h);
        const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        worst = std::max(worst, err);
    }
    return worst;
}

/// Cosine with the zero-norm convention: 0 when either vector vanishes.
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

inline std::vector<double> token(const torch::Tensor& grid, int64_t f, int64_t n) {
    auto v = grid[f][n].contiguous().to(torch::kFloat64);
    return {v.data_ptr<double>(), v.data_ptr<double>() + v.numel()};
}

/// Double-loop relation maps of an [f, n, d] grid.
inline torch::Tensor naive_spatial(const torch::Tensor& grid) {
    const int64_t F = grid.size(0), N = grid.size(1);
    auto out = torch::zeros({F, N, N}, torch::kFloat64);
    auto a = out.accessor<double, 3>();
    for (int64_t f = 0; f < F; ++f) {
        for (int64_t i = 0; i < N; ++i) {
            for (int64_t j = 0; j < N; ++j) a[f][i][j] = cosine(token(grid, f, i), token(grid, f, j));
        }
    }
    return out;
}

inline torch::Tensor naive_temporal(const torch::Tensor& grid) {
    const int64_t F = grid.size(0), N = grid.size(1);
    auto out = torch::zeros({N, F, F}, torch::kFloat64);
    auto a = out.accessor<double, 3>();
    for (int64_t n = 0; n < N; ++n) {
        for (int64_t i = 0; i < F; ++i) {
            for (int64_t j = 0; j < F; ++j) a[n][i][j] = cosine(token(grid, i, n), token(grid, j, n));
        }
    }
    return out;
}

// Curation arithmetic written out directly.

inline std::vector<std::vector<int>> naive_labels(const std::vector<curation::RichnessVector>& s, double tau) {
    std::vector<std::vector<int>> y;
    for (const auto& row : s) {
        std::vector<int> r(curation::kNumPrimitives, 0);
        int ones = 0;
        for (int j = 0; j < curation::kNumPrimitives; ++j) {
            if (row[std::size_t(j)] >= tau) {
                r[std::size_t(j)] = 1;
                ++ones;
            }
        }
        if (ones == 0) {
            int best = 0;
            for (int j = 1; j < curation::kNumPrimitives; ++j) {
                if (row[std::size_t(j)] > row[std::size_t(best)]) best = j;
            }
            r[std::size_t(best)] = 1;
        }
        y.push_back(r);
    }
    return y;
}

/// IRBL per primitive (0 where the column is empty), the per-video weights
/// and the same weights renormalized to a distribution.
struct NaiveWeights {
    std::vector<double> irbl;
    std::vector<double> raw;
    std::vector<double> p;
};

inline NaiveWeights naive_weights(const std::vector<std::vector<int>>& y) {
    const int M = curation::kNumPrimitives;
    std::vector<long> count(M, 0);
    for (const auto& r : y) {
        for (int j = 0; j < M; ++j) count[std::size_t(j)] += r[std::size_t(j)];
    }
    const long top = *std::max_element(count.begin(), count.end());
    NaiveWeights w;
    w.irbl.assign(M, 0.0);
    double irbl_sum = 0.0;
    for (int j = 0; j < M; ++j) {
        if (count[std::size_t(j)] > 0) w.irbl[std::size_t(j)] = double(top) / double(count[std::size_t(j)]);
        irbl_sum += w.irbl[std::size_t(j)];
    }
    double total = 0.0;
    for (const auto& r : y) {
        double s = 0.0;
        for (int j = 0; j < M; ++j) s += r[std::size_t(j)] * w.irbl[std::size_t(j)];
        w.raw.push_back(s / irbl_sum);
        total += w.raw.back();
    }
    for (double v : w.raw) w.p.push_back(v / total);
    return w;
}

/// Sequential weighted draws without replacement, using its own generator.
inline std::vector<std::size_t> naive_draw(std::vector<double> p, std::size_t n, std::mt19937& rng) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k) {
        std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
        const std::size_t i = pick(rng);
        out.push_back(i);
        p[i] = 0.0;
    }
    return out;
}

/// Random richness matrix with a long tail: primitive j fires with a
/// probability that halves every few columns.
inline std::vector<curation::RichnessVector> random_scores(std::size_t rows, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<curation::RichnessVector> out(rows);
    for (auto& r : out) {
        for (int j = 0; j < curation::kNumPrimitives; ++j) {
            const double fire = 0.6 * std::pow(0.7, j);
            r[std::size_t(j)] = u(rng) < fire ? 4.0 + u(rng) : 1.0 + 3.0 * u(rng) * 0.99;
        }
        // Integer rows produce argmax ties.
        if (u(rng) < 0.2) {
            for (double& v : r) v = std::round(v);
        }
    }
    return out;
}

}  // namespace jointvid::test
