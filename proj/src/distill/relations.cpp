// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "distill/relations.hpp"

#include "common/error.hpp"

namespace jointvid::distill {

namespace {

constexpr double kNormFloor = 1e-12;

void check_grid(const torch::Tensor& hidden) {
    require(hidden.dim() == 3 || hidden.dim() == 4, "token grid must be [f, n, d] or [B, f, n, d]");
    require(hidden.size(-2) >= 1 && hidden.size(-3) >= 1, "token grid must be non-empty");
}

// Pairwise cosine over the second-to-last axis.
torch::Tensor cosine_gram(const torch::Tensor& x) {
    auto norm = x.norm(2, -1, true);
    auto unit = torch::where(norm > kNormFloor, x / norm.clamp_min(kNormFloor), torch::zeros_like(x));
    return torch::matmul(unit, unit.transpose(-1, -2));
}

}  // namespace

torch::Tensor relation_spatial(const torch::Tensor& hidden) {
    check_grid(hidden);
    return cosine_gram(hidden);
}

torch::Tensor relation_temporal(const torch::Tensor& hidden) {
    check_grid(hidden);
    return cosine_gram(hidden.transpose(-3, -2));
}

torch::Tensor as_grid(const torch::Tensor& sequence, int64_t frames) {
    require(sequence.dim() == 3, "token sequence must be [B, N, d]");
    require(frames >= 1 && sequence.size(1) % frames == 0, "token count must divide into frames");
    return sequence.view({sequence.size(0), frames, sequence.size(1) / frames, sequence.size(2)});
}

}  // namespace jointvid::distill
