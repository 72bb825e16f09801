// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

namespace jointvid::distill {

/// Token grids are [f, n, d] or batched [B, f, n, d].

/// Cosine similarity between every pair of tokens inside each frame:
/// [..., f, n, n]. A zero-norm token has similarity 0 with everything,
/// itself included.
torch::Tensor relation_spatial(const torch::Tensor& hidden);

/// Cosine similarity between every pair of frames at each spatial site:
/// [..., n, f, f].
torch::Tensor relation_temporal(const torch::Tensor& hidden);

/// Reshapes a flat [B, N, d] sequence (frame-major) into [B, f, n, d].
torch::Tensor as_grid(const torch::Tensor& sequence, int64_t frames);

}  // namespace jointvid::distill
