// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include <torch/torch.h>

#include <json.hpp>

namespace jointvid::dit {

struct BackboneConfig {
    int latent_channels = 24;
    std::array<int64_t, 3> latent_grid{8, 32, 32};  // f, h, w
    int depth = 8;
    int width = 128;
    int heads = 4;
    std::array<int, 3> patch{1, 2, 2};
    bool rope = true;
    int num_classes = 4;
    int mlp_ratio = 4;

    /// Throws Config on indivisible axes, depth < 2 or width % heads != 0.
    void validate() const;
    int64_t patch_dim() const { return int64_t(latent_channels) * patch[0] * patch[1] * patch[2]; }
    std::array<int64_t, 3> token_grid() const;
    int64_t tokens() const;
    int head_dim() const { return width / heads; }
    /// Class index used for the unconditional (dropped) condition.
    int null_class() const { return num_classes; }
};

void to_json(nlohmann::json& j, const BackboneConfig& c);
void from_json(const nlohmann::json& j, BackboneConfig& c);

/// Rotary tables for a token sequence; empty tensors when rotary encoding is off.
struct Rope {
    torch::Tensor cos;  // [N, head_dim / 2]
    torch::Tensor sin;
    bool enabled() const { return cos.defined(); }
};

/// 3D rotary tables from explicit (f, h, w) token positions [N, 3]. The head
/// dimension is split across the three axes, h and w getting 2*floor(hd/6)
/// each and f the remainder.
Rope rope_from_positions(const torch::Tensor& positions, int head_dim);
/// Row-major (f, h, w) positions of a token grid, w shifted by `w_offset`.
torch::Tensor grid_positions(const std::array<int64_t, 3>& grid, int64_t w_offset = 0);
torch::Tensor apply_rope(const torch::Tensor& x, const Rope& rope);

/// Sinusoidal features of t in [0, 1] (scaled by 1000), width `dim`.
torch::Tensor timestep_features(const torch::Tensor& t, int dim);

class AttentionImpl : public torch::nn::Module {
public:
    AttentionImpl(int width, int heads);
    torch::Tensor forward(const torch::Tensor& x, const Rope& rope);

private:
    int heads_;
    torch::nn::Linear qkv_{nullptr}, proj_{nullptr};
};
TORCH_MODULE(Attention);

/// Pre-norm transformer block with adaptive layer-norm modulation from the
/// condition vector. Modulation starts at zero, so a fresh block is a plain
/// pre-LN block.
class DiTBlockImpl : public torch::nn::Module {
public:
    DiTBlockImpl(int width, int heads, int mlp_ratio);
    torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& cond, const Rope& rope);

private:
    int width_;
    torch::nn::LayerNorm norm1_{nullptr}, norm2_{nullptr};
    Attention attn_{nullptr};
    torch::nn::Linear fc1_{nullptr}, fc2_{nullptr}, ada_{nullptr};
};
TORCH_MODULE(DiTBlock);

struct DenoiseOutput {
    torch::Tensor eps;                  // latent shape
    std::vector<torch::Tensor> hidden;  // per block, [B, N, d]
};

/// Minimal diffusion transformer: patchify, K conditioned blocks, unpatchify.
class BackboneImpl : public torch::nn::Module {
public:
    explicit BackboneImpl(BackboneConfig config);

    const BackboneConfig& config() const { return config_; }

    torch::Tensor patchify(const torch::Tensor& z) const;
    torch::Tensor unpatchify(const torch::Tensor& tokens, const std::array<int64_t, 3>& grid) const;

    /// [B, c, f, h, w] -> [B, N, d].
    torch::Tensor embed_tokens(const torch::Tensor& z);
    /// e(t; theta): [B] -> [B, d].
    torch::Tensor time_embedding(const torch::Tensor& t);
    torch::Tensor class_embedding(const torch::Tensor& y);
    torch::Tensor run_block(int index, const torch::Tensor& x, const torch::Tensor& cond,
                            const Rope& rope);
    /// Final modulated projection to patch vectors, [B, N, patch_dim].
    torch::Tensor head(const torch::Tensor& x, const torch::Tensor& cond);

    Rope default_rope(const torch::TensorOptions& options) const;

    /// Noise prediction for a noisy latent under class y at time t.
    DenoiseOutput forward(const torch::Tensor& z, const torch::Tensor& y, const torch::Tensor& t);

    /// Runs all blocks on an already-embedded token sequence.
    std::vector<torch::Tensor> run_blocks(torch::Tensor x, const torch::Tensor& cond,
                                          const Rope& rope);

    torch::nn::Linear& patch_embed() { return patch_embed_; }
    torch::nn::Linear& time_out() { return time_fc2_; }
    torch::nn::Linear& out_proj() { return out_proj_; }

private:
    BackboneConfig config_;
    torch::nn::Linear patch_embed_{nullptr};
    torch::nn::Linear time_fc1_{nullptr}, time_fc2_{nullptr};
    torch::nn::Embedding class_embed_{nullptr};
    torch::nn::ModuleList blocks_;
    torch::nn::LayerNorm final_norm_{nullptr};
    torch::nn::Linear final_ada_{nullptr}, out_proj_{nullptr};
};
TORCH_MODULE(Backbone);

int64_t parameter_count(const torch::nn::Module& module);

/// Copies every parameter and buffer of `src` into the same-named slot of `dst`.
void copy_parameters(const torch::nn::Module& src, torch::nn::Module& dst);

}  // namespace jointvid::dit
