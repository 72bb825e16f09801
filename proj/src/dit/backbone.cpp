// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "dit/backbone.hpp"

#include <cmath>

#include "common/error.hpp"

namespace jointvid::dit {

namespace nn = torch::nn;

void BackboneConfig::validate() const {
    auto bad = [](const std::string& what) { fail(ErrorKind::Config, "backbone: " + what); };
    if (depth < 2) bad("depth must be at least 2");
    if (width <= 0 || heads <= 0 || width % heads != 0) bad("width must be divisible by heads");
    if (head_dim() % 2 != 0) bad("head dimension must be even");
    if (latent_channels <= 0) bad("latent channels must be positive");
    if (num_classes <= 0) bad("need at least one class");
    static constexpr const char* kAxis[3] = {"f", "h", "w"};
    for (int a = 0; a < 3; ++a) {
        if (patch[a] <= 0 || latent_grid[a] <= 0 || latent_grid[a] % patch[a] != 0) {
            bad(std::string("latent axis ") + kAxis[a] + " not divisible by its patch size");
        }
    }
}

std::array<int64_t, 3> BackboneConfig::token_grid() const {
    return {latent_grid[0] / patch[0], latent_grid[1] / patch[1], latent_grid[2] / patch[2]};
}

int64_t BackboneConfig::tokens() const {
    const auto g = token_grid();
    return g[0] * g[1] * g[2];
}

void to_json(nlohmann::json& j, const BackboneConfig& c) {
    j = nlohmann::json{{"latent_channels", c.latent_channels},
                       {"latent_grid", c.latent_grid},
                       {"depth", c.depth},
                       {"width", c.width},
                       {"heads", c.heads},
                       {"patch", c.patch},
                       {"rope", c.rope},
                       {"num_classes", c.num_classes},
                       {"mlp_ratio", c.mlp_ratio}};
}

void from_json(const nlohmann::json& j, BackboneConfig& c) {
    BackboneConfig d;
    c.latent_channels = j.value("latent_channels", d.latent_channels);
    c.latent_grid = j.value("latent_grid", d.latent_grid);
    c.depth = j.value("depth", d.depth);
    c.width = j.value("width", d.width);
    c.heads = j.value("heads", d.heads);
    c.patch = j.value("patch", d.patch);
    c.rope = j.value("rope", d.rope);
    c.num_classes = j.value("num_classes", d.num_classes);
    c.mlp_ratio = j.value("mlp_ratio", d.mlp_ratio);
}

torch::Tensor grid_positions(const std::array<int64_t, 3>& grid, int64_t w_offset) {
    auto f = torch::arange(grid[0], torch::kFloat64);
    auto h = torch::arange(grid[1], torch::kFloat64);
    auto w = torch::arange(grid[2], torch::kFloat64) + double(w_offset);
    auto mesh = torch::meshgrid({f, h, w}, "ij");
    return torch::stack({mesh[0].flatten(), mesh[1].flatten(), mesh[2].flatten()}, 1);
}

Rope rope_from_positions(const torch::Tensor& positions, int head_dim) {
    const int hw_dim = 2 * (head_dim / 6);
    const std::array<int, 3> axis_dim = {head_dim - 2 * hw_dim, hw_dim, hw_dim};
    std::vector<torch::Tensor> angles;
    auto pos = positions.to(torch::kFloat64);
    for (int a = 0; a < 3; ++a) {
        const int half = axis_dim[a] / 2;
        if (half == 0) continue;
        auto idx = torch::arange(half, torch::kFloat64);
        auto freq = torch::pow(10000.0, -2.0 * idx / double(axis_dim[a]));
        angles.push_back(pos.select(1, a).unsqueeze(1) * freq.unsqueeze(0));
    }
    auto theta = torch::cat(angles, 1);
    return Rope{torch::cos(theta), torch::sin(theta)};
}

torch::Tensor apply_rope(const torch::Tensor& x, const Rope& rope) {
    if (!rope.enabled()) return x;
    // x: [B, heads, N, hd]; rotate (first half, second half) pairs.
    const int64_t half = x.size(-1) / 2;
    auto x1 = x.narrow(-1, 0, half);
    auto x2 = x.narrow(-1, half, half);
    auto c = rope.cos.to(x.options());
    auto s = rope.sin.to(x.options());
    return torch::cat({x1 * c - x2 * s, x1 * s + x2 * c}, -1);
}

torch::Tensor timestep_features(const torch::Tensor& t, int dim) {
    const int half = dim / 2;
    auto idx = torch::arange(half, t.options());
    auto freq = torch::exp(-std::log(10000.0) * idx / double(half));
    auto arg = (1000.0 * t).unsqueeze(1) * freq.unsqueeze(0);
    auto feats = torch::cat({torch::cos(arg), torch::sin(arg)}, 1);
    if (dim % 2 == 1) feats = torch::cat({feats, torch::zeros({t.size(0), 1}, t.options())}, 1);
    return feats;
}

AttentionImpl::AttentionImpl(int width, int heads) : heads_(heads) {
    qkv_ = register_module("qkv", nn::Linear(width, 3 * width));
    proj_ = register_module("proj", nn::Linear(width, width));
}

torch::Tensor AttentionImpl::forward(const torch::Tensor& x, const Rope& rope) {
    const int64_t B = x.size(0), N = x.size(1), D = x.size(2);
    const int64_t hd = D / heads_;
    auto qkv = qkv_(x).view({B, N, 3, heads_, hd}).permute({2, 0, 3, 1, 4});
    auto q = apply_rope(qkv[0], rope);
    auto k = apply_rope(qkv[1], rope);
    auto v = qkv[2];
    auto attn = torch::softmax(torch::matmul(q, k.transpose(-2, -1)) / std::sqrt(double(hd)), -1);
    auto out = torch::matmul(attn, v).permute({0, 2, 1, 3}).reshape({B, N, D});
    return proj_(out);
}

DiTBlockImpl::DiTBlockImpl(int width, int heads, int mlp_ratio) : width_(width) {
    auto ln = nn::LayerNormOptions({width}).elementwise_affine(false).eps(1e-6);
    norm1_ = register_module("norm1", nn::LayerNorm(ln));
    norm2_ = register_module("norm2", nn::LayerNorm(ln));
    attn_ = register_module("attn", Attention(width, heads));
    fc1_ = register_module("fc1", nn::Linear(width, mlp_ratio * width));
    fc2_ = register_module("fc2", nn::Linear(mlp_ratio * width, width));
    ada_ = register_module("ada", nn::Linear(width, 6 * width));
    torch::NoGradGuard no_grad;
    ada_->weight.zero_();
    ada_->bias.zero_();
}

torch::Tensor DiTBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& cond,
                                    const Rope& rope) {
    auto mod = ada_(torch::silu(cond)).unsqueeze(1).chunk(6, -1);
    auto h = norm1_(x) * (1 + mod[1]) + mod[0];
    auto out = x + (1 + mod[2]) * attn_(h, rope);
    h = norm2_(out) * (1 + mod[4]) + mod[3];
    return out + (1 + mod[5]) * fc2_(torch::gelu(fc1_(h), "tanh"));
}

BackboneImpl::BackboneImpl(BackboneConfig config) : config_(std::move(config)) {
    config_.validate();
    const int d = config_.width;
    patch_embed_ = register_module("patch_embed", nn::Linear(config_.patch_dim(), d));
    time_fc1_ = register_module("time_fc1", nn::Linear(d, d));
    time_fc2_ = register_module("time_fc2", nn::Linear(d, d));
    class_embed_ = register_module("class_embed", nn::Embedding(config_.num_classes + 1, d));
    blocks_ = register_module("blocks", nn::ModuleList());
    for (int i = 0; i < config_.depth; ++i) {
        blocks_->push_back(DiTBlock(d, config_.heads, config_.mlp_ratio));
    }
    final_norm_ = register_module(
        "final_norm", nn::LayerNorm(nn::LayerNormOptions({d}).elementwise_affine(false).eps(1e-6)));
    final_ada_ = register_module("final_ada", nn::Linear(d, 2 * d));
    out_proj_ = register_module("out_proj", nn::Linear(d, config_.patch_dim()));
    torch::NoGradGuard no_grad;
    nn::init::normal_(class_embed_->weight, 0.0, 0.02);
    final_ada_->weight.zero_();
    final_ada_->bias.zero_();
}

torch::Tensor BackboneImpl::patchify(const torch::Tensor& z) const {
    TORCH_CHECK(z.dim() == 5, "latent must be [B, c, f, h, w]");
    const auto& p = config_.patch;
    const int64_t B = z.size(0), C = z.size(1);
    const int64_t gf = z.size(2) / p[0], gh = z.size(3) / p[1], gw = z.size(4) / p[2];
    return z.reshape({B, C, gf, p[0], gh, p[1], gw, p[2]})
        .permute({0, 2, 4, 6, 1, 3, 5, 7})
        .reshape({B, gf * gh * gw, C * p[0] * p[1] * p[2]});
}

torch::Tensor BackboneImpl::unpatchify(const torch::Tensor& tokens,
                                       const std::array<int64_t, 3>& grid) const {
    const auto& p = config_.patch;
    const int64_t B = tokens.size(0);
    const int64_t C = tokens.size(2) / (int64_t(p[0]) * p[1] * p[2]);
    return tokens.reshape({B, grid[0], grid[1], grid[2], C, p[0], p[1], p[2]})
        .permute({0, 4, 1, 5, 2, 6, 3, 7})
        .reshape({B, C, grid[0] * p[0], grid[1] * p[1], grid[2] * p[2]});
}

torch::Tensor BackboneImpl::embed_tokens(const torch::Tensor& z) {
    const auto& g = config_.latent_grid;
    if (z.dim() != 5 || z.size(1) != config_.latent_channels || z.size(2) != g[0] ||
        z.size(3) != g[1] || z.size(4) != g[2]) {
        fail(ErrorKind::InvalidArgument, "latent shape does not match the backbone config");
    }
    return patch_embed_(patchify(z));
}

torch::Tensor BackboneImpl::time_embedding(const torch::Tensor& t) {
    auto feats = timestep_features(t.to(patch_embed_->weight.scalar_type()), config_.width);
    return time_fc2_(torch::silu(time_fc1_(feats)));
}

torch::Tensor BackboneImpl::class_embedding(const torch::Tensor& y) { return class_embed_(y); }

torch::Tensor BackboneImpl::run_block(int index, const torch::Tensor& x, const torch::Tensor& cond,
                                      const Rope& rope) {
    return blocks_[index]->as<DiTBlock>()->forward(x, cond, rope);
}

std::vector<torch::Tensor> BackboneImpl::run_blocks(torch::Tensor x, const torch::Tensor& cond,
                                                    const Rope& rope) {
    std::vector<torch::Tensor> hidden;
    hidden.reserve(config_.depth);
    for (int i = 0; i < config_.depth; ++i) {
        x = run_block(i, x, cond, rope);
        hidden.push_back(x);
    }
    return hidden;
}

torch::Tensor BackboneImpl::head(const torch::Tensor& x, const torch::Tensor& cond) {
    auto mod = final_ada_(torch::silu(cond)).unsqueeze(1).chunk(2, -1);
    return out_proj_(final_norm_(x) * (1 + mod[1]) + mod[0]);
}

Rope BackboneImpl::default_rope(const torch::TensorOptions& options) const {
    if (!config_.rope) return {};
    Rope r = rope_from_positions(grid_positions(config_.token_grid()), config_.head_dim());
    return Rope{r.cos.to(options), r.sin.to(options)};
}

DenoiseOutput BackboneImpl::forward(const torch::Tensor& z, const torch::Tensor& y,
                                    const torch::Tensor& t) {
    auto x = embed_tokens(z);
    auto cond = time_embedding(t) + class_embedding(y);
    auto hidden = run_blocks(x, cond, default_rope(x.options()));
    auto eps = unpatchify(head(hidden.back(), cond), config_.token_grid());
    return DenoiseOutput{eps, std::move(hidden)};
}

int64_t parameter_count(const torch::nn::Module& module) {
    int64_t n = 0;
    for (const auto& p : module.parameters()) n += p.numel();
    return n;
}

void copy_parameters(const torch::nn::Module& src, torch::nn::Module& dst) {
    torch::NoGradGuard no_grad;
    auto dst_params = dst.named_parameters(true);
    for (const auto& item : src.named_parameters(true)) {
        auto* slot = dst_params.find(item.key());
        if (slot == nullptr) fail(ErrorKind::InvalidArgument, "missing parameter " + item.key());
        slot->copy_(item.value());
    }
}

}  // namespace jointvid::dit
