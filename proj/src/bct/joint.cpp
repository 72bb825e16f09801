// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bct/joint.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace jointvid::bct {

namespace nn = torch::nn;

std::string to_string(Arch a) {
    switch (a) {
        case Arch::Parallel: return "parallel";
        case Arch::Channel: return "channel";
        case Arch::Spatial: return "spatial";
    }
    return "unknown";
}

Arch arch_from_string(const std::string& s) {
    if (s == "parallel") return Arch::Parallel;
    if (s == "channel") return Arch::Channel;
    if (s == "spatial") return Arch::Spatial;
    fail(ErrorKind::Config, "unknown architecture '" + s + "' (expected parallel, channel or spatial)");
}

std::vector<int> default_link_blocks(int depth) {
    std::vector<int> blocks;
    for (int b = depth; b >= 1; b -= 3) blocks.push_back(b);
    std::reverse(blocks.begin(), blocks.end());
    return blocks;
}

dit::Backbone clone_backbone(dit::Backbone base) {
    dit::Backbone copy(base->config());
    copy->to(base->patch_embed()->weight.scalar_type());
    dit::copy_parameters(*base, *copy);
    return copy;
}

namespace {

void check_pair(const torch::Tensor& a, const torch::Tensor& b) {
    if (a.sizes() != b.sizes()) {
        fail(ErrorKind::InvalidArgument, "RGB and perception latents must share one shape");
    }
}

nn::Linear zero_linear(int width) {
    nn::Linear l(width, width);
    torch::NoGradGuard no_grad;
    l->weight.zero_();
    l->bias.zero_();
    return l;
}

}  // namespace

ParallelTeacher::ParallelTeacher(dit::Backbone backbone, std::vector<int> link_blocks)
    : backbone_(std::move(backbone)), link_blocks_(std::move(link_blocks)) {
    const int depth = backbone_->config().depth;
    const int d = backbone_->config().width;
    std::sort(link_blocks_.begin(), link_blocks_.end());
    for (int b : link_blocks_) {
        if (b < 1 || b > depth) fail(ErrorKind::Config, "link block index out of range");
    }
    if (std::adjacent_find(link_blocks_.begin(), link_blocks_.end()) != link_blocks_.end()) {
        fail(ErrorKind::Config, "duplicate link block index");
    }
    register_module("backbone", backbone_);
    const auto dtype = backbone_->patch_embed()->weight.scalar_type();
    const auto opts = torch::TensorOptions().dtype(dtype);
    e_time_rgb_ = register_parameter("e_time_rgb", torch::zeros({d}, opts));
    e_time_percep_ = register_parameter("e_time_percep", torch::zeros({d}, opts));
    e_tok_rgb_ = register_parameter("e_tok_rgb", torch::randn({d}, opts) * 0.02);
    e_tok_percep_ = register_parameter("e_tok_percep", torch::randn({d}, opts) * 0.02);
    for (std::size_t k = 0; k <= link_blocks_.size(); ++k) {
        to_rgb_.push_back(register_module("link" + std::to_string(k) + "_to_rgb", zero_linear(d)));
        to_percep_.push_back(register_module("link" + std::to_string(k) + "_to_percep", zero_linear(d)));
        to_rgb_.back()->to(dtype);
        to_percep_.back()->to(dtype);
    }
}

bool ParallelTeacher::has_link_after(int block_index) const {
    return std::binary_search(link_blocks_.begin(), link_blocks_.end(), block_index + 1);
}

std::size_t ParallelTeacher::link_slot_after(int block_index) const {
    auto it = std::lower_bound(link_blocks_.begin(), link_blocks_.end(), block_index + 1);
    return std::size_t(it - link_blocks_.begin()) + 1;
}

nn::Linear& ParallelTeacher::link_to_rgb(std::size_t k) { return to_rgb_.at(k); }
nn::Linear& ParallelTeacher::link_to_percep(std::size_t k) { return to_percep_.at(k); }

int64_t ParallelTeacher::link_parameter_count() const {
    int64_t n = 0;
    for (std::size_t k = 0; k < to_rgb_.size(); ++k) {
        n += dit::parameter_count(*to_rgb_[k]) + dit::parameter_count(*to_percep_[k]);
    }
    return n;
}

double ParallelTeacher::max_link_weight_norm() const {
    double best = 0.0;
    for (std::size_t k = 0; k < to_rgb_.size(); ++k) {
        best = std::max(best, to_rgb_[k]->weight.norm().item<double>());
        best = std::max(best, to_percep_[k]->weight.norm().item<double>());
    }
    return best;
}

JointOutput ParallelTeacher::forward_joint(const torch::Tensor& z_rgb, const torch::Tensor& z_percep,
                                           const torch::Tensor& y, const torch::Tensor& t) {
    check_pair(z_rgb, z_percep);
    auto& bb = backbone_;
    auto shared = bb->time_embedding(t) + bb->class_embedding(y);
    auto cond_rgb = shared + e_time_rgb_;
    auto cond_percep = shared + e_time_percep_;
    auto x_rgb = bb->embed_tokens(z_rgb) + e_tok_rgb_;
    auto x_percep = bb->embed_tokens(z_percep) + e_tok_percep_;
    const auto rope = bb->default_rope(x_rgb.options());

    auto cross = [&](std::size_t slot) {
        auto next_rgb = x_rgb + to_rgb_[slot](x_percep);
        auto next_percep = x_percep + to_percep_[slot](x_rgb);
        x_rgb = next_rgb;
        x_percep = next_percep;
    };

    cross(0);
    JointOutput out;
    const int depth = bb->config().depth;
    for (int i = 0; i < depth; ++i) {
        x_rgb = bb->run_block(i, x_rgb, cond_rgb, rope);
        x_percep = bb->run_block(i, x_percep, cond_percep, rope);
        if (has_link_after(i)) cross(link_slot_after(i));
        out.hidden_rgb.push_back(x_rgb);
        out.hidden_percep.push_back(x_percep);
    }
    const auto grid = bb->config().token_grid();
    out.eps_rgb = bb->unpatchify(bb->head(x_rgb, cond_rgb), grid);
    out.eps_percep = bb->unpatchify(bb->head(x_percep, cond_percep), grid);
    out.tokens = x_rgb.size(1);
    return out;
}

dit::DenoiseOutput ParallelTeacher::branch_forward(Modality m, const torch::Tensor& z,
                                                   const torch::Tensor& y, const torch::Tensor& t) {
    auto& bb = backbone_;
    auto cond = bb->time_embedding(t) + bb->class_embedding(y) + time_task(m);
    auto x = bb->embed_tokens(z) + token_task(m);
    auto hidden = bb->run_blocks(x, cond, bb->default_rope(x.options()));
    auto eps = bb->unpatchify(bb->head(hidden.back(), cond), bb->config().token_grid());
    return dit::DenoiseOutput{eps, std::move(hidden)};
}

ChannelFusion::ChannelFusion(dit::Backbone base) : base_config_(base->config()) {
    dit::BackboneConfig wide = base_config_;
    wide.latent_channels *= 2;
    backbone_ = register_module("backbone", dit::Backbone(wide));
    const auto dtype = base->patch_embed()->weight.scalar_type();
    backbone_->to(dtype);

    torch::NoGradGuard no_grad;
    auto dst = backbone_->named_parameters(true);
    for (const auto& item : base->named_parameters(true)) {
        const auto& key = item.key();
        if (key.rfind("patch_embed.", 0) == 0 || key.rfind("out_proj.", 0) == 0) continue;
        dst[key].copy_(item.value());
    }
    // Patch vectors are channel-major, so the RGB channels occupy the first
    // half of the widened input columns and output rows.
    const int64_t half = base_config_.patch_dim();
    auto& in = backbone_->patch_embed();
    in->weight.zero_();
    in->weight.narrow(1, 0, half).copy_(base->patch_embed()->weight);
    in->bias.copy_(base->patch_embed()->bias);
    auto& out = backbone_->out_proj();
    const auto& base_out = base->out_proj();
    out->weight.narrow(0, 0, half).copy_(base_out->weight);
    out->weight.narrow(0, half, half).copy_(base_out->weight);
    out->bias.narrow(0, 0, half).copy_(base_out->bias);
    out->bias.narrow(0, half, half).copy_(base_out->bias);
}

JointOutput ChannelFusion::forward_joint(const torch::Tensor& z_rgb, const torch::Tensor& z_percep,
                                         const torch::Tensor& y, const torch::Tensor& t) {
    check_pair(z_rgb, z_percep);
    auto res = backbone_->forward(torch::cat({z_rgb, z_percep}, 1), y, t);
    const int64_t c = z_rgb.size(1);
    JointOutput out;
    out.eps_rgb = res.eps.narrow(1, 0, c);
    out.eps_percep = res.eps.narrow(1, c, c);
    out.hidden_rgb = std::move(res.hidden);
    out.tokens = backbone_->config().tokens();
    return out;
}

SpatialFusion::SpatialFusion(dit::Backbone base, bool offset_percep_positions)
    : offset_(offset_percep_positions) {
    backbone_ = register_module("backbone", clone_backbone(base));
}

JointOutput SpatialFusion::forward_joint(const torch::Tensor& z_rgb, const torch::Tensor& z_percep,
                                         const torch::Tensor& y, const torch::Tensor& t) {
    check_pair(z_rgb, z_percep);
    auto& bb = backbone_;
    const auto g = bb->config().token_grid();
    const int64_t B = z_rgb.size(0), d = bb->config().width;
    auto grid_rgb = bb->embed_tokens(z_rgb).view({B, g[0], g[1], g[2], d});
    auto grid_percep = bb->embed_tokens(z_percep).view({B, g[0], g[1], g[2], d});
    auto x = torch::cat({grid_rgb, grid_percep}, 3).reshape({B, -1, d});

    dit::Rope rope;
    if (bb->config().rope) {
        auto pos_rgb = dit::grid_positions(g).view({g[0], g[1], g[2], 3});
        auto pos_percep = dit::grid_positions(g, offset_ ? g[2] : 0).view({g[0], g[1], g[2], 3});
        auto pos = torch::cat({pos_rgb, pos_percep}, 2).reshape({-1, 3});
        rope = dit::rope_from_positions(pos, bb->config().head_dim());
        rope.cos = rope.cos.to(x.options());
        rope.sin = rope.sin.to(x.options());
    }
    auto cond = bb->time_embedding(t) + bb->class_embedding(y);
    auto hidden = bb->run_blocks(x, cond, rope);
    const int64_t P = bb->config().patch_dim();
    auto patches = bb->head(hidden.back(), cond).view({B, g[0], g[1], 2 * g[2], P});
    JointOutput out;
    out.eps_rgb = bb->unpatchify(patches.narrow(3, 0, g[2]).reshape({B, -1, P}), g);
    out.eps_percep = bb->unpatchify(patches.narrow(3, g[2], g[2]).reshape({B, -1, P}), g);
    out.hidden_rgb = std::move(hidden);
    out.tokens = x.size(1);
    return out;
}

std::shared_ptr<JointDenoiser> make_joint(Arch arch, dit::Backbone base,
                                          const std::vector<int>& link_blocks) {
    switch (arch) {
        case Arch::Parallel:
            return std::make_shared<ParallelTeacher>(clone_backbone(base), link_blocks);
        case Arch::Channel: return std::make_shared<ChannelFusion>(base);
        case Arch::Spatial: return std::make_shared<SpatialFusion>(base);
    }
    fail(ErrorKind::Config, "unknown architecture");
}

dit::Backbone make_student(ParallelTeacher& teacher) {
    auto student = clone_backbone(teacher.backbone());
    torch::NoGradGuard no_grad;
    student->patch_embed()->bias.add_(teacher.token_task(Modality::Rgb));
    student->time_out()->bias.add_(teacher.time_task(Modality::Rgb));
    return student;
}

}  // namespace jointvid::bct
