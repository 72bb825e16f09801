// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "dit/backbone.hpp"

namespace jointvid::bct {

/// Joint RGB + perception architectures compared in the ablations.
enum class Arch { Parallel, Channel, Spatial };

std::string to_string(Arch a);
Arch arch_from_string(const std::string& s);

enum class Modality { Rgb, Percep };

/// Evenly spaced link placement ending at the last block, every third block:
/// depth 8 gives {2, 5, 8}. Indices are 1-based.
std::vector<int> default_link_blocks(int depth);

struct JointOutput {
    torch::Tensor eps_rgb;
    torch::Tensor eps_percep;
    std::vector<torch::Tensor> hidden_rgb;     // per block, after any link update
    std::vector<torch::Tensor> hidden_percep;  // empty for single-stream variants
    int64_t tokens = 0;                        // sequence length of one DiT pass
};

/// Common surface of the three joint denoisers.
class JointDenoiser : public torch::nn::Module {
public:
    virtual Arch arch() const = 0;
    virtual JointOutput forward_joint(const torch::Tensor& z_rgb, const torch::Tensor& z_percep,
                                      const torch::Tensor& y, const torch::Tensor& t) = 0;
    virtual const dit::BackboneConfig& backbone_config() const = 0;
};

/// Dual-stream teacher: one set of DiT weights run as two independent
/// branches, told apart by task embeddings and coupled by zero-initialized
/// linear control links at the blocks in `link_blocks` plus one pair ahead of
/// the first block.
class ParallelTeacher : public JointDenoiser {
public:
    ParallelTeacher(dit::Backbone backbone, std::vector<int> link_blocks);

    Arch arch() const override { return Arch::Parallel; }
    const dit::BackboneConfig& backbone_config() const override { return backbone_->config(); }

    JointOutput forward_joint(const torch::Tensor& z_rgb, const torch::Tensor& z_percep,
                              const torch::Tensor& y, const torch::Tensor& t) override;

    /// One branch on its own with the links left out.
    dit::DenoiseOutput branch_forward(Modality m, const torch::Tensor& z, const torch::Tensor& y,
                                      const torch::Tensor& t);

    dit::Backbone& backbone() { return backbone_; }
    const std::vector<int>& link_blocks() const { return link_blocks_; }

    torch::Tensor& time_task(Modality m) { return m == Modality::Rgb ? e_time_rgb_ : e_time_percep_; }
    torch::Tensor& token_task(Modality m) { return m == Modality::Rgb ? e_tok_rgb_ : e_tok_percep_; }

    /// Link pair k (0 = before the first block, k >= 1 follows link_blocks[k-1]).
    torch::nn::Linear& link_to_rgb(std::size_t k);
    torch::nn::Linear& link_to_percep(std::size_t k);
    std::size_t link_pairs() const { return to_rgb_.size(); }
    int64_t link_parameter_count() const;
    double max_link_weight_norm() const;

private:
    bool has_link_after(int block_index) const;
    std::size_t link_slot_after(int block_index) const;

    dit::Backbone backbone_{nullptr};
    std::vector<int> link_blocks_;
    torch::Tensor e_time_rgb_, e_time_percep_, e_tok_rgb_, e_tok_percep_;
    std::vector<torch::nn::Linear> to_rgb_, to_percep_;
};

/// Single-stream fusion on the channel axis: input projection widened to 2c
/// channels (the perception half zero-initialized), output split back.
class ChannelFusion : public JointDenoiser {
public:
    explicit ChannelFusion(dit::Backbone base);

    Arch arch() const override { return Arch::Channel; }
    const dit::BackboneConfig& backbone_config() const override { return base_config_; }
    JointOutput forward_joint(const torch::Tensor& z_rgb, const torch::Tensor& z_percep,
                              const torch::Tensor& y, const torch::Tensor& t) override;
    dit::Backbone& backbone() { return backbone_; }

private:
    dit::BackboneConfig base_config_;
    dit::Backbone backbone_{nullptr};
};

/// Single-stream fusion on the width axis: both token grids side by side in
/// one sequence, the perception half shifted in rotary w-position.
class SpatialFusion : public JointDenoiser {
public:
    explicit SpatialFusion(dit::Backbone base, bool offset_percep_positions = true);

    Arch arch() const override { return Arch::Spatial; }
    const dit::BackboneConfig& backbone_config() const override { return backbone_->config(); }
    JointOutput forward_joint(const torch::Tensor& z_rgb, const torch::Tensor& z_percep,
                              const torch::Tensor& y, const torch::Tensor& t) override;
    dit::Backbone& backbone() { return backbone_; }

private:
    dit::Backbone backbone_{nullptr};
    bool offset_;
};

/// Fresh backbone with the same configuration and weights as `base`.
dit::Backbone clone_backbone(dit::Backbone base);

std::shared_ptr<JointDenoiser> make_joint(Arch arch, dit::Backbone base,
                                          const std::vector<int>& link_blocks);

/// Single-stream RGB student carrying the teacher's shared weights, with the
/// RGB task embeddings folded into the patch-embedding and timestep biases so
/// its structure is exactly the base backbone.
dit::Backbone make_student(ParallelTeacher& teacher);

}  // namespace jointvid::bct
