// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <torch/torch.h>

#include "bct/joint.hpp"
#include "bct/train.hpp"

namespace jointvid::distill {

/// Two-layer MLP from student width to teacher width, hidden width 2d.
class ProjectorImpl : public torch::nn::Module {
public:
    explicit ProjectorImpl(int width);
    torch::Tensor forward(const torch::Tensor& x);
    /// Sets the projector to the exact identity map (used by tests).
    void make_identity();
    /// Redraws weights and biases uniformly in +-1/sqrt(fan_in) from `gen`.
    void reset_from(torch::Generator& gen);
    int width() const { return width_; }

private:
    int width_;
    torch::nn::Linear fc1_{nullptr}, fc2_{nullptr};
};
TORCH_MODULE(Projector);

/// Mean over blocks of mean |dR_spa| + mean |dR_temp| between teacher token
/// grids and projected student grids. Both lists hold one [B, N, d] sequence
/// per aligned block, in the same order.
torch::Tensor distill_loss(const std::vector<torch::Tensor>& teacher_hidden,
                           const std::vector<torch::Tensor>& student_hidden, Projector& projector,
                           int64_t frames);

/// Picks the hidden states of the given 1-based blocks.
std::vector<torch::Tensor> select_blocks(const std::vector<torch::Tensor>& hidden,
                                         const std::vector<int>& blocks);

struct Stage2Hyper {
    int steps = 500;
    int batch = 4;
    double lr = 2e-5;
    double projector_lr = 1e-3;
    double weight_decay = 0.01;
    double lambda = 0.5;
    double cond_dropout = 0.1;
    uint64_t seed = 0;
};

struct Stage2Step {
    int step = 0;
    double diffusion = 0.0;
    double distill = 0.0;
    double total = 0.0;
};

struct Stage2Result {
    dit::Backbone student{nullptr};
    Projector projector{nullptr};
    std::vector<Stage2Step> curve;
};

/// Stage II: a single-stream RGB student initialized from the teacher's
/// shared weights, trained on the RGB noise loss plus lambda times the
/// relation loss against the frozen teacher's post-link RGB states.
Stage2Result stage2_train(bct::ParallelTeacher& teacher, const bct::PairedLatents& data,
                          const Stage2Hyper& hyper, const bct::StepCallback& on_step = {});

}  // namespace jointvid::distill
