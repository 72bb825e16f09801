// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <torch/torch.h>

#include "bct/joint.hpp"

namespace jointvid::bct {

/// Paired clean latents held in memory: [N, c, f, h, w] each, labels [N].
struct PairedLatents {
    torch::Tensor rgb;
    torch::Tensor percep;
    torch::Tensor labels;

    int64_t size() const { return rgb.defined() ? rgb.size(0) : 0; }
    /// Rows `index` of every field.
    PairedLatents select(const torch::Tensor& index) const;
};

struct TrainHyper {
    int steps = 500;
    int batch = 4;
    double lr = 2e-4;
    double weight_decay = 0.01;
    double cond_dropout = 0.1;
    uint64_t seed = 0;
};

struct JointStepLoss {
    int step = 0;
    double joint = 0.0;
    double rgb = 0.0;
    double percep = 0.0;
};

using StepCallback = std::function<void(int step)>;

/// Stage I: AdamW on the unweighted mean of the RGB and perception noise
/// losses. Each pair shares one t; the two modalities get independent noise.
/// Aborts with a diagnostic on a non-finite loss.
std::vector<JointStepLoss> stage1_train(JointDenoiser& model, const PairedLatents& data,
                                        const TrainHyper& hyper, const StepCallback& on_step = {});

/// Plain single-stream RGB training with the same sampling and optimizer
/// settings; the baseline row of the distillation ablation.
std::vector<double> train_rgb(dit::Backbone& model, const PairedLatents& data,
                              const TrainHyper& hyper, const StepCallback& on_step = {});

/// Joint loss on fixed, seed-determined noise over the whole set (no dropout).
JointStepLoss joint_validation_loss(JointDenoiser& model, const PairedLatents& data, uint64_t seed,
                                    int batch = 8);
double rgb_validation_loss(dit::Backbone& model, const PairedLatents& data, uint64_t seed,
                           int batch = 8);

/// Mean over the first `window` entries, the reference for decrease checks.
double leading_average(const std::vector<double>& values, std::size_t window = 10);
double trailing_average(const std::vector<double>& values, std::size_t window = 10);

}  // namespace jointvid::bct
