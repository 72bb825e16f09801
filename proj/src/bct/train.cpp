// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bct/train.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "common/error.hpp"
#include "dit/diffusion.hpp"

namespace jointvid::bct {

PairedLatents PairedLatents::select(const torch::Tensor& index) const {
    PairedLatents out;
    out.rgb = rgb.index_select(0, index);
    if (percep.defined()) out.percep = percep.index_select(0, index);
    out.labels = labels.index_select(0, index);
    return out;
}

namespace {

torch::optim::AdamW make_optimizer(std::vector<torch::Tensor> params, const TrainHyper& hyper) {
    return torch::optim::AdamW(
        std::move(params), torch::optim::AdamWOptions(hyper.lr).weight_decay(hyper.weight_decay));
}

void check_finite(double value, int step, const std::string& what) {
    if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "non-finite " << what << " at step " << step << " (value " << value << ")";
        fail(ErrorKind::Numeric, os.str());
    }
}

void check_data(const PairedLatents& data, bool need_percep) {
    if (data.size() == 0) fail(ErrorKind::InvalidArgument, "empty dataset");
    if (need_percep && (!data.percep.defined() || data.percep.sizes() != data.rgb.sizes())) {
        fail(ErrorKind::InvalidArgument, "dataset lacks paired perception latents");
    }
}

}  // namespace

std::vector<JointStepLoss> stage1_train(JointDenoiser& model, const PairedLatents& data,
                                        const TrainHyper& hyper, const StepCallback& on_step) {
    check_data(data, true);
    require(hyper.batch >= 1, "batch must be at least 1");
    auto gen = at::make_generator<at::CPUGeneratorImpl>(hyper.seed);
    auto optimizer = make_optimizer(model.parameters(), hyper);
    const int null_class = model.backbone_config().null_class();
    model.train();

    std::vector<JointStepLoss> curve;
    curve.reserve(hyper.steps);
    for (int step = 1; step <= hyper.steps; ++step) {
        auto idx = torch::randint(data.size(), {hyper.batch}, gen, torch::kLong);
        auto batch = data.select(idx);
        auto t = torch::rand({hyper.batch}, gen, batch.rgb.options());
        auto eps_rgb = dit::draw_normal_like(batch.rgb, gen);
        auto eps_percep = dit::draw_normal_like(batch.percep, gen);
        auto y = dit::drop_condition(batch.labels, hyper.cond_dropout, null_class, gen);

        auto out = model.forward_joint(dit::noise_forward(batch.rgb, t, eps_rgb),
                                       dit::noise_forward(batch.percep, t, eps_percep), y, t);
        auto loss_rgb = dit::noise_mse(out.eps_rgb, eps_rgb);
        auto loss_percep = dit::noise_mse(out.eps_percep, eps_percep);
        auto loss = 0.5 * (loss_rgb + loss_percep);

        JointStepLoss rec{step, loss.item<double>(), loss_rgb.item<double>(), loss_percep.item<double>()};
        check_finite(rec.joint, step, "joint loss");
        optimizer.zero_grad();
        loss.backward();
        optimizer.step();
        curve.push_back(rec);
        if (on_step) on_step(step);
    }
    model.eval();
    return curve;
}

std::vector<double> train_rgb(dit::Backbone& model, const PairedLatents& data, const TrainHyper& hyper,
                              const StepCallback& on_step) {
    check_data(data, false);
    auto gen = at::make_generator<at::CPUGeneratorImpl>(hyper.seed);
    auto optimizer = make_optimizer(model->parameters(), hyper);
    const int null_class = model->config().null_class();
    model->train();
    std::vector<double> curve;
    for (int step = 1; step <= hyper.steps; ++step) {
        auto idx = torch::randint(data.size(), {hyper.batch}, gen, torch::kLong);
        auto batch = data.select(idx);
        auto t = torch::rand({hyper.batch}, gen, batch.rgb.options());
        auto eps = dit::draw_normal_like(batch.rgb, gen);
        // Drawn to keep the random stream aligned with stage I.
        dit::draw_normal_like(batch.rgb, gen);
        auto y = dit::drop_condition(batch.labels, hyper.cond_dropout, null_class, gen);
        auto loss = dit::diffusion_loss(model, batch.rgb, y, dit::NoiseDraw{t, eps});
        const double value = loss.item<double>();
        check_finite(value, step, "diffusion loss");
        optimizer.zero_grad();
        loss.backward();
        optimizer.step();
        curve.push_back(value);
        if (on_step) on_step(step);
    }
    model->eval();
    return curve;
}

JointStepLoss joint_validation_loss(JointDenoiser& model, const PairedLatents& data, uint64_t seed,
                                    int batch) {
    check_data(data, true);
    torch::NoGradGuard no_grad;
    model.eval();
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    double sum_rgb = 0.0, sum_percep = 0.0;
    int64_t count = 0;
    for (int64_t start = 0; start < data.size(); start += batch) {
        const int64_t n = std::min<int64_t>(batch, data.size() - start);
        auto part = data.select(torch::arange(start, start + n));
        auto t = torch::rand({n}, gen, part.rgb.options());
        auto eps_rgb = dit::draw_normal_like(part.rgb, gen);
        auto eps_percep = dit::draw_normal_like(part.percep, gen);
        auto out = model.forward_joint(dit::noise_forward(part.rgb, t, eps_rgb),
                                       dit::noise_forward(part.percep, t, eps_percep), part.labels, t);
        sum_rgb += dit::noise_mse(out.eps_rgb, eps_rgb).item<double>() * n;
        sum_percep += dit::noise_mse(out.eps_percep, eps_percep).item<double>() * n;
        count += n;
    }
    JointStepLoss r;
    r.rgb = sum_rgb / count;
    r.percep = sum_percep / count;
    r.joint = 0.5 * (r.rgb + r.percep);
    return r;
}

double rgb_validation_loss(dit::Backbone& model, const PairedLatents& data, uint64_t seed, int batch) {
    check_data(data, false);
    torch::NoGradGuard no_grad;
    model->eval();
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    double sum = 0.0;
    int64_t count = 0;
    for (int64_t start = 0; start < data.size(); start += batch) {
        const int64_t n = std::min<int64_t>(batch, data.size() - start);
        auto part = data.select(torch::arange(start, start + n));
        auto t = torch::rand({n}, gen, part.rgb.options());
        auto eps = dit::draw_normal_like(part.rgb, gen);
        // Same stream layout as joint_validation_loss, so RGB noise matches.
        dit::draw_normal_like(part.rgb, gen);
        sum += dit::diffusion_loss(model, part.rgb, part.labels, dit::NoiseDraw{t, eps}).item<double>() * n;
        count += n;
    }
    return sum / count;
}

double leading_average(const std::vector<double>& values, std::size_t window) {
    require(!values.empty(), "no values to average");
    const std::size_t n = std::min(window, values.size());
    return std::accumulate(values.begin(), values.begin() + std::ptrdiff_t(n), 0.0) / double(n);
}

double trailing_average(const std::vector<double>& values, std::size_t window) {
    require(!values.empty(), "no values to average");
    const std::size_t n = std::min(window, values.size());
    return std::accumulate(values.end() - std::ptrdiff_t(n), values.end(), 0.0) / double(n);
}

}  // namespace jointvid::bct
