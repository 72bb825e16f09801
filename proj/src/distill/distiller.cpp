// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "distill/distiller.hpp"

#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "dit/diffusion.hpp"
#include "distill/relations.hpp"

namespace jointvid::distill {

ProjectorImpl::ProjectorImpl(int width) : width_(width) {
    require(width >= 1, "projector width must be positive");
    fc1_ = register_module("fc1", torch::nn::Linear(width, 2 * width));
    fc2_ = register_module("fc2", torch::nn::Linear(2 * width, width));
}

torch::Tensor ProjectorImpl::forward(const torch::Tensor& x) {
    return fc2_(torch::gelu(fc1_(x)));
}

void ProjectorImpl::make_identity() {
    // gelu(a) - gelu(-a) = a
    torch::NoGradGuard no_grad;
    auto eye = torch::eye(width_, fc1_->weight.options());
    fc1_->weight.copy_(torch::cat({eye, -eye}, 0));
    fc1_->bias.zero_();
    fc2_->weight.copy_(torch::cat({eye, -eye}, 1));
    fc2_->bias.zero_();
}

void ProjectorImpl::reset_from(torch::Generator& gen) {
    torch::NoGradGuard no_grad;
    for (auto* fc : {&fc1_, &fc2_}) {
        const double bound = 1.0 / std::sqrt(double((*fc)->weight.size(1)));
        for (auto* p : {&(*fc)->weight, &(*fc)->bias}) {
            p->copy_(torch::rand(p->sizes(), gen, p->options()) * (2.0 * bound) - bound);
        }
    }
}

std::vector<torch::Tensor> select_blocks(const std::vector<torch::Tensor>& hidden,
                                         const std::vector<int>& blocks) {
    std::vector<torch::Tensor> out;
    for (int b : blocks) {
        if (b < 1 || b > int(hidden.size())) fail(ErrorKind::InvalidArgument, "block index out of range");
        out.push_back(hidden[std::size_t(b - 1)]);
    }
    return out;
}

torch::Tensor distill_loss(const std::vector<torch::Tensor>& teacher_hidden,
                           const std::vector<torch::Tensor>& student_hidden, Projector& projector,
                           int64_t frames) {
    if (teacher_hidden.size() != student_hidden.size()) {
        fail(ErrorKind::InvalidArgument, "teacher and student block sets differ");
    }
    require(!teacher_hidden.empty(), "no blocks to align");
    torch::Tensor total;
    for (std::size_t l = 0; l < teacher_hidden.size(); ++l) {
        if (teacher_hidden[l].sizes() != student_hidden[l].sizes()) {
            fail(ErrorKind::InvalidArgument, "teacher and student hidden shapes differ");
        }
        auto t = as_grid(teacher_hidden[l], frames);
        auto s = as_grid(projector->forward(student_hidden[l]), frames);
        auto term = (relation_spatial(t) - relation_spatial(s)).abs().mean() +
                    (relation_temporal(t) - relation_temporal(s)).abs().mean();
        total = total.defined() ? total + term : term;
    }
    return total / double(teacher_hidden.size());
}

Stage2Result stage2_train(bct::ParallelTeacher& teacher, const bct::PairedLatents& data,
                          const Stage2Hyper& hyper, const bct::StepCallback& on_step) {
    if (data.size() == 0) fail(ErrorKind::InvalidArgument, "empty dataset");
    require(data.percep.defined(), "stage II needs paired perception latents");
    require(hyper.lambda >= 0.0, "lambda must be non-negative");
    const auto& blocks = teacher.link_blocks();
    require(!blocks.empty(), "teacher has no link blocks to align");

    for (auto& p : teacher.parameters()) p.set_requires_grad(false);
    teacher.eval();

    Stage2Result result;
    result.student = bct::make_student(teacher);
    const auto& cfg = result.student->config();
    result.projector = Projector(cfg.width);
    result.projector->to(result.student->patch_embed()->weight.scalar_type());
    {
        auto init = at::make_generator<at::CPUGeneratorImpl>(hyper.seed ^ 0x9e3779b97f4a7c15ULL);
        result.projector->reset_from(init);
    }

    std::vector<torch::optim::OptimizerParamGroup> groups;
    groups.emplace_back(result.student->parameters(),
                        std::make_unique<torch::optim::AdamWOptions>(
                            torch::optim::AdamWOptions(hyper.lr).weight_decay(hyper.weight_decay)));
    groups.emplace_back(result.projector->parameters(),
                        std::make_unique<torch::optim::AdamWOptions>(
                            torch::optim::AdamWOptions(hyper.projector_lr).weight_decay(hyper.weight_decay)));
    torch::optim::AdamW optimizer(std::move(groups));

    auto gen = at::make_generator<at::CPUGeneratorImpl>(hyper.seed);
    const int null_class = cfg.null_class();
    const int64_t frames = cfg.token_grid()[0];
    result.student->train();
    result.projector->train();
    for (int step = 1; step <= hyper.steps; ++step) {
        auto idx = torch::randint(data.size(), {hyper.batch}, gen, torch::kLong);
        auto batch = data.select(idx);
        auto t = torch::rand({hyper.batch}, gen, batch.rgb.options());
        auto eps_rgb = dit::draw_normal_like(batch.rgb, gen);
        auto eps_percep = dit::draw_normal_like(batch.percep, gen);
        auto y = dit::drop_condition(batch.labels, hyper.cond_dropout, null_class, gen);
        auto z_rgb = dit::noise_forward(batch.rgb, t, eps_rgb);

        std::vector<torch::Tensor> teacher_hidden;
        {
            torch::NoGradGuard no_grad;
            auto out = teacher.forward_joint(z_rgb, dit::noise_forward(batch.percep, t, eps_percep), y, t);
            teacher_hidden = select_blocks(out.hidden_rgb, blocks);
        }
        auto student_out = result.student->forward(z_rgb, y, t);
        auto l_diff = dit::noise_mse(student_out.eps, eps_rgb);
        auto l_distill = distill_loss(teacher_hidden, select_blocks(student_out.hidden, blocks),
                                      result.projector, frames);
        auto loss = hyper.lambda > 0.0 ? l_diff + hyper.lambda * l_distill : l_diff;

        Stage2Step rec{step, l_diff.item<double>(), l_distill.item<double>(), loss.item<double>()};
        if (!std::isfinite(rec.total) || !std::isfinite(rec.distill)) {
            std::ostringstream os;
            os << "non-finite stage II loss at step " << step;
            fail(ErrorKind::Numeric, os.str());
        }
        optimizer.zero_grad();
        loss.backward();
        optimizer.step();
        result.curve.push_back(rec);
        if (on_step) on_step(step);
    }
    result.student->eval();
    result.projector->eval();
    return result;
}

}  // namespace jointvid::distill
