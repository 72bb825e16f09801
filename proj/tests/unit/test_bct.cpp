// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <chrono>

#include "bct/joint.hpp"
#include "bct/train.hpp"
#include "common/error.hpp"
#include "oracles.hpp"

using namespace jointvid;

namespace {

struct Inputs {
    torch::Tensor rgb, percep, y, t;
};

Inputs random_inputs(uint64_t seed, torch::Dtype dtype = torch::kFloat64, int64_t batch = 2) {
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    return {torch::randn({batch, 12, 2, 4, 4}, gen, dtype), torch::randn({batch, 12, 2, 4, 4}, gen, dtype),
            torch::randint(5, {batch}, gen, torch::kLong), torch::rand({batch}, gen, dtype)};
}

bct::ParallelTeacher double_teacher(uint64_t seed, std::vector<int> links = {1, 2}) {
    torch::manual_seed(seed);
    dit::Backbone base(test::tiny_backbone());
    base->to(torch::kFloat64);
    return bct::ParallelTeacher(base, std::move(links));
}

double max_diff(const torch::Tensor& a, const torch::Tensor& b) { return (a - b).abs().max().item<double>(); }

}  // namespace

TEST_SUITE("bct") {

TEST_CASE("default link placement") {
    CHECK(bct::default_link_blocks(8) == std::vector<int>{2, 5, 8});
    CHECK(bct::default_link_blocks(4) == std::vector<int>{1, 4});
    CHECK(bct::default_link_blocks(2) == std::vector<int>{2});
    CHECK(bct::arch_from_string("spatial") == bct::Arch::Spatial);
    CHECK_THROWS_AS(bct::arch_from_string("mixed"), Error);
}

TEST_CASE("links start at exactly zero") {
    auto teacher = double_teacher(0);
    REQUIRE(teacher.link_pairs() == 3);
    auto x = torch::randn({3, 5, 32}, torch::kFloat64);
    for (std::size_t k = 0; k < teacher.link_pairs(); ++k) {
        CHECK(torch::all(teacher.link_to_rgb(k)(x) == 0).item<bool>());
        CHECK(torch::all(teacher.link_to_percep(k)(x) == 0).item<bool>());
    }
    CHECK(teacher.max_link_weight_norm() == 0.0);
    CHECK_THROWS_AS(double_teacher(0, {0}), Error);
    CHECK_THROWS_AS(double_teacher(0, {1, 1}), Error);
}

TEST_CASE("fresh teacher equals two independent branches") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto teacher = double_teacher(seed);
        teacher.eval();
        auto in = random_inputs(seed);
        auto joint = teacher.forward_joint(in.rgb, in.percep, in.y, in.t);
        auto rgb = teacher.branch_forward(bct::Modality::Rgb, in.rgb, in.y, in.t);
        auto percep = teacher.branch_forward(bct::Modality::Percep, in.percep, in.y, in.t);
        CHECK(max_diff(joint.eps_rgb, rgb.eps) <= 1e-6);
        CHECK(max_diff(joint.eps_percep, percep.eps) <= 1e-6);
        CHECK(joint.tokens == teacher.backbone()->config().tokens());
    }
}

TEST_CASE("equal task embeddings and inputs give equal branches") {
    auto teacher = double_teacher(1);
    {
        torch::NoGradGuard g;
        teacher.token_task(bct::Modality::Percep).copy_(teacher.token_task(bct::Modality::Rgb));
    }
    auto in = random_inputs(2);
    auto out = teacher.forward_joint(in.rgb, in.rgb, in.y, in.t);
    CHECK(torch::equal(out.eps_rgb, out.eps_percep));
}

TEST_CASE("different task embeddings separate the branches") {
    auto teacher = double_teacher(2);
    {
        torch::NoGradGuard g;
        teacher.time_task(bct::Modality::Rgb).normal_(0.0, 0.5);
        teacher.time_task(bct::Modality::Percep).normal_(0.0, 0.5);
    }
    auto in = random_inputs(3);
    auto out = teacher.forward_joint(in.rgb, in.rgb, in.y, in.t);
    CHECK(max_diff(out.eps_rgb, out.eps_percep) > 0.0);
}

TEST_CASE("branches share one weight set") {
    auto teacher = double_teacher(3);
    auto in = random_inputs(4);
    auto before = teacher.forward_joint(in.rgb, in.percep, in.y, in.t);
    {
        torch::NoGradGuard g;
        teacher.backbone()->patch_embed()->weight.mul_(1.5);
    }
    auto after = teacher.forward_joint(in.rgb, in.percep, in.y, in.t);
    CHECK(max_diff(before.eps_rgb, after.eps_rgb) > 0.0);
    CHECK(max_diff(before.eps_percep, after.eps_percep) > 0.0);

    const int64_t d = 32, links = 2;
    const int64_t single = dit::parameter_count(*teacher.backbone());
    CHECK(teacher.link_parameter_count() == (links + 1) * 2 * (d * d + d));
    CHECK(dit::parameter_count(teacher) == single + 4 * d + teacher.link_parameter_count());
}

TEST_CASE("links couple the branches once trained") {
    auto teacher = double_teacher(4);
    {
        torch::NoGradGuard g;
        teacher.link_to_rgb(1)->weight.normal_(0.0, 0.1);
    }
    auto in = random_inputs(5);
    auto a = teacher.forward_joint(in.rgb, in.percep, in.y, in.t);
    auto b = teacher.forward_joint(in.rgb, in.percep * 2.0, in.y, in.t);
    CHECK(max_diff(a.eps_rgb, b.eps_rgb) > 0.0);
    auto lone = teacher.branch_forward(bct::Modality::Rgb, in.rgb, in.y, in.t);
    CHECK(max_diff(a.eps_rgb, lone.eps) > 0.0);
}

TEST_CASE("channel fusion is neutral at init") {
    torch::manual_seed(5);
    dit::Backbone base(test::tiny_backbone());
    base->to(torch::kFloat64);
    bct::ChannelFusion fused(base);
    auto in = random_inputs(6);
    auto out = fused.forward_joint(in.rgb, in.percep, in.y, in.t);
    auto ref = base->forward(in.rgb, in.y, in.t);
    CHECK(out.eps_rgb.sizes() == in.rgb.sizes());
    CHECK(out.eps_percep.sizes() == in.percep.sizes());
    CHECK(max_diff(out.eps_rgb, ref.eps) <= 1e-6);
    CHECK(out.tokens == base->config().tokens());
}

TEST_CASE("spatial fusion doubles the sequence") {
    torch::manual_seed(6);
    dit::Backbone base(test::tiny_backbone());
    base->to(torch::kFloat64);
    bct::SpatialFusion fused(base);
    auto in = random_inputs(7);
    auto out = fused.forward_joint(in.rgb, in.percep, in.y, in.t);
    CHECK(out.tokens == 2 * base->config().tokens());
    CHECK(out.eps_rgb.sizes() == in.rgb.sizes());

    bct::SpatialFusion no_offset(base, false);
    auto same = no_offset.forward_joint(in.rgb, in.rgb, in.y, in.t);
    CHECK(max_diff(same.eps_rgb, same.eps_percep) <= 1e-12);
}

TEST_CASE("mismatched modality shapes are rejected") {
    auto teacher = double_teacher(7);
    auto in = random_inputs(8);
    CHECK_THROWS_AS(teacher.forward_joint(in.rgb, in.percep.slice(2, 0, 1), in.y, in.t), Error);
}

TEST_CASE("spatial fusion costs more per step than channel fusion") {
    auto cfg = test::tiny_backbone();
    cfg.latent_grid = {2, 8, 8};
    cfg.width = 64;
    cfg.heads = 4;
    torch::manual_seed(8);
    dit::Backbone base(cfg);
    bct::ChannelFusion channel(base);
    bct::SpatialFusion spatial(base);
    auto gen = at::make_generator<at::CPUGeneratorImpl>(1);
    auto z = torch::randn({4, 12, 2, 8, 8}, gen);
    auto y = torch::zeros({4}, torch::kLong);
    auto t = torch::full({4}, 0.5f);
    torch::NoGradGuard g;
    auto median_ms = [&](bct::JointDenoiser& m) {
        std::vector<double> ms;
        for (int i = 0; i < 15; ++i) {
            const auto start = std::chrono::steady_clock::now();
            m.forward_joint(z, z, y, t);
            ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
        }
        std::sort(ms.begin(), ms.end());
        return ms[ms.size() / 2];
    };
    median_ms(channel);
    median_ms(spatial);
    CHECK(median_ms(spatial) > median_ms(channel));
}

TEST_CASE("zero learning rate leaves parameters untouched") {
    torch::manual_seed(9);
    auto joint = bct::make_joint(bct::Arch::Parallel, dit::Backbone(test::tiny_backbone()), {1, 2});
    std::vector<torch::Tensor> before;
    for (const auto& p : joint->parameters()) before.push_back(p.detach().clone());
    bct::TrainHyper h;
    h.steps = 5;
    h.lr = 0.0;
    bct::stage1_train(*joint, test::random_pairs(8, 1), h);
    auto after = joint->parameters();
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(torch::equal(before[i], after[i]));
}

TEST_CASE("every architecture trains on one shared config") {
    for (auto arch : {bct::Arch::Parallel, bct::Arch::Channel, bct::Arch::Spatial}) {
        torch::manual_seed(10);
        auto joint = bct::make_joint(arch, dit::Backbone(test::tiny_backbone()), {1, 2});
        bct::TrainHyper h;
        h.steps = 4;
        auto curve = bct::stage1_train(*joint, test::random_pairs(8, 2), h);
        REQUIRE(curve.size() == 4);
        for (const auto& c : curve) {
            CHECK(std::isfinite(c.joint));
            CHECK(c.joint == doctest::Approx(0.5 * (c.rgb + c.percep)));
        }
        auto val = bct::joint_validation_loss(*joint, test::random_pairs(6, 3), 0);
        CHECK(std::isfinite(val.joint));
    }
}

TEST_CASE("stage I is deterministic per seed") {
    auto run = [] {
        torch::manual_seed(11);
        auto joint = bct::make_joint(bct::Arch::Parallel, dit::Backbone(test::tiny_backbone()), {2});
        bct::TrainHyper h;
        h.steps = 6;
        h.seed = 4;
        std::vector<double> out;
        for (const auto& c : bct::stage1_train(*joint, test::random_pairs(8, 4), h)) out.push_back(c.joint);
        return out;
    };
    CHECK(run() == run());
}

TEST_CASE("stage I rejects bad data") {
    torch::manual_seed(12);
    auto joint = bct::make_joint(bct::Arch::Parallel, dit::Backbone(test::tiny_backbone()), {2});
    bct::TrainHyper h;
    h.steps = 2;
    CHECK_THROWS_AS(bct::stage1_train(*joint, bct::PairedLatents{}, h), Error);
    auto data = test::random_pairs(4, 5);
    data.rgb[0].fill_(std::nan(""));
    h.batch = 4;
    try {
        bct::stage1_train(*joint, data, h);
        FAIL("expected a numeric failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Numeric);
    }
}

TEST_CASE("links receive gradient during training") {
    torch::manual_seed(13);
    auto joint = bct::make_joint(bct::Arch::Parallel, dit::Backbone(test::tiny_backbone()), {1, 2});
    bct::TrainHyper h;
    h.steps = 200;
    bct::stage1_train(*joint, test::random_pairs(32, 6), h);
    auto& teacher = dynamic_cast<bct::ParallelTeacher&>(*joint);
    CHECK(teacher.max_link_weight_norm() > 1e-4);
}

TEST_CASE("moving averages") {
    std::vector<double> v{4, 4, 2, 2};
    CHECK(bct::leading_average(v, 2) == 4.0);
    CHECK(bct::trailing_average(v, 2) == 2.0);
    CHECK(bct::leading_average(v, 10) == 3.0);
}

}
