// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "common/error.hpp"
#include "dit/diffusion.hpp"
#include "oracles.hpp"

using namespace jointvid;

TEST_SUITE("dit") {

TEST_CASE("noise_forward") {
    auto z0 = torch::randn({2, 3, 4});
    auto eps = torch::randn({2, 3, 4});
    CHECK(torch::equal(dit::noise_forward(z0, 0.0, eps), z0));
    CHECK(torch::equal(dit::noise_forward(torch::zeros_like(eps), 1.0, eps), eps));
    auto two = torch::full({1}, 2.0, torch::kFloat64);
    auto one = torch::ones({1}, torch::kFloat64);
    CHECK(dit::noise_forward(two, 0.5, one).item<double>() == 2.5);
    CHECK_THROWS_AS(dit::noise_forward(z0, 1.5, eps), Error);
    CHECK_THROWS_AS(dit::noise_forward(z0, torch::tensor({-0.1, 0.2}), eps), Error);
    auto t = torch::tensor({0.0, 1.0}, torch::kFloat32);
    auto zt = dit::noise_forward(z0, t, eps);
    CHECK(torch::equal(zt[0], z0[0]));
    CHECK(torch::allclose(zt[1], z0[1] + eps[1]));
}

TEST_CASE("config validation") {
    auto c = test::tiny_backbone();
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.depth = 1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = c;
    bad.heads = 3;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = c;
    bad.patch = {1, 3, 2};
    CHECK_THROWS_WITH(bad.validate(), doctest::Contains("axis h"));
}

TEST_CASE("forward shape and determinism") {
    torch::manual_seed(0);
    dit::Backbone m(test::tiny_backbone());
    m->eval();
    auto z = torch::randn({2, 12, 2, 4, 4});
    auto y = torch::tensor({0, 3}, torch::kLong);
    auto t = torch::tensor({0.2f, 0.9f});
    auto a = m->forward(z, y, t);
    auto b = m->forward(z, y, t);
    CHECK(a.eps.sizes() == z.sizes());
    CHECK(torch::equal(a.eps, b.eps));
    CHECK(a.hidden.size() == 2);
    CHECK(a.hidden[0].sizes() == torch::IntArrayRef({2, m->config().tokens(), 32}));
}

TEST_CASE("timestep embedding is finite and smooth") {
    torch::manual_seed(0);
    dit::Backbone m(test::tiny_backbone());
    auto t = torch::linspace(0.0, 1.0, 1001);
    auto e = m->time_embedding(t);
    CHECK(torch::isfinite(e).all().item<bool>());
    auto jump = (e.slice(0, 1) - e.slice(0, 0, -1)).abs().max().item<double>();
    CHECK(jump < 0.5);
}

TEST_CASE("blocks are permutation-equivariant without rotary encoding") {
    auto cfg = test::tiny_backbone();
    cfg.rope = false;
    torch::manual_seed(1);
    dit::Backbone m(cfg);
    m->to(torch::kFloat64);
    auto z = torch::randn({1, 12, 2, 4, 4}, torch::kFloat64);
    auto y = torch::tensor({1}, torch::kLong);
    auto t = torch::tensor({0.4}, torch::kFloat64);
    auto x = m->embed_tokens(z);
    auto cond = m->time_embedding(t) + m->class_embedding(y);
    auto rope = m->default_rope(x.options());
    CHECK_FALSE(rope.enabled());
    auto perm = torch::randperm(x.size(1), torch::kLong);
    auto inv = torch::argsort(perm);
    auto plain = m->run_blocks(x, cond, rope).back();
    auto shuffled = m->run_blocks(x.index_select(1, perm), cond, rope).back().index_select(1, inv);
    CHECK((plain - shuffled).abs().max().item<double>() <= 1e-12);
}

TEST_CASE("rotary encoding preserves norms") {
    auto pos = dit::grid_positions({2, 3, 4});
    CHECK(pos.sizes() == torch::IntArrayRef({24, 3}));
    auto rope = dit::rope_from_positions(pos, 16);
    auto x = torch::randn({1, 2, 24, 16}, torch::kFloat64);
    rope.cos = rope.cos.to(torch::kFloat64);
    rope.sin = rope.sin.to(torch::kFloat64);
    auto r = dit::apply_rope(x, rope);
    CHECK(torch::allclose(r.norm(2, -1), x.norm(2, -1), 1e-12, 1e-12));
}

TEST_CASE("loss under oracle and zero denoisers") {
    torch::manual_seed(2);
    auto eps = torch::randn({64, 12, 2, 4, 4});
    CHECK(dit::noise_mse(eps, eps).item<double>() == 0.0);

    dit::Backbone m(test::tiny_backbone());
    {
        torch::NoGradGuard g;
        m->out_proj()->weight.zero_();
        m->out_proj()->bias.zero_();
    }
    auto gen = at::make_generator<at::CPUGeneratorImpl>(5);
    auto z0 = torch::randn({64, 12, 2, 4, 4});
    auto y = torch::zeros({64}, torch::kLong);
    auto noise = dit::draw_noise(z0, gen);
    auto loss = dit::diffusion_loss(m, z0, y, noise).item<double>();
    CHECK(loss == doctest::Approx(1.0).epsilon(0.05));
    CHECK_THROWS_AS(dit::diffusion_loss(m, z0.slice(0, 0, 0), y.slice(0, 0, 0), noise), Error);
}

TEST_CASE("loss is reproducible for a fixed seed") {
    auto run = [] {
        torch::manual_seed(3);
        dit::Backbone m(test::tiny_backbone());
        auto gen = at::make_generator<at::CPUGeneratorImpl>(9);
        auto z0 = torch::randn({4, 12, 2, 4, 4}, gen);
        auto noise = dit::draw_noise(z0, gen);
        return dit::diffusion_loss(m, z0, torch::tensor({0, 1, 2, 3}, torch::kLong), noise).item<double>();
    };
    const double a = run(), b = run();
    CHECK(a == b);
    CHECK(a > 0.0);
}

TEST_CASE("condition dropout") {
    auto gen = at::make_generator<at::CPUGeneratorImpl>(1);
    auto y = torch::zeros({10000}, torch::kLong);
    auto dropped = dit::drop_condition(y, 0.1, 4, gen);
    const double frac = (dropped == 4).to(torch::kFloat64).mean().item<double>();
    CHECK(frac == doctest::Approx(0.1).epsilon(0.1));
    CHECK(torch::equal(dit::drop_condition(y, 0.0, 4, gen), y));
}

TEST_CASE("one-step sampler removes the predicted noise once") {
    const std::vector<int64_t> shape{12, 2, 4, 4};
    auto y = torch::tensor({0, 1}, torch::kLong);
    dit::SamplerOptions opt;
    opt.steps = 1;
    opt.data_std = 0.5;
    auto eps_fn = [](const torch::Tensor& z, const torch::Tensor&, const torch::Tensor&) {
        return torch::full_like(z, 0.25);
    };
    auto out = dit::sample_latents(eps_fn, shape, y, opt, 42);
    auto gen = at::make_generator<at::CPUGeneratorImpl>(42);
    auto z1 = torch::randn({2, 12, 2, 4, 4}, gen, torch::kFloat32) * std::sqrt(1.25);
    CHECK(torch::allclose(out, z1 - 0.25, 0.0, 1e-6));
    CHECK(torch::equal(out, dit::sample_latents(eps_fn, shape, y, opt, 42)));
}

TEST_CASE("sampler recovers the clean latent under an exact predictor") {
    // With eps_hat = (z - z0) / t, every step lands on z0.
    const std::vector<int64_t> shape{12, 2, 4, 4};
    auto z0 = torch::randn({1, 12, 2, 4, 4});
    auto eps_fn = [&](const torch::Tensor& z, const torch::Tensor&, const torch::Tensor& t) {
        return (z - z0) / t.view({-1, 1, 1, 1, 1});
    };
    dit::SamplerOptions opt;
    opt.steps = 10;
    auto out = dit::sample_latents(eps_fn, shape, torch::tensor({0}, torch::kLong), opt, 1);
    CHECK(torch::allclose(out, z0, 1e-5, 1e-5));
}

TEST_CASE("guidance mixes conditional and null predictions") {
    const std::vector<int64_t> shape{12, 2, 4, 4};
    auto eps_fn = [](const torch::Tensor& z, const torch::Tensor& y, const torch::Tensor&) {
        return torch::ones_like(z) * y.to(z.dtype()).view({-1, 1, 1, 1, 1});
    };
    dit::SamplerOptions opt;
    opt.steps = 1;
    opt.guidance = 3.0;
    CHECK_THROWS_AS(dit::sample_latents(eps_fn, shape, torch::tensor({1}, torch::kLong), opt, 0), Error);
    opt.null_class = 0;
    auto guided = dit::sample_latents(eps_fn, shape, torch::tensor({1}, torch::kLong), opt, 0);
    opt.guidance = 1.0;
    auto plain = dit::sample_latents(eps_fn, shape, torch::tensor({1}, torch::kLong), opt, 0);
    // eps_hat = 0 + 3 * (1 - 0) = 3 versus 1.
    CHECK(torch::allclose(plain - guided, torch::full_like(plain, 2.0), 0.0, 1e-5));
}

TEST_CASE("loss gradient matches central differences") {
    auto cfg = test::tiny_backbone();
    torch::manual_seed(4);
    dit::Backbone m(cfg);
    m->to(torch::kFloat64);
    test::perturb_zero_init(*m, 4);
    auto gen = at::make_generator<at::CPUGeneratorImpl>(6);
    auto z0 = torch::randn({2, 12, 2, 4, 4}, gen, torch::kFloat64);
    auto noise = dit::draw_noise(z0, gen);
    auto y = torch::tensor({0, 2}, torch::kLong);
    auto loss = [&] { return dit::diffusion_loss(m, z0, y, noise); };
    const auto worst = test::directional_gradient_check(*m, loss, 5, 11);
    CHECK(worst <= 1e-3);
}

}
