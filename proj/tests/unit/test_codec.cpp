// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "codec/codec.hpp"
#include "common/error.hpp"

using namespace jointvid;

TEST_SUITE("codec") {

TEST_CASE("latent shape contract") {
    codec::LatentCodec c;
    CHECK(c.latent_shape(16, 64, 64) == std::vector<int64_t>{24, 8, 32, 32});
    auto z = c.encode(torch::rand({3, 16, 64, 64}));
    CHECK(z.sizes() == torch::IntArrayRef({24, 8, 32, 32}));
    codec::LatentCodec wide({4, 4, 0.5, 0.5});
    CHECK(wide.latent_shape(8, 32, 16) == std::vector<int64_t>{192, 2, 8, 4});
}

TEST_CASE("roundtrip is exact") {
    codec::LatentCodec c;
    auto gen = at::make_generator<at::CPUGeneratorImpl>(3);
    auto x = torch::rand({3, 16, 64, 64}, gen);
    CHECK(torch::equal(c.decode(c.encode(x)), x));
    auto xb = torch::rand({2, 3, 4, 8, 8}, gen);
    CHECK(torch::equal(c.decode(c.encode(xb)), xb));
}

TEST_CASE("layout matches an element-wise oracle") {
    const codec::CodecConfig cfg{2, 2, 0.5, 0.5};
    codec::LatentCodec c(cfg);
    auto x = torch::rand({3, 4, 6, 4}, torch::kFloat64);
    auto z = c.encode(x);
    auto xa = x.accessor<double, 4>();
    auto za = z.accessor<double, 4>();
    for (int ch = 0; ch < 3; ++ch) {
        for (int f = 0; f < 4; ++f) {
            for (int y = 0; y < 6; ++y) {
                for (int w = 0; w < 4; ++w) {
                    const int dt = f % 2, dy = y % 2, dx = w % 2;
                    const int lc = ((ch * 2 + dt) * 2 + dy) * 2 + dx;
                    REQUIRE(za[lc][f / 2][y / 2][w / 2] == (xa[ch][f][y][w] - 0.5) / 0.5);
                }
            }
        }
    }
}

TEST_CASE("constant and identity cases") {
    codec::LatentCodec c;
    auto z = c.encode(torch::zeros({3, 2, 4, 4}));
    CHECK(torch::all(z == -1.0).item<bool>());
    codec::LatentCodec id({1, 1, 0.5, 0.5});
    auto x = torch::rand({3, 3, 5, 7});
    CHECK(torch::equal(id.encode(x), (x - 0.5) / 0.5));
}

TEST_CASE("encode is affine-linear") {
    codec::LatentCodec c;
    auto x = torch::rand({3, 4, 8, 8}, torch::kFloat64);
    auto y = torch::rand({3, 4, 8, 8}, torch::kFloat64);
    const double a = 0.7, b = -1.3;
    const double s = c.config().shift / c.config().scale;
    auto lhs = c.encode(a * x + b * y);
    auto rhs = a * c.encode(x) + b * c.encode(y) + (a + b - 1.0) * s;
    CHECK(torch::allclose(lhs, rhs, 0.0, 1e-12));
}

TEST_CASE("indivisible axes name the axis") {
    codec::LatentCodec c;
    CHECK_THROWS_WITH(c.encode(torch::zeros({3, 3, 4, 4})), doctest::Contains("frames"));
    CHECK_THROWS_WITH(c.encode(torch::zeros({3, 2, 5, 4})), doctest::Contains("height"));
    CHECK_THROWS_WITH(c.encode(torch::zeros({3, 2, 4, 5})), doctest::Contains("width"));
    CHECK_THROWS_AS(c.decode(torch::zeros({5, 1, 2, 2})), Error);
}

TEST_CASE("video wrappers roundtrip") {
    codec::LatentCodec c;
    Video v(4, 8, 8);
    for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] = float(i % 97) / 97.0f;
    auto block = c.encode(v);
    auto back = c.decode(block);
    CHECK(back.same_shape(v));
    REQUIRE(back.data.size() == v.data.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < v.data.size(); ++i) worst = std::max(worst, double(std::abs(back.data[i] - v.data[i])));
    CHECK(worst <= 1e-6);
    block.config.temporal_factor = 1;
    CHECK_THROWS_AS(c.decode(block), Error);
}

}
