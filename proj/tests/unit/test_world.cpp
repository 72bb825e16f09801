// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "common/error.hpp"
#include "world/scene.hpp"

using namespace jointvid;
using world::Vec3;

namespace {

world::SceneSpec one_ball(Vec3 position, Vec3 velocity, Vec3 gravity, int frames = 16) {
    world::SceneSpec s;
    s.seed = 7;
    s.frames = frames;
    s.height = s.width = 32;
    s.camera = world::Camera::framing(32, 32);
    s.gravity = gravity;
    s.restitution = 1.0;
    world::ObjectSpec o;
    o.radius = 0.2;
    o.position = position;
    o.velocity = velocity;
    s.objects.push_back(o);
    s.track_points = 32;
    return s;
}

// Potential measured from the floor so energies stay positive.
double floor_offset(const world::SceneSpec& spec, const std::vector<world::BodyState>& balls) {
    double off = 0.0;
    for (const auto& b : balls) off += b.mass * spec.gravity.norm() * spec.box_extent;
    return off;
}

}  // namespace

TEST_SUITE("world") {

TEST_CASE("simulate is deterministic") {
    for (int cls = 0; cls < world::kNumSceneClasses; ++cls) {
        auto spec = world::random_scene(world::SceneClass(cls), 100 + cls, 8, 32);
        auto a = world::simulate(spec);
        auto b = world::simulate(spec);
        CHECK(a.video.data == b.video.data);
        CHECK(a.truth.masks == b.truth.masks);
        CHECK(a.truth.pointmap == b.truth.pointmap);
        REQUIRE(a.truth.tracks.size() == b.truth.tracks.size());
        for (std::size_t i = 0; i < a.truth.tracks.size(); ++i) {
            CHECK(a.truth.tracks[i].positions == b.truth.tracks[i].positions);
        }
        CHECK(a.truth.physics_labels == b.truth.physics_labels);
    }
}

TEST_CASE("invalid specs are rejected") {
    auto spec = one_ball(Vec3::Zero(), Vec3::Zero(), Vec3::Zero());
    auto bad = spec;
    bad.frames = 1;
    CHECK_THROWS_AS(world::simulate(bad), Error);
    bad = spec;
    bad.objects[0].radius = 0.0;
    CHECK_THROWS_AS(world::simulate(bad), Error);
    bad = spec;
    bad.restitution = 1.5;
    CHECK_THROWS_AS(world::simulate(bad), Error);
    bad = spec;
    bad.objects.push_back(bad.objects[0]);
    CHECK_THROWS_WITH(world::simulate(bad), doctest::Contains("overlapping"));
}

TEST_CASE("static scene renders identical frames") {
    auto r = world::simulate(one_ball(Vec3(0.1, 0.2, 0.0), Vec3::Zero(), Vec3::Zero()));
    const std::size_t frame = std::size_t(r.video.height) * r.video.width;
    for (int c = 0; c < 3; ++c) {
        for (int f = 1; f < r.video.frames; ++f) {
            for (std::size_t i = 0; i < frame; ++i) {
                REQUIRE(r.video.data[(std::size_t(c) * r.video.frames + f) * frame + i] ==
                        r.video.data[std::size_t(c) * r.video.frames * frame + i]);
            }
        }
    }
    for (const auto& t : r.truth.tracks) {
        for (const auto& p : t.positions) CHECK(p == t.positions.front());
    }
    auto rec = world::score_record_from_truth(r.truth, one_ball(Vec3(0.1, 0.2, 0.0), Vec3::Zero(), Vec3::Zero()));
    for (int j = 0; j < 6; ++j) CHECK(rec.s[std::size_t(j)] == 1.0);
}

TEST_CASE("uniform motion without walls") {
    const Vec3 p0(-0.3, 0.1, 0.0), v(0.02, 0.0, 0.0);
    auto r = world::simulate(one_ball(p0, v, Vec3::Zero()));
    for (int s = 0; s < 16; ++s) {
        const Vec3 expect = p0 + s * v;
        CHECK((r.ball_states[std::size_t(s)][0].position - expect).norm() <= 1e-15);
    }
}

TEST_CASE("vertical drop follows the closed-form bounce") {
    const double g = 0.01, y0 = 0.5, radius = 0.2;
    auto spec = one_ball(Vec3(0.0, y0, 0.0), Vec3::Zero(), Vec3(0.0, -g, 0.0), 48);
    auto r = world::simulate(spec);
    const double floor = -(spec.box_extent - radius);
    const double drop = y0 - floor;
    const double t_hit = std::sqrt(2.0 * drop / g);
    int bounces = 0;
    for (int s = 0; s < spec.frames; ++s) {
        double tau = std::fmod(s + t_hit, 2.0 * t_hit) - t_hit;
        const double y = floor + drop - 0.5 * g * tau * tau;
        const double vy = -g * tau;
        const auto& b = r.ball_states[std::size_t(s)][0];
        CHECK(std::abs(b.position.y() - y) <= 1e-6);
        CHECK(std::abs(b.velocity.y() - vy) <= 1e-6);
        if (s > 0 && r.ball_states[std::size_t(s - 1)][0].velocity.y() < 0 && b.velocity.y() > 0) ++bounces;
    }
    CHECK(bounces >= 1);
    CHECK(r.truth.wall_impacts >= 1);
}

TEST_CASE("energy never increases between frames") {
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        auto spec = world::random_scene(world::SceneClass(seed % 3), seed, 32, 16);
        spec.restitution = 0.5 + 0.02 * double(seed);
        auto r = world::simulate(spec);
        const double off = floor_offset(spec, r.ball_states.front());
        for (int s = 0; s + 1 < spec.frames; ++s) {
            const double e0 = world::mechanical_energy(r.ball_states[std::size_t(s)], spec.gravity) + off;
            const double e1 = world::mechanical_energy(r.ball_states[std::size_t(s + 1)], spec.gravity) + off;
            CHECK(e1 <= e0 * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("elastic scenes conserve energy") {
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        auto spec = world::random_scene(world::SceneClass(seed % 3), 50 + seed, 32, 16);
        spec.restitution = 1.0;
        auto r = world::simulate(spec);
        const double off = floor_offset(spec, r.ball_states.front());
        const double e0 = world::mechanical_energy(r.ball_states.front(), spec.gravity) + off;
        for (const auto& state : r.ball_states) {
            const double e = world::mechanical_energy(state, spec.gravity) + off;
            CHECK(std::abs(e - e0) <= 1e-5 * e0);
        }
    }
}

TEST_CASE("objects stay inside the box") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto spec = world::random_scene(world::SceneClass(seed % 4), seed, 16, 16);
        auto r = world::simulate(spec);
        for (const auto& part : r.truth.parts) {
            for (const auto& c : part.centers) {
                const Vec3 p = spec.camera.camera_to_world(c);
                for (int k = 0; k < 3; ++k) CHECK(std::abs(p[k]) <= spec.box_extent - part.radius + 1e-9);
            }
        }
    }
}

TEST_CASE("masks, pointmap and tracks agree") {
    int checked = 0, occluded = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto spec = world::random_scene(world::SceneClass(seed % 4), 1000 + seed, 8, 32);
        spec.track_points = 24;
        auto r = world::simulate(spec);
        const auto& t = r.truth;
        for (int f = 0; f < t.frames; ++f) {
            for (int y = 0; y < t.height; ++y) {
                for (int x = 0; x < t.width; ++x) {
                    if (t.mask(f, y, x) != 0) REQUIRE(t.point(f, y, x).z() > 0.0);
                }
            }
        }
        for (const auto& track : t.tracks) {
            REQUIRE(int(track.positions.size()) == t.frames);
            for (int f = 0; f < t.frames; ++f) {
                const auto& p = track.positions[std::size_t(f)];
                const auto uv = spec.camera.project(p);
                const int u = int(std::lround(uv.x())), v = int(std::lround(uv.y()));
                bool hit = false, behind = false;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = u + dx, yy = v + dy;
                        if (xx < 0 || yy < 0 || xx >= t.width || yy >= t.height) continue;
                        hit = hit || t.mask(f, yy, xx) == track.label;
                        behind = behind || (t.mask(f, yy, xx) != 0 && t.point(f, yy, xx).z() < p.z());
                    }
                }
                ++checked;
                if (!hit) {
                    // Another object in front hides the point.
                    REQUIRE(behind);
                    ++occluded;
                }
            }
        }
    }
    CHECK(checked > 10000);
    CHECK(occluded < checked / 20);
}

TEST_CASE("physics labels follow the simulated events") {
    int with_impacts = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto two = world::random_scene(world::SceneClass::TwoBalls, seed, 48, 32);
        auto truth = world::simulate(two).truth;
        auto rec = world::score_record_from_truth(truth, two);
        if (truth.wall_impacts + truth.ball_impacts > 0) {
            ++with_impacts;
            CHECK(rec.s[curation::primitive::Collision] > rec.s[curation::primitive::LiquidMotion]);
        } else {
            CHECK(rec.s[curation::primitive::Collision] == 1.0);
        }
        CHECK(rec.reality == 5);

        auto fluid = world::random_scene(world::SceneClass::Fluid, seed, 16, 32);
        auto frec = world::score_record_from_truth(world::simulate(fluid).truth, fluid);
        int argmax = 0;
        for (int j = 1; j < curation::kNumPrimitives; ++j) {
            if (frec.s[std::size_t(j)] > frec.s[std::size_t(argmax)]) argmax = j;
        }
        CHECK(argmax == curation::primitive::LiquidMotion);
        for (double s : frec.s) {
            CHECK(s >= 1.0);
            CHECK(s <= 5.0);
        }
        CHECK(frec.vqa >= 1.0);
        CHECK(frec.vqa <= 5.0);
    }
    CHECK(with_impacts >= 5);
}

TEST_CASE("framing puts the front face at 80% of the image") {
    auto cam = world::Camera::framing(64, 64);
    const auto lo = cam.project({-1.0, -1.0, cam.distance - 1.0});
    const auto hi = cam.project({1.0, 1.0, cam.distance - 1.0});
    CHECK(hi.x() - lo.x() == doctest::Approx(0.8 * 64));
    CHECK(hi.y() - lo.y() == doctest::Approx(0.8 * 64));
}

}
