// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "common/error.hpp"
#include "harness/checkpoint.hpp"
#include "harness/config.hpp"
#include "harness/dataset.hpp"
#include "harness/hashing.hpp"
#include "harness/pipeline.hpp"
#include "harness/toypc.hpp"
#include "oracles.hpp"
#include "world/scene.hpp"

using namespace jointvid;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("jointvid_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json tiny_run_json(const fs::path& root) {
    auto j = json::parse(R"({
        "name": "tiny", "seed": 3,
        "world": {"clips": 6, "frames": 4, "size": 16, "track_points": 16},
        "percep": {"layers": "unified", "n_points": 16},
        "backbone": {"depth": 2, "width": 32, "heads": 2, "patch": [1, 4, 4]},
        "teacher": {"steps": 3, "batch": 2, "checkpoint_every": 2},
        "distill": {"steps": 3, "batch": 2},
        "curation": {"richness_min": 1.1},
        "sample": {"steps": 2, "per_class": 1}
    })");
    j["output_root"] = root.string();
    return j;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config defaults resolve") {
    auto c = harness::config_from_json(json::object());
    CHECK(c.backbone.latent_channels == 24);
    CHECK(c.backbone.latent_grid == std::array<int64_t, 3>{8, 32, 32});
    CHECK(c.link_blocks() == bct::default_link_blocks(c.backbone.depth));
}

TEST_CASE("config rejects unknown keys and bad values") {
    CHECK_THROWS_WITH(harness::config_from_json(json{{"colour", 1}}), doctest::Contains("unknown config key"));
    CHECK_THROWS_WITH(harness::config_from_json(json{{"teacher", {{"stepz", 1}}}}),
                      doctest::Contains("teacher.stepz"));
    CHECK_THROWS_AS(harness::config_from_json(json{{"world", {{"frames", 5}}}}), Error);
    CHECK_THROWS_AS(harness::config_from_json(json{{"teacher", {{"arch", "diagonal"}}}}), Error);
    CHECK_THROWS_AS(harness::config_from_json(json{{"world", {{"clips", "many"}}}}), Error);
    CHECK_THROWS_AS(harness::load_config("/nonexistent/config.json"), Error);
    try {
        harness::config_from_json(json{{"colour", 1}});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
    }
}

TEST_CASE("overrides") {
    json j = json::object();
    harness::apply_override(j, "teacher.steps", "7");
    harness::apply_override(j, "name", "abc");
    harness::apply_override(j, "curation.with_replacement", "true");
    auto c = harness::config_from_json(j);
    CHECK(c.teacher.hyper.steps == 7);
    CHECK(c.name == "abc");
    CHECK(c.curation.with_replacement);
    json k = {{"seed", 1}};
    CHECK_THROWS_AS(harness::apply_override(k, "seed.deep", "1"), Error);
}

TEST_CASE("config hash ignores the output root only") {
    auto a = harness::config_from_json(json::object());
    auto b = harness::config_from_json(json{{"output_root", "/elsewhere"}});
    auto c = harness::config_from_json(json{{"seed", 9}});
    CHECK(harness::config_hash(a) == harness::config_hash(b));
    CHECK(harness::config_hash(a) != harness::config_hash(c));
    auto again = harness::config_from_json(json(a));
    CHECK(harness::config_hash(again) == harness::config_hash(a));
}

TEST_CASE("sha256 known vectors") {
    CHECK(harness::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(harness::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    auto dir = scratch("hash");
    CHECK(harness::sha256_tree((dir / "missing").string()).empty());
    std::ofstream(dir / "a.txt") << "abc";
    CHECK(harness::sha256_file((dir / "a.txt").string()) == harness::sha256_hex("abc"));
    const auto before = harness::sha256_tree(dir.string());
    std::ofstream(dir / "b.txt") << "x";
    CHECK(harness::sha256_tree(dir.string()) != before);
    const double f = harness::stable_fraction("clip_0001");
    CHECK(f >= 0.0);
    CHECK(f < 1.0);
    CHECK(f == harness::stable_fraction("clip_0001"));
    fs::remove_all(dir);
}

TEST_CASE("run-length masks roundtrip") {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int32_t> v(std::size_t(rng() % 300));
        for (auto& x : v) x = int32_t(rng() % 3 == 0 ? rng() % 4 : 0);
        CHECK(harness::rle_decode(harness::rle_encode(v)) == v);
    }
    CHECK(harness::rle_encode({0, 0, 2}) == std::vector<int>{0, 2, 2, 1});
}

TEST_CASE("train and validation split") {
    std::vector<std::string> ids;
    for (int i = 0; i < 200; ++i) ids.push_back("clip_" + std::to_string(i));
    auto s = harness::split_ids(ids, 0.1);
    CHECK(s.train.size() + s.val.size() == ids.size());
    CHECK(s.val.size() >= 5);
    CHECK(s.val.size() <= 40);
    auto small = harness::split_ids({"a", "b"}, 1e-9);
    CHECK(small.val.size() == 1);
    CHECK(harness::split_ids(ids, 0.0).val.empty());
    CHECK(harness::split_ids(ids, 0.1).val == s.val);
}

TEST_CASE("checkpoints roundtrip") {
    auto dir = scratch("ckpt");
    torch::manual_seed(5);
    dit::Backbone base(test::tiny_backbone());
    test::perturb_zero_init(*base, 1);
    bct::ParallelTeacher teacher(base, {1, 2});
    test::perturb_zero_init(teacher, 2);
    const auto joint_path = (dir / "joint.bin").string();
    harness::save_joint(joint_path, teacher, 12, 0.7);
    auto loaded = harness::load_model(joint_path);
    CHECK(loaded.kind == "joint");
    CHECK(loaded.data_std == 0.7);
    CHECK(loaded.header.at("step") == 12);
    auto a = teacher.named_parameters();
    auto b = loaded.joint->named_parameters();
    REQUIRE(a.size() == b.size());
    for (const auto& p : a) CHECK(torch::equal(p.value(), b[p.key()]));

    const auto single_path = (dir / "single.bin").string();
    harness::save_single(single_path, base, "student", 3, 1.0);
    auto s = harness::load_model(single_path);
    CHECK(s.kind == "single");
    CHECK(dit::parameter_count(*s.single) == dit::parameter_count(*base));
    auto z = torch::randn({1, 12, 2, 4, 4});
    auto y = torch::tensor({1}, torch::kLong);
    auto t = torch::tensor({0.5f});
    CHECK(torch::equal(s.single->forward(z, y, t).eps, base->forward(z, y, t).eps));

    std::ofstream(dir / "junk.bin") << "not a checkpoint";
    CHECK_THROWS_AS(harness::load_model((dir / "junk.bin").string()), Error);
    CHECK_THROWS_AS(harness::load_model((dir / "none.bin").string()), Error);
    fs::remove_all(dir);
}

TEST_CASE("toy physics metrics on simulated clips") {
    harness::DetectorConfig det;
    std::vector<harness::EvalClip> clips;
    for (int i = 0; i < 8; ++i) {
        const auto cls = world::SceneClass(i % world::kNumSceneClasses);
        auto spec = world::random_scene(cls, 100 + uint64_t(i), 16, 64);
        auto sim = world::simulate(spec);
        harness::EvalClip c;
        c.id = "c" + std::to_string(i);
        c.video = sim.video;
        c.expected_count = world::expected_object_count(cls);
        c.camera = spec.camera;
        c.box_extent = spec.box_extent;
        clips.push_back(std::move(c));
    }
    auto report = harness::evaluate_toy_pc(clips, det);
    CHECK(report.clips.size() == clips.size());
    CHECK(report.wall_penetration <= 0.01);
    CHECK(report.count_stability >= 0.99);
    CHECK(std::isfinite(report.smoothness));

    std::vector<harness::EvalClip> noise = clips;
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (auto& c : noise) {
        for (float& v : c.video.data) v = u(rng);
    }
    auto bad = harness::evaluate_toy_pc(noise, det);
    CHECK(bad.count_stability < 0.5);
}

TEST_CASE("ablation row sets") {
    CHECK(harness::ablation_rows("arch") == std::vector<std::string>{"parallel", "channel", "spatial"});
    CHECK(harness::ablation_rows("modality") == std::vector<std::string>{"seg", "xyz", "tracks", "unified"});
    CHECK(harness::ablation_rows("distill") ==
          std::vector<std::string>{"baseline", "teacher", "teacher-no-links", "student"});
    CHECK_THROWS_AS(harness::ablation_rows("colour"), Error);
}

TEST_CASE("tiny pipeline with manifest skipping") {
    auto root = scratch("pipeline");
    auto cfg = harness::config_from_json(tiny_run_json(root));
    auto ran = harness::run_pipeline(cfg);
    CHECK(ran == harness::kStages);
    const harness::RunPaths paths{cfg.run_dir()};
    CHECK(fs::exists(paths.manifest()));
    CHECK(fs::exists(paths.student()));
    const auto clips_hash = harness::sha256_tree(paths.clips());

    CHECK(harness::run_pipeline(cfg).empty());
    harness::RunOptions forced;
    forced.force = true;
    forced.skip_to = "sample";
    CHECK(harness::run_pipeline(cfg, forced) == std::vector<std::string>{"sample", "evaluate"});

    // A second run directory with the same config reproduces the data.
    auto root2 = scratch("pipeline2");
    auto cfg2 = harness::config_from_json(tiny_run_json(root2));
    harness::gen_data(cfg2);
    CHECK(harness::sha256_tree(harness::RunPaths{cfg2.run_dir()}.clips()) == clips_hash);

    // Sample range audit.
    auto audit = cfg;
    audit.sample.per_class = 25;
    const auto out = (root / "audit").string();
    harness::sample_checkpoint(audit, paths.student() + "/ckpt-final", "student", out);
    int count = 0;
    for (const auto& entry : fs::directory_iterator(fs::path(out) / "student")) {
        if (!entry.is_directory()) continue;
        auto v = harness::load_video(entry.path().string());
        CHECK(*std::min_element(v.data.begin(), v.data.end()) >= 0.0f);
        CHECK(*std::max_element(v.data.begin(), v.data.end()) <= 1.0f);
        ++count;
    }
    CHECK(count == 100);

    harness::RunOptions bad;
    bad.skip_to = "colour";
    CHECK_THROWS_AS(harness::run_pipeline(cfg, bad), Error);
    fs::remove_all(root);
    fs::remove_all(root2);
}

TEST_CASE("stages report missing inputs") {
    auto root = scratch("missing");
    auto cfg = harness::config_from_json(tiny_run_json(root));
    try {
        harness::train_teacher(cfg);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Stage);
    }
    CHECK_THROWS_AS(harness::distill_student(cfg, (root / "none.bin").string()), Error);
    fs::remove_all(root);
}

}
