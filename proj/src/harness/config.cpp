// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "harness/hashing.hpp"

namespace jointvid::harness {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(ErrorKind::Config, section + ": expected an object");
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& item : j.items()) {
        if (!keys.count(item.key())) {
            fail(ErrorKind::Config, "unknown config key '" + (section.empty() ? "" : section + ".") + item.key() + "'");
        }
    }
}

json section(const json& j, const char* key) { return j.contains(key) ? j.at(key) : json::object(); }

void bad(const std::string& what) { fail(ErrorKind::Config, what); }

}  // namespace

int DetectorConfig::scaled(int pixels, int height, int width) const {
    const double s = double(height) * width / (64.0 * 64.0);
    return std::max(1, int(std::lround(pixels * s)));
}

std::vector<int> ExperimentConfig::link_blocks() const {
    return teacher.link_blocks.empty() ? bct::default_link_blocks(backbone.depth) : teacher.link_blocks;
}

std::string ExperimentConfig::run_dir() const {
    return (std::filesystem::path(output_root) / name).string();
}

void ExperimentConfig::resolve() {
    if (name.empty() || name.find('/') != std::string::npos) bad("name must be a plain non-empty string");
    if (world.clips < 1) bad("world.clips must be at least 1");
    if (world.frames < 2) bad("world.frames must be at least 2");
    if (world.size < 8) bad("world.size must be at least 8");
    if (world.track_points < 1) bad("world.track_points must be at least 1");
    if (codec.temporal_factor < 1 || codec.spatial_factor < 1) bad("codec factors must be positive");
    if (world.frames % codec.temporal_factor != 0) bad("codec: frames not divisible by temporal_factor");
    if (world.size % codec.spatial_factor != 0) bad("codec: size not divisible by spatial_factor");
    if (!(codec.scale > 0.0)) bad("codec.scale must be positive");
    if (!percep.pointmap && !percep.segmentation && !percep.tracks) bad("percep.layers selects nothing");
    if (percep.n_points < 1) bad("percep.n_points must be at least 1");
    percep.seed = seed;

    backbone.latent_channels = codec.latent_channels();
    backbone.latent_grid = {world.frames / codec.temporal_factor, world.size / codec.spatial_factor,
                            world.size / codec.spatial_factor};
    backbone.num_classes = world::kNumSceneClasses;
    backbone.validate();
    for (int b : teacher.link_blocks) {
        if (b < 1 || b > backbone.depth) bad("teacher.link_blocks entry out of range");
    }
    auto check_hyper = [](int steps, int batch, double lr, const char* what) {
        if (steps < 0 || batch < 1 || !(lr > 0.0)) bad(std::string(what) + ": steps, batch and lr must be valid");
    };
    check_hyper(teacher.hyper.steps, teacher.hyper.batch, teacher.hyper.lr, "teacher");
    check_hyper(distill.steps, distill.batch, distill.lr, "distill");
    if (teacher.checkpoint_every < 1) bad("teacher.checkpoint_every must be positive");
    if (distill.lambda < 0.0) bad("distill.lambda must be non-negative");
    if (!(curation.tau > 1.0 && curation.tau <= 5.0)) bad("curation.tau must lie in (1, 5]");
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) bad("val_fraction must lie in [0, 1)");
    if (sample.steps < 1 || sample.per_class < 1) bad("sample.steps and sample.per_class must be positive");
    if (!(detector.color_tolerance > 0.0)) bad("detector.color_tolerance must be positive");
    teacher.hyper.seed = seed;
    distill.seed = seed + 1;
    curation.seed = seed;
}

void to_json(json& j, const ExperimentConfig& c) {
    json bb = c.backbone;
    j = json{
        {"name", c.name},
        {"seed", c.seed},
        {"output_root", c.output_root},
        {"world", {{"clips", c.world.clips}, {"frames", c.world.frames}, {"size", c.world.size},
                   {"track_points", c.world.track_points}}},
        {"codec", {{"temporal_factor", c.codec.temporal_factor}, {"spatial_factor", c.codec.spatial_factor},
                   {"shift", c.codec.shift}, {"scale", c.codec.scale}}},
        {"percep", {{"layers", c.percep.layers()}, {"n_points", c.percep.n_points},
                    {"point_radius", c.percep.point_radius}, {"seg_alpha", c.percep.seg_alpha}}},
        {"backbone", {{"depth", bb["depth"]}, {"width", bb["width"]}, {"heads", bb["heads"]},
                      {"patch", bb["patch"]}, {"rope", bb["rope"]}, {"mlp_ratio", bb["mlp_ratio"]}}},
        {"teacher", {{"arch", bct::to_string(c.teacher.arch)}, {"link_blocks", c.teacher.link_blocks},
                     {"steps", c.teacher.hyper.steps}, {"batch", c.teacher.hyper.batch},
                     {"lr", c.teacher.hyper.lr}, {"weight_decay", c.teacher.hyper.weight_decay},
                     {"cond_dropout", c.teacher.hyper.cond_dropout},
                     {"checkpoint_every", c.teacher.checkpoint_every}}},
        {"distill", {{"lambda", c.distill.lambda}, {"steps", c.distill.steps}, {"batch", c.distill.batch},
                     {"lr", c.distill.lr}, {"projector_lr", c.distill.projector_lr},
                     {"weight_decay", c.distill.weight_decay}, {"cond_dropout", c.distill.cond_dropout}}},
        {"curation", {{"vqa_min", c.curation.vqa_min}, {"reality_min", c.curation.reality_min},
                      {"richness_min", c.curation.richness_min}, {"tau", c.curation.tau},
                      {"n_out", c.curation.n_out}, {"with_replacement", c.curation.with_replacement},
                      {"val_fraction", c.val_fraction}}},
        {"sample", {{"steps", c.sample.steps}, {"guidance", c.sample.guidance}, {"per_class", c.sample.per_class}}},
        {"detector", {{"color_tolerance", c.detector.color_tolerance}, {"min_component", c.detector.min_component},
                      {"min_area", c.detector.min_area}, {"slack", c.detector.slack}}},
    };
}

void from_json(const json& j, ExperimentConfig& c) {
    check_keys(j, "", {"name", "seed", "output_root", "world", "codec", "percep", "backbone", "teacher",
                       "distill", "curation", "sample", "detector"});
    ExperimentConfig d;
    c.name = j.value("name", d.name);
    c.seed = j.value("seed", d.seed);
    c.output_root = j.value("output_root", d.output_root);

    auto w = section(j, "world");
    check_keys(w, "world", {"clips", "frames", "size", "track_points"});
    c.world.clips = w.value("clips", d.world.clips);
    c.world.frames = w.value("frames", d.world.frames);
    c.world.size = w.value("size", d.world.size);
    c.world.track_points = w.value("track_points", d.world.track_points);

    auto k = section(j, "codec");
    check_keys(k, "codec", {"temporal_factor", "spatial_factor", "shift", "scale"});
    c.codec.temporal_factor = k.value("temporal_factor", d.codec.temporal_factor);
    c.codec.spatial_factor = k.value("spatial_factor", d.codec.spatial_factor);
    c.codec.shift = k.value("shift", d.codec.shift);
    c.codec.scale = k.value("scale", d.codec.scale);

    auto p = section(j, "percep");
    check_keys(p, "percep", {"layers", "n_points", "point_radius", "seg_alpha"});
    c.percep = percep::LayerConfig::from_layers(p.value("layers", std::string("unified")));
    c.percep.n_points = p.value("n_points", d.percep.n_points);
    c.percep.point_radius = p.value("point_radius", d.percep.point_radius);
    c.percep.seg_alpha = p.value("seg_alpha", d.percep.seg_alpha);

    auto b = section(j, "backbone");
    check_keys(b, "backbone", {"depth", "width", "heads", "patch", "rope", "mlp_ratio"});
    c.backbone = b.get<dit::BackboneConfig>();

    auto t = section(j, "teacher");
    check_keys(t, "teacher", {"arch", "link_blocks", "steps", "batch", "lr", "weight_decay", "cond_dropout",
                              "checkpoint_every"});
    c.teacher.arch = bct::arch_from_string(t.value("arch", std::string("parallel")));
    c.teacher.link_blocks = t.value("link_blocks", std::vector<int>{});
    c.teacher.hyper.steps = t.value("steps", d.teacher.hyper.steps);
    c.teacher.hyper.batch = t.value("batch", d.teacher.hyper.batch);
    c.teacher.hyper.lr = t.value("lr", d.teacher.hyper.lr);
    c.teacher.hyper.weight_decay = t.value("weight_decay", d.teacher.hyper.weight_decay);
    c.teacher.hyper.cond_dropout = t.value("cond_dropout", d.teacher.hyper.cond_dropout);
    c.teacher.checkpoint_every = t.value("checkpoint_every", d.teacher.checkpoint_every);

    auto s = section(j, "distill");
    check_keys(s, "distill", {"lambda", "steps", "batch", "lr", "projector_lr", "weight_decay", "cond_dropout"});
    c.distill.lambda = s.value("lambda", d.distill.lambda);
    c.distill.steps = s.value("steps", d.distill.steps);
    c.distill.batch = s.value("batch", d.distill.batch);
    c.distill.lr = s.value("lr", d.distill.lr);
    c.distill.projector_lr = s.value("projector_lr", d.distill.projector_lr);
    c.distill.weight_decay = s.value("weight_decay", d.distill.weight_decay);
    c.distill.cond_dropout = s.value("cond_dropout", d.distill.cond_dropout);

    auto u = section(j, "curation");
    check_keys(u, "curation", {"vqa_min", "reality_min", "richness_min", "tau", "n_out", "with_replacement",
                               "val_fraction"});
    c.curation.vqa_min = u.value("vqa_min", d.curation.vqa_min);
    c.curation.reality_min = u.value("reality_min", d.curation.reality_min);
    c.curation.richness_min = u.value("richness_min", d.curation.richness_min);
    c.curation.tau = u.value("tau", d.curation.tau);
    c.curation.n_out = u.value("n_out", d.curation.n_out);
    c.curation.with_replacement = u.value("with_replacement", d.curation.with_replacement);
    c.val_fraction = u.value("val_fraction", d.val_fraction);

    auto m = section(j, "sample");
    check_keys(m, "sample", {"steps", "guidance", "per_class"});
    c.sample.steps = m.value("steps", d.sample.steps);
    c.sample.guidance = m.value("guidance", d.sample.guidance);
    c.sample.per_class = m.value("per_class", d.sample.per_class);

    auto e = section(j, "detector");
    check_keys(e, "detector", {"color_tolerance", "min_component", "min_area", "slack"});
    c.detector.color_tolerance = e.value("color_tolerance", d.detector.color_tolerance);
    c.detector.min_component = e.value("min_component", d.detector.min_component);
    c.detector.min_area = e.value("min_area", d.detector.min_area);
    c.detector.slack = e.value("slack", d.detector.slack);
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        c = j.get<ExperimentConfig>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, std::string("config: ") + e.what());
    }
    c.resolve();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Config, "cannot open config " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, path + ": " + e.what());
    }
    return config_from_json(j);
}

void apply_override(json& j, const std::string& key, const std::string& value) {
    if (key.empty()) fail(ErrorKind::Config, "empty override key");
    json* node = &j;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
        node = &(*node)[parts[i]];
        if (!node->is_object()) fail(ErrorKind::Config, "override path '" + key + "' crosses a value");
    }
    json parsed = json::parse(value, nullptr, false);
    (*node)[parts.back()] = parsed.is_discarded() ? json(value) : parsed;
}

std::string config_hash(const ExperimentConfig& c) {
    json j = c;
    j.erase("output_root");
    return sha256_hex(j.dump());
}

}  // namespace jointvid::harness
