// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bct/joint.hpp"
#include "bct/train.hpp"
#include "codec/codec.hpp"
#include "curation/curation.hpp"
#include "dit/backbone.hpp"
#include "distill/distiller.hpp"
#include "percep/percep.hpp"

namespace jointvid::harness {

struct WorldConfig {
    int clips = 32;
    int frames = 16;
    int size = 64;
    int track_points = 256;
};

struct TeacherConfig {
    bct::Arch arch = bct::Arch::Parallel;
    std::vector<int> link_blocks;  // empty: every third block ending at the last
    bct::TrainHyper hyper;
    int checkpoint_every = 100;
};

struct SampleConfig {
    int steps = 50;
    double guidance = 1.0;
    int per_class = 2;
};

struct DetectorConfig {
    double color_tolerance = 0.1;  // L-infinity distance to a palette color
    int min_component = 3;         // pixels, at a 64x64 frame
    int min_area = 6;              // pixels, at a 64x64 frame
    double slack = 1.0;            // pixels outside the box outline tolerated

    int scaled(int pixels, int height, int width) const;
};

struct ExperimentConfig {
    std::string name = "run";
    uint64_t seed = 0;
    std::string output_root = "runs";
    WorldConfig world;
    codec::CodecConfig codec;
    percep::LayerConfig percep;
    dit::BackboneConfig backbone;
    TeacherConfig teacher;
    distill::Stage2Hyper distill;
    curation::CurationConfig curation;
    double val_fraction = 0.1;
    SampleConfig sample;
    DetectorConfig detector;

    /// Fills the backbone's latent shape from the world and codec settings
    /// and checks every constraint; throws Config.
    void resolve();
    std::vector<int> link_blocks() const;
    std::string run_dir() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Parses a JSON config file; unknown keys and bad values are Config errors.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Sets `dotted.key` in a JSON object; `value` is parsed as JSON when possible
/// and taken as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& key, const std::string& value);

/// Canonical JSON hash of a config with the output root left out.
std::string config_hash(const ExperimentConfig& c);

/// Environment variable that overrides the configured output root.
inline constexpr const char* kOutputRootEnv = "JOINTVID_OUTPUT_ROOT";

}  // namespace jointvid::harness
