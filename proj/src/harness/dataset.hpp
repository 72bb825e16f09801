// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bct/train.hpp"
#include "common/video.hpp"
#include "harness/config.hpp"
#include "world/scene.hpp"

namespace jointvid::world {
void to_json(nlohmann::json& j, const SceneSpec& s);
void from_json(const nlohmann::json& j, SceneSpec& s);
void to_json(nlohmann::json& j, const Camera& c);
void from_json(const nlohmann::json& j, Camera& c);
}  // namespace jointvid::world

namespace jointvid::harness {

/// 8-bit PNG frames frame_000.png, frame_001.png, ... in `dir`.
void save_video(const std::string& dir, const Video& video);
Video load_video(const std::string& dir);

/// Run-directory layout.
struct RunPaths {
    std::string root;
    std::string clips() const { return root + "/data/clips"; }
    std::string scores() const { return root + "/data/scores.ndjson"; }
    std::string percep(const std::string& layers) const;
    std::string curated() const { return root + "/curated"; }
    std::string teacher() const { return root; }
    std::string student() const { return root + "/student"; }
    std::string samples() const { return root + "/samples"; }
    std::string eval() const { return root + "/eval"; }
    std::string ablate(const std::string& axis) const { return root + "/ablate/" + axis; }
    std::string manifest() const { return root + "/manifest.json"; }
};

/// Mask run-length encoding: alternating (value, count) pairs, row-major.
std::vector<int> rle_encode(const std::vector<int32_t>& values);
std::vector<int32_t> rle_decode(const std::vector<int>& runs);

nlohmann::json truth_to_json(const world::SceneTruth& truth);

/// Simulates `clips` scenes (class i mod 4) and writes scene.json, truth.json,
/// score.json and rgb/ per clip plus the pooled score file. Returns clip ids.
std::vector<std::string> generate_dataset(const ExperimentConfig& config, const RunPaths& paths);

std::vector<std::string> list_clips(const RunPaths& paths);
world::SceneSpec load_scene(const RunPaths& paths, const std::string& id);

/// Re-simulates each clip from its scene file and renders its perception
/// video with `layers` under paths.percep(layers.layers()).
void encode_percep_dataset(const ExperimentConfig& config, const RunPaths& paths,
                           const percep::LayerConfig& layers);

/// Train / validation ids: a video goes to validation when its stable hash
/// fraction is below `val_fraction`; at least one validation clip is kept
/// when the list has two or more.
struct Split {
    std::vector<std::string> train;
    std::vector<std::string> val;
};
Split split_ids(const std::vector<std::string>& ids, double val_fraction);

/// Codec latents of the RGB and perception clips plus scene-class labels.
/// `layers` empty leaves the perception field undefined.
bct::PairedLatents load_latents(const ExperimentConfig& config, const RunPaths& paths,
                                const std::vector<std::string>& ids, const std::string& layers);

/// Standard deviation over every latent element, used to start the sampler.
double latent_std(const bct::PairedLatents& data);

}  // namespace jointvid::harness
