// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include <json.hpp>
#include <torch/torch.h>

#include "bct/joint.hpp"
#include "dit/backbone.hpp"

namespace jointvid::harness {

/// Binary checkpoint: magic "JVCK", u32 version, u64 header length, a JSON
/// header listing each tensor (name, dtype, shape), then raw little-endian
/// tensor bytes in header order. Writes go to a temporary file that is
/// renamed into place.
void save_module(const std::string& path, const torch::nn::Module& module, nlohmann::json header);
/// Loads tensors into the same-named parameters and buffers of `module`
/// and returns the header. Shape or name mismatches are Io errors.
nlohmann::json load_module(const std::string& path, torch::nn::Module& module);
nlohmann::json read_header(const std::string& path);

/// Writes `contents` to `path` through a temporary sibling and a rename.
void write_atomic(const std::string& path, const std::string& contents);

/// What a checkpoint holds: a joint teacher (any arch) or a single-stream
/// backbone (student or RGB baseline).
struct LoadedModel {
    std::string kind;  // "joint" or "single"
    std::shared_ptr<bct::JointDenoiser> joint;
    dit::Backbone single{nullptr};
    nlohmann::json header;
    double data_std = 1.0;
};

void save_joint(const std::string& path, bct::JointDenoiser& model, int step, double data_std);
void save_single(const std::string& path, dit::Backbone& model, const std::string& role, int step,
                 double data_std);
LoadedModel load_model(const std::string& path);

}  // namespace jointvid::harness
