// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dit/diffusion.hpp"
#include "harness/config.hpp"
#include "harness/dataset.hpp"
#include "harness/toypc.hpp"

namespace jointvid::harness {

inline const std::vector<std::string> kStages = {"gen-data", "encode-percep", "curate", "train-teacher",
                                                 "distill",  "sample",        "evaluate"};

/// Per-stage provenance kept in <run>/manifest.json.
class Manifest {
public:
    static Manifest load(const std::string& path);
    void save(const std::string& path) const;

    bool up_to_date(const std::string& stage, const std::string& config_hash,
                    const nlohmann::json& inputs, const nlohmann::json& outputs) const;
    void record(const std::string& stage, const std::string& config_hash, const nlohmann::json& inputs,
                const nlohmann::json& outputs, double seconds);
    const nlohmann::json& data() const { return data_; }

private:
    nlohmann::json data_ = nlohmann::json::object();
};

using Log = std::function<void(const std::string&)>;

/// Stage entry points. Each reads what earlier stages wrote under the run
/// directory and throws Stage errors when it is missing.
void gen_data(const ExperimentConfig& config, const Log& log = {});
void encode_percep(const ExperimentConfig& config, const Log& log = {});
curation::CurationResult curate_run(const ExperimentConfig& config, const Log& log = {});
/// Returns the final checkpoint path.
std::string train_teacher(const ExperimentConfig& config, const Log& log = {});
/// `teacher_ckpt` empty picks the latest ckpt-<step> of the run.
std::string distill_student(const ExperimentConfig& config, const std::string& teacher_ckpt,
                            const Log& log = {});
/// Samples `per_class` clips for every scene class from `ckpt` into
/// out_dir/<variant>/ (PNG frames plus meta.json). `unconditional` feeds
/// the null class while scoring against the round-robin class.
void sample_checkpoint(const ExperimentConfig& config, const std::string& ckpt, const std::string& variant,
                       const std::string& out_dir, bool unconditional = false);
void sample_run(const ExperimentConfig& config, const Log& log = {});
/// ToyPC over every variant below `samples_dir` plus the ground-truth
/// validation clips; writes CSV and a chart into the run's eval directory.
std::vector<std::pair<std::string, ToyPCReport>> evaluate_run(const ExperimentConfig& config,
                                                              const std::string& samples_dir = {},
                                                              const Log& log = {});

/// Standalone curation of a score file.
curation::CurationResult curate_file(const std::string& in, const std::string& out,
                                     const curation::CurationConfig& config, const std::string& report_html,
                                     const std::string& report_png);

std::string latest_checkpoint(const std::string& dir);

struct RunOptions {
    std::string skip_to;  // first stage to run; earlier ones are left untouched
    bool force = false;   // rerun stages even when the manifest says they are current
};

/// gen-data through evaluate with manifest bookkeeping. Returns the stages
/// that actually ran.
std::vector<std::string> run_pipeline(const ExperimentConfig& config, const RunOptions& options = {},
                                      const Log& log = {});

struct AblationRow {
    std::string name;
    bool ok = false;
    std::string error;
    double joint_val = std::nan("");
    double rgb_val = std::nan("");
    double percep_val = std::nan("");
    ToyPCReport toypc;
    std::vector<double> curve;
};

/// Row sets: arch {parallel, channel, spatial}; modality {seg, xyz, tracks,
/// unified}; distill {baseline, teacher, teacher-no-links, student}.
std::vector<std::string> ablation_rows(const std::string& axis);
std::vector<AblationRow> ablate(const ExperimentConfig& config, const std::string& axis, const Log& log = {});

/// Noise predictor over the channel-stacked [rgb, percep] latent of a joint model.
dit::EpsFn joint_eps(bct::JointDenoiser& model);
dit::EpsFn single_eps(dit::Backbone model);

}  // namespace jointvid::harness
