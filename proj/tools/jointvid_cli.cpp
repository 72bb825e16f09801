// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jointvid/jointvid.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

int exit_code(jv_status s) {
    if (s == JV_OK) return kExitOk;
    if (s == JV_ERR_CONFIG || s == JV_ERR_INVALID_ARGUMENT) return kExitConfig;
    return kExitStage;
}

int report(jv_status s, const std::string& verb) {
    if (s != JV_OK) std::fprintf(stderr, "jointvid %s: %s: %s\n", verb.c_str(), jv_status_string(s), jv_last_error());
    return exit_code(s);
}

void print_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::string output_root;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
    auto* opt = cmd->add_option("--config", c.config, "Experiment config (JSON)");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--set", c.overrides, "Override a config value, dotted.key=value")->take_all();
    cmd->add_option("--output-root", c.output_root, "Output root (overrides JOINTVID_OUTPUT_ROOT)");
}

jv_context* open_context(const Common& c, jv_status& status) {
    std::vector<const char*> ov;
    for (const auto& s : c.overrides) ov.push_back(s.c_str());
    jv_context* ctx = nullptr;
    status = jv_context_create(c.config.empty() ? nullptr : c.config.c_str(), ov.data(), ov.size(),
                               c.output_root.empty() ? nullptr : c.output_root.c_str(), &ctx);
    if (ctx) jv_context_set_log(ctx, print_line, nullptr);
    return ctx;
}

const char* opt_or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint RGB and perception video diffusion toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(jv_version()));

    Common common;
    std::string layers, arch, teacher, ckpt, variant, out_dir, samples, axis, skip_to;
    double lambda = -1.0;
    bool uncond = false, force = false;

    auto* gen = app.add_subcommand("gen-data", "Simulate the synthetic clip corpus");
    add_common(gen, common, true);

    auto* enc = app.add_subcommand("encode-percep", "Render pseudo-RGB perception clips");
    add_common(enc, common, true);
    enc->add_option("--layers", layers, "seg,xyz,tracks subset or unified");

    auto* cur = app.add_subcommand("curate", "Filter, label and rebalance score records");
    add_common(cur, common, false);
    std::string in_path, out_path, report_path;
    jv_curate_options copt;
    jv_curate_options_default(&copt);
    cur->add_option("--in", in_path, "Line-delimited score records")->check(CLI::ExistingFile);
    cur->add_option("--out", out_path, "Selected records output");
    cur->add_option("--tau", copt.tau, "Label threshold");
    cur->add_option("--n-out", copt.n_out, "Number of videos to draw (0 keeps the pool size)");
    cur->add_option("--seed", copt.seed, "Sampling seed");
    cur->add_option("--vqa-min", copt.vqa_min, "Minimum VQA score");
    cur->add_option("--reality-min", copt.reality_min, "Minimum reality score");
    cur->add_option("--richness-min", copt.richness_min, "Minimum aggregated richness");
    cur->add_flag("--with-replacement", copt.with_replacement, "Draw with replacement");
    cur->add_option("--report", report_path, "Report path (.html or .png)");

    auto* tt = app.add_subcommand("train-teacher", "Stage I joint training");
    add_common(tt, common, true);
    tt->add_option("--arch", arch, "parallel, channel or spatial")
        ->check(CLI::IsMember({"parallel", "channel", "spatial"}));

    auto* dis = app.add_subcommand("distill", "Stage II distillation into the RGB student");
    add_common(dis, common, true);
    dis->add_option("--teacher", teacher, "Teacher checkpoint (default: latest of the run)");
    dis->add_option("--lambda", lambda, "Distillation weight")->check(CLI::NonNegativeNumber);

    auto* smp = app.add_subcommand("sample", "Generate clips from a checkpoint");
    add_common(smp, common, true);
    smp->add_option("--ckpt", ckpt, "Checkpoint (default: the run's student)");
    smp->add_option("--variant", variant, "Output sub-directory name");
    smp->add_option("--out", out_dir, "Samples root");
    smp->add_flag("--uncond", uncond, "Sample with the null class");

    auto* ev = app.add_subcommand("evaluate", "Toy physics proxy over generated samples");
    add_common(ev, common, true);
    ev->add_option("--samples", samples, "Samples root (default: the run's samples)");

    auto* ab = app.add_subcommand("ablate", "Ablation sweep");
    add_common(ab, common, true);
    ab->add_option("--axis", axis, "arch, modality or distill")
        ->required()
        ->check(CLI::IsMember({"arch", "modality", "distill"}));

    auto* rp = app.add_subcommand("run-pipeline", "gen-data through evaluate");
    add_common(rp, common, true);
    rp->add_option("--skip-to", skip_to, "First stage to run")
        ->check(CLI::IsMember({"gen-data", "encode-percep", "curate", "train-teacher", "distill", "sample",
                               "evaluate"}));
    rp->add_flag("--force", force, "Rerun stages the manifest marks as current");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    auto* sub = app.get_subcommands().front();
    const std::string verb = sub->get_name();

    if (sub == cur && !in_path.empty()) {
        std::string html, png;
        if (!report_path.empty()) {
            const bool is_png = report_path.size() > 4 && report_path.substr(report_path.size() - 4) == ".png";
            (is_png ? png : html) = report_path;
        }
        size_t selected = 0;
        const jv_status s = jv_curate_file(in_path.c_str(), opt_or_null(out_path), &copt, opt_or_null(html),
                                           opt_or_null(png), &selected);
        if (s == JV_OK) std::printf("selected %zu records\n", selected);
        return report(s, verb);
    }
    if (sub == cur && common.config.empty()) {
        std::fprintf(stderr, "jointvid curate: either --in or --config is required\n");
        return kExitConfig;
    }

    jv_status status;
    jv_context* ctx = open_context(common, status);
    if (!ctx) return report(status, verb);

    if (sub == gen) status = jv_gen_data(ctx);
    else if (sub == enc) status = jv_encode_percep(ctx, opt_or_null(layers));
    else if (sub == cur) status = jv_curate_run(ctx);
    else if (sub == tt) status = jv_train_teacher(ctx, opt_or_null(arch));
    else if (sub == dis) status = jv_distill(ctx, opt_or_null(teacher), lambda);
    else if (sub == smp) status = jv_sample(ctx, opt_or_null(ckpt), opt_or_null(variant), opt_or_null(out_dir), uncond ? 1 : 0);
    else if (sub == ev) status = jv_evaluate(ctx, opt_or_null(samples));
    else if (sub == ab) status = jv_ablate(ctx, axis.c_str());
    else status = jv_run_pipeline(ctx, opt_or_null(skip_to), force ? 1 : 0);

    if (status == JV_OK) std::printf("%s: done (%s)\n", verb.c_str(), jv_run_dir(ctx));
    jv_context_destroy(ctx);
    return report(status, verb);
}
