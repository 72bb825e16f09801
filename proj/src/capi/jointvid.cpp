// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "jointvid/jointvid.h"

#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>

#include <json.hpp>

#include "common/error.hpp"
#include "harness/pipeline.hpp"

struct jv_context {
    jointvid::harness::ExperimentConfig config;
    std::string run_dir;
    std::string config_json;
    jv_log_fn log_fn = nullptr;
    void* log_user = nullptr;

    jointvid::harness::Log log() const {
        if (!log_fn) return {};
        return [fn = log_fn, user = log_user](const std::string& line) { fn(line.c_str(), user); };
    }
};

namespace {

thread_local std::string g_last_error;

jv_status status_of(jointvid::ErrorKind kind) {
    switch (kind) {
        case jointvid::ErrorKind::InvalidArgument: return JV_ERR_INVALID_ARGUMENT;
        case jointvid::ErrorKind::Config: return JV_ERR_CONFIG;
        case jointvid::ErrorKind::Io: return JV_ERR_IO;
        case jointvid::ErrorKind::Stage: return JV_ERR_STAGE;
        case jointvid::ErrorKind::Numeric: return JV_ERR_NUMERIC;
    }
    return JV_ERR_INTERNAL;
}

template <typename F>
jv_status guarded(F&& body) {
    g_last_error.clear();
    try {
        body();
        return JV_OK;
    } catch (const jointvid::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return JV_ERR_CONFIG;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return JV_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return JV_ERR_INTERNAL;
    }
}

jv_status null_arg(const char* what) {
    g_last_error = std::string(what) + " must not be NULL";
    return JV_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* jv_version(void) { return "0.1.0"; }

const char* jv_status_string(jv_status status) {
    switch (status) {
        case JV_OK: return "ok";
        case JV_ERR_INVALID_ARGUMENT: return "invalid argument";
        case JV_ERR_CONFIG: return "configuration error";
        case JV_ERR_IO: return "i/o error";
        case JV_ERR_STAGE: return "stage failure";
        case JV_ERR_NUMERIC: return "numeric failure";
        case JV_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* jv_last_error(void) { return g_last_error.c_str(); }

jv_status jv_context_create(const char* config_path, const char* const* overrides, size_t override_count,
                            const char* output_root, jv_context** out) {
    if (!out) return null_arg("out");
    *out = nullptr;
    if (override_count > 0 && !overrides) return null_arg("overrides");
    return guarded([&] {
        using namespace jointvid;
        nlohmann::json j = nlohmann::json::object();
        if (config_path) {
            j = nlohmann::json(harness::load_config(config_path));
        }
        for (size_t i = 0; i < override_count; ++i) {
            const std::string kv = overrides[i] ? overrides[i] : "";
            const auto eq = kv.find('=');
            if (eq == std::string::npos) fail(ErrorKind::Config, "override '" + kv + "' is not key=value");
            harness::apply_override(j, kv.substr(0, eq), kv.substr(eq + 1));
        }
        auto ctx = std::make_unique<jv_context>();
        ctx->config = harness::config_from_json(j);
        if (output_root) {
            ctx->config.output_root = output_root;
        } else if (const char* env = std::getenv(harness::kOutputRootEnv); env && *env) {
            ctx->config.output_root = env;
        }
        ctx->run_dir = ctx->config.run_dir();
        *out = ctx.release();
    });
}

void jv_context_destroy(jv_context* ctx) { delete ctx; }

void jv_context_set_log(jv_context* ctx, jv_log_fn fn, void* user) {
    if (!ctx) return;
    ctx->log_fn = fn;
    ctx->log_user = user;
}

const char* jv_run_dir(const jv_context* ctx) { return ctx ? ctx->run_dir.c_str() : ""; }

const char* jv_config_json(jv_context* ctx) {
    if (!ctx) return "";
    ctx->config_json = nlohmann::json(ctx->config).dump(2);
    return ctx->config_json.c_str();
}

jv_status jv_gen_data(jv_context* ctx) {
    if (!ctx) return null_arg("ctx");
    return guarded([&] { jointvid::harness::gen_data(ctx->config, ctx->log()); });
}

jv_status jv_encode_percep(jv_context* ctx, const char* layers) {
    if (!ctx) return null_arg("ctx");
    return guarded([&] {
        auto cfg = ctx->config;
        if (layers) {
            auto sel = jointvid::percep::LayerConfig::from_layers(layers);
            cfg.percep.pointmap = sel.pointmap;
            cfg.percep.segmentation = sel.segmentation;
            cfg.percep.tracks = sel.tracks;
            cfg.resolve();
        }
        jointvid::harness::encode_percep(cfg, ctx->log());
    });
}

jv_status jv_curate_run(jv_context* ctx) {
    if (!ctx) return null_arg("ctx");
    return guarded([&] { jointvid::harness::curate_run(ctx->config, ctx->log()); });
}

jv_status jv_train_teacher(jv_context* ctx, const char* arch) {
    if (!ctx) return null_arg("ctx");
    return guarded([&] {
        auto cfg = ctx->config;
        if (arch) cfg.teacher.arch = jointvid::bct::arch_from_string(arch);
        jointvid::harness::train_teacher(cfg, ctx->log());
    });
}

jv_status jv_distill(jv_context* ctx, const char* teacher_ckpt, double lambda) {
    if (!ctx) return null_arg("ctx");
    return guarded([&] {
        auto cfg = ctx->config;
        if (lambda >= 0.0) cfg.distill.lambda = lambda;
        jointvid::harness::distill_student(cfg, teacher_ckpt ? teacher_ckpt : "", ctx->log());
    });
}

jv_status jv_sample(jv_context* ctx, const char* ckpt, const char* variant, const char* out_dir, int unconditional) {
    if (!ctx) return null_arg("ctx");
    return guarded([&] {
        const jointvid::harness::RunPaths paths{ctx->run_dir};
        if (!ckpt && !variant && !out_dir) {
            jointvid::harness::sample_run(ctx->config, ctx->log());
            return;
        }
        jointvid::harness::sample_checkpoint(ctx->config, ckpt ? ckpt : paths.student() + "/ckpt-final",
                                             variant ? variant : "samples", out_dir ? out_dir : paths.samples(),
                                             unconditional != 0);
    });
}

jv_status jv_evaluate(jv_context* ctx, const char* samples_dir) {
    if (!ctx) return null_arg("ctx");
    return guarded([&] { jointvid::harness::evaluate_run(ctx->config, samples_dir ? samples_dir : "", ctx->log()); });
}

jv_status jv_ablate(jv_context* ctx, const char* axis) {
    if (!ctx) return null_arg("ctx");
    if (!axis) return null_arg("axis");
    return guarded([&] { jointvid::harness::ablate(ctx->config, axis, ctx->log()); });
}

jv_status jv_run_pipeline(jv_context* ctx, const char* skip_to, int force) {
    if (!ctx) return null_arg("ctx");
    return guarded([&] {
        jointvid::harness::RunOptions opt;
        opt.skip_to = skip_to ? skip_to : "";
        opt.force = force != 0;
        jointvid::harness::run_pipeline(ctx->config, opt, ctx->log());
    });
}

void jv_curate_options_default(jv_curate_options* options) {
    if (!options) return;
    const jointvid::curation::CurationConfig d;
    options->vqa_min = d.vqa_min;
    options->reality_min = d.reality_min;
    options->richness_min = d.richness_min;
    options->tau = d.tau;
    options->n_out = d.n_out;
    options->seed = d.seed;
    options->with_replacement = d.with_replacement ? 1 : 0;
}

jv_status jv_curate_file(const char* in_path, const char* out_path, const jv_curate_options* options,
                         const char* report_html, const char* report_png, size_t* selected) {
    if (!in_path) return null_arg("in_path");
    return guarded([&] {
        jointvid::curation::CurationConfig cfg;
        if (options) {
            cfg.vqa_min = options->vqa_min;
            cfg.reality_min = options->reality_min;
            cfg.richness_min = options->richness_min;
            cfg.tau = options->tau;
            cfg.n_out = options->n_out;
            cfg.seed = options->seed;
            cfg.with_replacement = options->with_replacement != 0;
        }
        auto result = jointvid::harness::curate_file(in_path, out_path ? out_path : "", cfg,
                                                     report_html ? report_html : "", report_png ? report_png : "");
        if (selected) *selected = result.selected.size();
    });
}

}  // extern "C"
