/* Copyright (C) 2026 The jointvid Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef JOINTVID_JOINTVID_H
#define JOINTVID_JOINTVID_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define JV_API __declspec(dllexport)
#else
#define JV_API __attribute__((visibility("default")))
#endif

typedef enum jv_status {
    JV_OK = 0,
    JV_ERR_INVALID_ARGUMENT = 1,
    JV_ERR_CONFIG = 2,
    JV_ERR_IO = 3,
    JV_ERR_STAGE = 4,
    JV_ERR_NUMERIC = 5,
    JV_ERR_INTERNAL = 6
} jv_status;

/* Experiment context: a resolved configuration plus the run directory. */
typedef struct jv_context jv_context;

/* Message callback for stage progress lines. */
typedef void (*jv_log_fn)(const char* line, void* user);

JV_API const char* jv_version(void);
JV_API const char* jv_status_string(jv_status status);

/* Message of the last failure on this thread, empty when none. */
JV_API const char* jv_last_error(void);

/* Loads `config_path` (NULL for built-in defaults), applies `overrides`
 * ("dotted.key=value" strings, may be NULL when count is 0), then the output
 * root: `output_root` when non-NULL, else JOINTVID_OUTPUT_ROOT when set. */
JV_API jv_status jv_context_create(const char* config_path, const char* const* overrides, size_t override_count,
                                   const char* output_root, jv_context** out);
JV_API void jv_context_destroy(jv_context* ctx);
JV_API void jv_context_set_log(jv_context* ctx, jv_log_fn fn, void* user);

/* Run directory; valid while the context lives. */
JV_API const char* jv_run_dir(const jv_context* ctx);
/* Resolved configuration as JSON; valid until the next call on ctx. */
JV_API const char* jv_config_json(jv_context* ctx);

JV_API jv_status jv_gen_data(jv_context* ctx);
/* `layers` NULL uses the configured selection ("seg,xyz,tracks" or "unified"). */
JV_API jv_status jv_encode_percep(jv_context* ctx, const char* layers);
JV_API jv_status jv_curate_run(jv_context* ctx);
/* `arch` NULL uses the configured architecture. */
JV_API jv_status jv_train_teacher(jv_context* ctx, const char* arch);
/* `teacher_ckpt` NULL picks the run's latest checkpoint; a negative lambda
 * keeps the configured value. */
JV_API jv_status jv_distill(jv_context* ctx, const char* teacher_ckpt, double lambda);
/* `ckpt` NULL samples the run's student; `out_dir` NULL writes to the run's
 * samples directory. */
JV_API jv_status jv_sample(jv_context* ctx, const char* ckpt, const char* variant, const char* out_dir,
                           int unconditional);
/* `samples_dir` NULL evaluates the run's samples directory. */
JV_API jv_status jv_evaluate(jv_context* ctx, const char* samples_dir);
/* axis: "arch", "modality" or "distill". */
JV_API jv_status jv_ablate(jv_context* ctx, const char* axis);
/* `skip_to` NULL starts at the first stage; `force` reruns current stages. */
JV_API jv_status jv_run_pipeline(jv_context* ctx, const char* skip_to, int force);

/* Curation of a line-delimited score file without an experiment context.
 * n_out 0 keeps the admitted pool size. Report paths may be NULL. */
typedef struct jv_curate_options {
    double vqa_min;
    int reality_min;
    double richness_min;
    double tau;
    size_t n_out;
    uint64_t seed;
    int with_replacement;
} jv_curate_options;

JV_API void jv_curate_options_default(jv_curate_options* options);
JV_API jv_status jv_curate_file(const char* in_path, const char* out_path, const jv_curate_options* options,
                                const char* report_html, const char* report_png, size_t* selected);

#ifdef __cplusplus
}
#endif

#endif /* JOINTVID_JOINTVID_H */
