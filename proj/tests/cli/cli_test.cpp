// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

int run(const std::string& args, const std::string& env = {}) {
    const std::string cmd = env + " \"" JV_CLI_PATH "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void expect(const std::string& what, int got, int want) {
    const bool ok = got == want;
    std::printf("%s %s (exit %d, want %d)\n", ok ? "ok  " : "FAIL", what.c_str(), got, want);
    if (!ok) ++failures;
}

}  // namespace

int main() {
    const fs::path work = JV_WORK_DIR;
    fs::remove_all(work);
    fs::create_directories(work);
    const auto cfg = (work / "tiny.json").string();
    std::ofstream(cfg) << R"({"name": "cli", "seed": 1,
        "world": {"clips": 6, "frames": 4, "size": 16, "track_points": 16},
        "percep": {"layers": "unified", "n_points": 16},
        "backbone": {"depth": 2, "width": 32, "heads": 2, "patch": [1, 4, 4]},
        "teacher": {"steps": 2, "batch": 2, "checkpoint_every": 1},
        "distill": {"steps": 2, "batch": 2},
        "curation": {"richness_min": 1.1},
        "sample": {"steps": 2, "per_class": 1}})";
    const auto bad = (work / "bad.json").string();
    std::ofstream(bad) << R"({"colour": 1})";
    const std::string root = " --output-root " + (work / "runs").string();
    const std::string env_root = (work / "env_runs").string();

    expect("help", run("--help"), 0);
    expect("no verb", run(""), 2);
    expect("missing config file", run("gen-data --config /nonexistent.json" + root), 2);
    expect("unknown config key", run("gen-data --config " + bad + root), 2);
    expect("bad override", run("gen-data --config " + cfg + " --set world.frames=5" + root), 2);
    expect("bad axis", run("ablate --config " + cfg + " --axis colour" + root), 2);
    expect("teacher without data", run("train-teacher --config " + cfg + root), 3);
    expect("distill without teacher",
           run("distill --config " + cfg + " --teacher " + (work / "none.bin").string() + root), 3);
    expect("pipeline", run("run-pipeline --config " + cfg + root), 0);
    expect("pipeline again", run("run-pipeline --config " + cfg + root), 0);
    expect("sample", run("sample --config " + cfg + root), 0);
    expect("evaluate", run("evaluate --config " + cfg + root), 0);
    expect("env output root", run("gen-data --config " + cfg, "JOINTVID_OUTPUT_ROOT=" + env_root), 0);
    const bool env_used = fs::exists(fs::path(env_root) / "cli" / "data" / "clips");
    std::printf("%s env output root used\n", env_used ? "ok  " : "FAIL");
    if (!env_used) ++failures;

    const auto scores = (work / "runs" / "cli" / "data" / "scores.ndjson").string();
    expect("standalone curate",
           run("curate --in " + scores + " --out " + (work / "sel.ndjson").string() + " --richness-min 1.1"), 0);

    std::printf("%d failures\n", failures);
    return failures ? 1 : 0;
}
