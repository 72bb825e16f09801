// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "harness/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "bct/train.hpp"
#include "common/error.hpp"
#include "common/plot.hpp"
#include "distill/distiller.hpp"
#include "harness/checkpoint.hpp"
#include "harness/hashing.hpp"

namespace jointvid::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void say(const Log& log, const std::string& msg) {
    if (log) log(msg);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Stage, "missing " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Stage, path + ": " + e.what());
    }
}

std::string fmt(double v) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(8) << v;
    return os.str();
}

RunPaths paths_of(const ExperimentConfig& config) { return RunPaths{config.run_dir()}; }

Split load_split(const RunPaths& paths) {
    const auto j = read_json(paths.curated() + "/split.json");
    Split s;
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    if (s.train.empty()) fail(ErrorKind::Stage, "curated training split is empty");
    return s;
}

void require_percep(const RunPaths& paths, const std::string& layers) {
    if (!fs::is_directory(paths.percep(layers))) {
        fail(ErrorKind::Stage, "perception clips for layers '" + layers + "' are missing; run encode-percep");
    }
}

void write_teacher_curve(const std::string& stem, const std::vector<bct::JointStepLoss>& curve) {
    std::ostringstream csv;
    csv << "step,joint,rgb,percep\n";
    plot::Series joint{"joint", {}, {}}, rgb{"rgb", {}, {}}, per{"percep", {}, {}};
    for (const auto& r : curve) {
        csv << r.step << ',' << fmt(r.joint) << ',' << fmt(r.rgb) << ',' << fmt(r.percep) << '\n';
        for (auto* s : {&joint, &rgb, &per}) s->x.push_back(r.step);
        joint.y.push_back(r.joint);
        rgb.y.push_back(r.rgb);
        per.y.push_back(r.percep);
    }
    write_atomic(stem + ".csv", csv.str());
    plot::line_chart(stem + ".png", "stage I loss", {joint, rgb, per});
}

std::vector<std::string> checkpoints_in(const std::string& dir) {
    std::vector<std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind("ckpt-", 0) == 0 && name.find(".tmp") == std::string::npos) {
            out.push_back(e.path().string());
        }
    }
    return out;
}

torch::Tensor decode_rgb(const ExperimentConfig& config, const torch::Tensor& latents) {
    codec::LatentCodec codec(config.codec);
    const int64_t c = config.codec.latent_channels();
    return codec.decode(latents.narrow(1, 0, c)).clamp(0.0, 1.0);
}

std::shared_ptr<bct::JointDenoiser> fresh_joint(const ExperimentConfig& config, bct::Arch arch) {
    torch::manual_seed(config.seed);
    return bct::make_joint(arch, dit::Backbone(config.backbone), config.link_blocks());
}

}  // namespace

Manifest Manifest::load(const std::string& path) {
    Manifest m;
    if (!fs::exists(path)) return m;
    std::ifstream in(path);
    try {
        m.data_ = json::parse(in);
    } catch (const json::exception&) {
        m.data_ = json::object();
    }
    return m;
}

void Manifest::save(const std::string& path) const { write_atomic(path, data_.dump(2) + "\n"); }

bool Manifest::up_to_date(const std::string& stage, const std::string& config_hash, const json& inputs,
                          const json& outputs) const {
    if (!data_.contains("stages") || !data_["stages"].contains(stage)) return false;
    const auto& e = data_["stages"][stage];
    return e.value("completed", false) && e.value("config_hash", "") == config_hash && e.value("inputs", json()) == inputs &&
           e.value("outputs", json()) == outputs;
}

void Manifest::record(const std::string& stage, const std::string& config_hash, const json& inputs,
                      const json& outputs, double seconds) {
    data_["stages"][stage] = json{{"stage", stage},
                                  {"config_hash", config_hash},
                                  {"inputs", inputs},
                                  {"outputs", outputs},
                                  {"duration_s", seconds},
                                  {"completed", true}};
}

void gen_data(const ExperimentConfig& config, const Log& log) {
    const auto paths = paths_of(config);
    fs::remove_all(paths.root + "/data");
    const auto ids = generate_dataset(config, paths);
    say(log, "gen-data: wrote " + std::to_string(ids.size()) + " clips");
}

void encode_percep(const ExperimentConfig& config, const Log& log) {
    const auto paths = paths_of(config);
    fs::remove_all(paths.percep(config.percep.layers()));
    encode_percep_dataset(config, paths, config.percep);
    say(log, "encode-percep: layers " + config.percep.layers());
}

curation::CurationResult curate_run(const ExperimentConfig& config, const Log& log) {
    const auto paths = paths_of(config);
    auto records = curation::read_scores_file(paths.scores());
    auto cfg = config.curation;
    const auto admitted = curation::filter_richness(
        curation::filter_pool(records, cfg.vqa_min, cfg.reality_min), cfg.richness_min);
    if (!cfg.with_replacement && cfg.n_out > admitted.size()) {
        say(log, "curate: n_out " + std::to_string(cfg.n_out) + " exceeds the admitted pool of " +
                     std::to_string(admitted.size()) + "; drawing the whole pool");
        cfg.n_out = admitted.size();
    }
    auto result = curation::curate(records, cfg);
    for (int j : result.weights.excluded()) {
        say(log, "curate: primitive " + std::string(curation::kPrimitiveNames[j]) +
                     " has no labels and is excluded from weighting");
    }

    fs::remove_all(paths.curated());
    fs::create_directories(paths.curated());
    std::ostringstream sel;
    curation::write_scores(sel, result.selected);
    write_atomic(paths.curated() + "/selected.ndjson", sel.str());
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& r : result.selected) {
        if (seen.insert(r.video_id).second) ids.push_back(r.video_id);
    }
    const auto split = split_ids(ids, config.val_fraction);
    write_atomic(paths.curated() + "/split.json", json{{"train", split.train}, {"val", split.val}}.dump(1));
    curation::write_report(result, paths.curated() + "/report.html", paths.curated() + "/report.png");
    say(log, "curate: " + std::to_string(result.funnel.front()) + " -> " + std::to_string(result.selected.size()) +
                 " clips (" + std::to_string(split.val.size()) + " validation)");
    return result;
}

curation::CurationResult curate_file(const std::string& in, const std::string& out,
                                     const curation::CurationConfig& config, const std::string& report_html,
                                     const std::string& report_png) {
    auto records = curation::read_scores_file(in);
    auto result = curation::curate(records, config);
    if (!out.empty()) curation::write_scores_file(out, result.selected);
    if (!report_html.empty() || !report_png.empty()) {
        const std::string html = report_html.empty() ? fs::path(report_png).replace_extension(".html").string() : report_html;
        const std::string png = report_png.empty() ? fs::path(report_html).replace_extension(".png").string() : report_png;
        curation::write_report(result, html, png);
    }
    return result;
}

std::string latest_checkpoint(const std::string& dir) {
    std::string best;
    long best_step = -1;
    for (const auto& p : checkpoints_in(dir)) {
        const auto name = fs::path(p).filename().string().substr(5);
        try {
            std::size_t used = 0;
            const long step = std::stol(name, &used);
            if (used == name.size() && step > best_step) {
                best_step = step;
                best = p;
            }
        } catch (const std::exception&) {
        }
    }
    if (best.empty()) fail(ErrorKind::Stage, "no teacher checkpoint in " + dir);
    return best;
}

std::string train_teacher(const ExperimentConfig& config, const Log& log) {
    const auto paths = paths_of(config);
    const auto layers = config.percep.layers();
    require_percep(paths, layers);
    const auto split = load_split(paths);
    auto data = load_latents(config, paths, split.train, layers);
    const double data_std = latent_std(data);

    auto model = fresh_joint(config, config.teacher.arch);
    for (const auto& p : checkpoints_in(paths.teacher())) fs::remove(p);
    const auto ckpt = [&](int step) { return paths.teacher() + "/ckpt-" + std::to_string(step); };
    const int every = config.teacher.checkpoint_every;
    const int steps = config.teacher.hyper.steps;
    auto curve = bct::stage1_train(*model, data, config.teacher.hyper, [&](int step) {
        if (step % every == 0 || step == steps) {
            model->eval();
            save_joint(ckpt(step), *model, step, data_std);
            model->train();
            say(log, "train-teacher: step " + std::to_string(step) + " checkpoint");
        }
    });
    if (steps == 0) save_joint(ckpt(0), *model, 0, data_std);
    fs::create_directories(paths.root + "/logs");
    write_teacher_curve(paths.root + "/logs/teacher_loss", curve);
    if (!curve.empty()) {
        say(log, "train-teacher: joint loss " + fmt(curve.front().joint) + " -> " + fmt(curve.back().joint));
    }
    return ckpt(steps);
}

std::string distill_student(const ExperimentConfig& config, const std::string& teacher_ckpt, const Log& log) {
    const auto paths = paths_of(config);
    const std::string path = teacher_ckpt.empty() ? latest_checkpoint(paths.teacher()) : teacher_ckpt;
    if (!fs::exists(path)) fail(ErrorKind::Stage, "teacher checkpoint " + path + " not found");
    auto loaded = load_model(path);
    auto* teacher = dynamic_cast<bct::ParallelTeacher*>(loaded.joint.get());
    if (!teacher) fail(ErrorKind::Stage, "distillation needs a parallel-branch teacher checkpoint");
    const auto layers = config.percep.layers();
    require_percep(paths, layers);
    const auto split = load_split(paths);
    auto data = load_latents(config, paths, split.train, layers);

    torch::manual_seed(config.seed + 1);
    auto result = distill::stage2_train(*teacher, data, config.distill);
    fs::remove_all(paths.student());
    fs::create_directories(paths.student());
    const std::string out = paths.student() + "/ckpt-final";
    save_single(out, result.student, "student", config.distill.steps, loaded.data_std);

    std::ostringstream csv;
    csv << "step,L_diff,L_distill,total\n";
    plot::Series diff{"L_diff", {}, {}}, dist{"L_distill", {}, {}};
    for (const auto& r : result.curve) {
        csv << r.step << ',' << fmt(r.diffusion) << ',' << fmt(r.distill) << ',' << fmt(r.total) << '\n';
        diff.x.push_back(r.step);
        dist.x.push_back(r.step);
        diff.y.push_back(r.diffusion);
        dist.y.push_back(r.distill);
    }
    write_atomic(paths.student() + "/distill.csv", csv.str());
    plot::line_chart(paths.student() + "/distill.png", "stage II loss", {diff, dist});
    if (!result.curve.empty()) {
        say(log, "distill: L_distill " + fmt(result.curve.front().distill) + " -> " + fmt(result.curve.back().distill));
    }
    return out;
}

dit::EpsFn joint_eps(bct::JointDenoiser& model) {
    return [&model](const torch::Tensor& z, const torch::Tensor& y, const torch::Tensor& t) {
        const int64_t c = z.size(1) / 2;
        auto out = model.forward_joint(z.narrow(1, 0, c), z.narrow(1, c, c), y, t);
        return torch::cat({out.eps_rgb, out.eps_percep}, 1);
    };
}

dit::EpsFn single_eps(dit::Backbone model) {
    return [model](const torch::Tensor& z, const torch::Tensor& y, const torch::Tensor& t) mutable {
        return model->forward(z, y, t).eps;
    };
}

namespace {

void write_samples(const ExperimentConfig& config, const torch::Tensor& latents, const std::vector<int>& classes,
                   const std::string& dir, const std::string& variant) {
    auto pixels = decode_rgb(config, latents);
    const auto camera = world::Camera::framing(config.world.size, config.world.size, 1.0);
    fs::remove_all(dir);
    for (int64_t i = 0; i < pixels.size(0); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "sample_%03d", int(i));
        const std::string sdir = dir + "/" + id;
        save_video(sdir, codec::to_video(pixels[i]));
        const int cls = classes[std::size_t(i)];
        json meta{{"variant", variant},
                  {"class_index", cls},
                  {"scene_class", world::to_string(world::SceneClass(cls))},
                  {"expected_count", world::expected_object_count(world::SceneClass(cls))},
                  {"camera", camera},
                  {"box_extent", 1.0}};
        write_atomic(sdir + "/meta.json", meta.dump(1));
    }
}

torch::Tensor draw_samples(const ExperimentConfig& config, const dit::EpsFn& eps, int64_t channels,
                           const std::vector<int>& classes, bool unconditional, double data_std) {
    std::vector<int64_t> ys;
    for (int c : classes) ys.push_back(unconditional ? config.backbone.null_class() : c);
    auto y = torch::tensor(ys, torch::kLong);
    dit::SamplerOptions opt;
    opt.steps = config.sample.steps;
    opt.guidance = config.sample.guidance;
    opt.data_std = data_std;
    opt.null_class = config.backbone.null_class();
    const auto& g = config.backbone.latent_grid;
    return dit::sample_latents(eps, {channels, g[0], g[1], g[2]}, y, opt, config.seed * 31 + 17);
}

std::vector<int> sample_classes(const ExperimentConfig& config) {
    std::vector<int> classes;
    for (int c = 0; c < world::kNumSceneClasses; ++c) {
        for (int k = 0; k < config.sample.per_class; ++k) classes.push_back(c);
    }
    return classes;
}

void sample_loaded(const ExperimentConfig& config, LoadedModel& m, const std::string& variant,
                   const std::string& out_dir, bool unconditional) {
    const auto classes = sample_classes(config);
    const int64_t c = config.codec.latent_channels();
    torch::Tensor z;
    if (m.kind == "joint") {
        z = draw_samples(config, joint_eps(*m.joint), 2 * c, classes, unconditional, m.data_std);
    } else {
        z = draw_samples(config, single_eps(m.single), c, classes, unconditional, m.data_std);
    }
    write_samples(config, z, classes, out_dir + "/" + variant, variant);
}

}  // namespace

void sample_checkpoint(const ExperimentConfig& config, const std::string& ckpt, const std::string& variant,
                       const std::string& out_dir, bool unconditional) {
    if (!fs::exists(ckpt)) fail(ErrorKind::Stage, "checkpoint " + ckpt + " not found");
    auto m = load_model(ckpt);
    const auto& bc = m.kind == "joint" ? m.joint->backbone_config() : m.single->config();
    if (bc.latent_grid != config.backbone.latent_grid) fail(ErrorKind::Stage, "checkpoint latent shape differs from the config");
    sample_loaded(config, m, variant, out_dir, unconditional);
}

void sample_run(const ExperimentConfig& config, const Log& log) {
    const auto paths = paths_of(config);
    const std::string ckpt = paths.student() + "/ckpt-final";
    fs::remove_all(paths.samples());
    sample_checkpoint(config, ckpt, "student", paths.samples(), false);
    sample_checkpoint(config, ckpt, "baseline-uncond", paths.samples(), true);
    say(log, "sample: wrote student and baseline-uncond samples");
}

namespace {

std::vector<EvalClip> load_eval_clips(const std::string& dir) {
    std::vector<EvalClip> clips;
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory()) ids.push_back(e.path().filename().string());
    }
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
        const auto meta = read_json(dir + "/" + id + "/meta.json");
        EvalClip c;
        c.id = id;
        c.video = load_video(dir + "/" + id);
        c.expected_count = meta.at("expected_count");
        c.camera = meta.at("camera").get<world::Camera>();
        c.box_extent = meta.at("box_extent");
        clips.push_back(std::move(c));
    }
    return clips;
}

std::vector<EvalClip> truth_clips(const RunPaths& paths, const std::vector<std::string>& ids) {
    std::vector<EvalClip> clips;
    for (const auto& id : ids) {
        const auto spec = load_scene(paths, id);
        EvalClip c;
        c.id = id;
        c.video = load_video(paths.clips() + "/" + id + "/rgb");
        c.expected_count = world::expected_object_count(spec.scene_class);
        c.camera = spec.camera;
        c.box_extent = spec.box_extent;
        clips.push_back(std::move(c));
    }
    return clips;
}

void write_toypc(const std::string& dir, const std::vector<std::pair<std::string, ToyPCReport>>& rows) {
    fs::create_directories(dir);
    std::ostringstream csv, per;
    csv << "variant,clips,wall_penetration,count_stability,smoothness\n";
    per << "variant,clip,wall_penetration,count_stability,smoothness\n";
    std::vector<std::string> names;
    plot::BarGroup wall{"wall penetration", {}}, count{"count stability", {}};
    for (const auto& [name, r] : rows) {
        csv << name << ',' << r.clips.size() << ',' << fmt(r.wall_penetration) << ',' << fmt(r.count_stability) << ','
            << fmt(r.smoothness) << '\n';
        for (const auto& c : r.clips) {
            per << name << ',' << c.id << ',' << fmt(c.wall_penetration) << ',' << fmt(c.count_stability) << ','
                << fmt(c.smoothness) << '\n';
        }
        names.push_back(name);
        wall.values.push_back(r.wall_penetration);
        count.values.push_back(r.count_stability);
    }
    write_atomic(dir + "/toypc.csv", csv.str());
    write_atomic(dir + "/toypc_clips.csv", per.str());
    plot::bar_chart(dir + "/toypc.png", "toy physics proxy", names, {wall, count});
}

}  // namespace

std::vector<std::pair<std::string, ToyPCReport>> evaluate_run(const ExperimentConfig& config,
                                                              const std::string& samples_dir, const Log& log) {
    const auto paths = paths_of(config);
    const std::string dir = samples_dir.empty() ? paths.samples() : samples_dir;
    if (!fs::is_directory(dir)) fail(ErrorKind::Stage, "no samples at " + dir);
    std::vector<std::pair<std::string, ToyPCReport>> rows;

    std::vector<std::string> truth_ids;
    if (fs::exists(paths.curated() + "/split.json")) {
        const auto split = load_split(paths);
        truth_ids = split.val.empty() ? split.train : split.val;
    } else if (fs::is_directory(paths.clips())) {
        truth_ids = list_clips(paths);
    }
    if (!truth_ids.empty()) rows.emplace_back("ground-truth", evaluate_toy_pc(truth_clips(paths, truth_ids), config.detector));

    std::vector<std::string> variants;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory()) variants.push_back(e.path().filename().string());
    }
    std::sort(variants.begin(), variants.end());
    for (const auto& v : variants) rows.emplace_back(v, evaluate_toy_pc(load_eval_clips(dir + "/" + v), config.detector));
    write_toypc(paths.eval(), rows);
    for (const auto& [name, r] : rows) {
        say(log, "evaluate: " + name + " wall " + fmt(r.wall_penetration) + " count " + fmt(r.count_stability) +
                     " smooth " + fmt(r.smoothness));
    }
    return rows;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string stage_config_hash(const ExperimentConfig& config, const std::string& stage) {
    json full = config;
    json part{{"stage", stage}, {"seed", config.seed}};
    if (stage == "gen-data") part["world"] = full["world"];
    if (stage == "encode-percep") part["world"] = full["world"], part["percep"] = full["percep"];
    if (stage == "curate") part["curation"] = full["curation"];
    if (stage == "train-teacher") {
        part["codec"] = full["codec"];
        part["backbone"] = full["backbone"];
        part["teacher"] = full["teacher"];
        part["percep"] = full["percep"];
    }
    if (stage == "distill") part["distill"] = full["distill"], part["codec"] = full["codec"];
    if (stage == "sample") part["sample"] = full["sample"], part["codec"] = full["codec"];
    if (stage == "evaluate") part["detector"] = full["detector"];
    return sha256_hex(part.dump());
}

std::string file_hash(const std::string& path) { return fs::exists(path) ? sha256_file(path) : ""; }

std::string teacher_hash(const RunPaths& paths) {
    auto all = checkpoints_in(paths.teacher());
    if (all.empty()) return "";
    return sha256_hex(sha256_file(latest_checkpoint(paths.teacher())) + file_hash(paths.root + "/logs/teacher_loss.csv"));
}

json stage_inputs(const ExperimentConfig& config, const RunPaths& paths, const std::string& stage) {
    const auto data = [&] { return sha256_tree(paths.root + "/data"); };
    if (stage == "gen-data") return json::object();
    if (stage == "encode-percep" || stage == "curate") return json{{"data", data()}};
    if (stage == "train-teacher") {
        return json{{"data", data()},
                    {"percep", sha256_tree(paths.percep(config.percep.layers()))},
                    {"curated", sha256_tree(paths.curated())}};
    }
    if (stage == "distill") return json{{"teacher", teacher_hash(paths)}, {"curated", sha256_tree(paths.curated())}};
    if (stage == "sample") return json{{"student", sha256_tree(paths.student())}};
    return json{{"samples", sha256_tree(paths.samples())}, {"curated", sha256_tree(paths.curated())}};
}

json stage_outputs(const ExperimentConfig& config, const RunPaths& paths, const std::string& stage) {
    if (stage == "gen-data") return json{{"data", sha256_tree(paths.root + "/data")}};
    if (stage == "encode-percep") return json{{"percep", sha256_tree(paths.percep(config.percep.layers()))}};
    if (stage == "curate") return json{{"curated", sha256_tree(paths.curated())}};
    if (stage == "train-teacher") return json{{"teacher", teacher_hash(paths)}};
    if (stage == "distill") return json{{"student", sha256_tree(paths.student())}};
    if (stage == "sample") return json{{"samples", sha256_tree(paths.samples())}};
    return json{{"eval", sha256_tree(paths.eval())}};
}

void run_stage(const ExperimentConfig& config, const std::string& stage, const Log& log) {
    if (stage == "gen-data") gen_data(config, log);
    else if (stage == "encode-percep") encode_percep(config, log);
    else if (stage == "curate") curate_run(config, log);
    else if (stage == "train-teacher") train_teacher(config, log);
    else if (stage == "distill") distill_student(config, "", log);
    else if (stage == "sample") sample_run(config, log);
    else if (stage == "evaluate") evaluate_run(config, "", log);
    else fail(ErrorKind::Config, "unknown stage '" + stage + "'");
}

}  // namespace

std::vector<std::string> run_pipeline(const ExperimentConfig& config, const RunOptions& options, const Log& log) {
    const auto paths = paths_of(config);
    std::size_t first = 0;
    if (!options.skip_to.empty()) {
        auto it = std::find(kStages.begin(), kStages.end(), options.skip_to);
        if (it == kStages.end()) fail(ErrorKind::Config, "unknown stage '" + options.skip_to + "' for --skip-to");
        first = std::size_t(it - kStages.begin());
    }
    fs::create_directories(paths.root);
    write_atomic(paths.root + "/config.json", json(config).dump(2) + "\n");
    auto manifest = Manifest::load(paths.manifest());
    json doc = manifest.data();
    std::vector<std::string> ran;
    for (std::size_t k = first; k < kStages.size(); ++k) {
        const auto& stage = kStages[k];
        const auto hash = stage_config_hash(config, stage);
        const auto inputs = stage_inputs(config, paths, stage);
        if (!options.force && manifest.up_to_date(stage, hash, inputs, stage_outputs(config, paths, stage))) {
            say(log, stage + ": up to date, skipped");
            continue;
        }
        const auto start = Clock::now();
        try {
            run_stage(config, stage, log);
        } catch (const Error& e) {
            manifest.save(paths.manifest());
            fail(e.kind() == ErrorKind::Config ? ErrorKind::Config : ErrorKind::Stage,
                 "stage " + stage + " failed: " + e.what());
        } catch (const std::exception& e) {
            manifest.save(paths.manifest());
            fail(ErrorKind::Stage, "stage " + stage + " failed: " + e.what());
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        manifest.record(stage, hash, inputs, stage_outputs(config, paths, stage), seconds);
        manifest.save(paths.manifest());
        ran.push_back(stage);
    }
    return ran;
}

std::vector<std::string> ablation_rows(const std::string& axis) {
    if (axis == "arch") return {"parallel", "channel", "spatial"};
    if (axis == "modality") return {"seg", "xyz", "tracks", "unified"};
    if (axis == "distill") return {"baseline", "teacher", "teacher-no-links", "student"};
    fail(ErrorKind::Config, "unknown ablation axis '" + axis + "' (expected arch, modality or distill)");
}

namespace {

void ensure_data(const ExperimentConfig& config, const std::vector<std::string>& layer_sets, const Log& log) {
    const auto paths = paths_of(config);
    auto manifest = Manifest::load(paths.manifest());
    for (const std::string stage : {"gen-data", "curate"}) {
        const auto hash = stage_config_hash(config, stage);
        const auto inputs = stage_inputs(config, paths, stage);
        if (manifest.up_to_date(stage, hash, inputs, stage_outputs(config, paths, stage))) continue;
        const auto start = Clock::now();
        run_stage(config, stage, log);
        manifest.record(stage, hash, inputs, stage_outputs(config, paths, stage),
                        std::chrono::duration<double>(Clock::now() - start).count());
        manifest.save(paths.manifest());
    }
    for (const auto& layers : layer_sets) {
        if (!fs::is_directory(paths.percep(layers))) {
            auto cfg = config;
            cfg.percep = percep::LayerConfig::from_layers(layers);
            cfg.percep.n_points = config.percep.n_points;
            cfg.percep.point_radius = config.percep.point_radius;
            cfg.percep.seg_alpha = config.percep.seg_alpha;
            encode_percep_dataset(cfg, paths, cfg.percep);
            say(log, "ablate: encoded perception layers " + layers);
        }
    }
}

std::vector<double> joint_curve(const std::vector<bct::JointStepLoss>& c) {
    std::vector<double> out;
    for (const auto& r : c) out.push_back(r.joint);
    return out;
}

void write_ablation(const std::string& dir, const std::string& axis, const std::vector<AblationRow>& rows) {
    fs::create_directories(dir);
    std::ostringstream csv;
    csv << "axis,row,status,joint_val_loss,rgb_val_loss,percep_val_loss,wall_penetration,count_stability,"
           "smoothness,error\n";
    std::vector<std::string> names;
    plot::BarGroup joint{"joint val", {}}, rgb{"rgb val", {}};
    plot::BarGroup wall{"wall penetration", {}}, count{"count stability", {}};
    std::vector<plot::Series> curves;
    for (const auto& r : rows) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        const bool t = r.ok;
        csv << axis << ',' << r.name << ',' << (r.ok ? "ok" : "failed") << ',' << fmt(r.joint_val) << ','
            << fmt(r.rgb_val) << ',' << fmt(r.percep_val) << ',' << (t ? fmt(r.toypc.wall_penetration) : "nan") << ','
            << (t ? fmt(r.toypc.count_stability) : "nan") << ',' << (t ? fmt(r.toypc.smoothness) : "nan") << ','
            << err << '\n';
        names.push_back(r.name);
        joint.values.push_back(r.joint_val);
        rgb.values.push_back(r.rgb_val);
        wall.values.push_back(t ? r.toypc.wall_penetration : std::nan(""));
        count.values.push_back(t ? r.toypc.count_stability : std::nan(""));
        if (!r.curve.empty()) {
            plot::Series s{r.name, {}, r.curve};
            for (std::size_t i = 0; i < r.curve.size(); ++i) s.x.push_back(double(i + 1));
            curves.push_back(std::move(s));
        }
    }
    write_atomic(dir + "/table.csv", csv.str());
    plot::bar_chart(dir + "/val_loss.png", axis + " ablation: validation loss", names, {joint, rgb});
    plot::bar_chart(dir + "/toypc.png", axis + " ablation: toy physics proxy", names, {wall, count});
    plot::line_chart(dir + "/train_loss.png", axis + " ablation: training loss", curves);
}

ToyPCReport toypc_of(const ExperimentConfig& config, LoadedModel& m, const std::string& dir, const std::string& row,
                     bool joint) {
    const auto classes = sample_classes(config);
    const int64_t c = config.codec.latent_channels();
    auto eps = joint ? joint_eps(*m.joint) : single_eps(m.single);
    auto z = draw_samples(config, eps, joint ? 2 * c : c, classes, false, m.data_std);
    write_samples(config, z, classes, dir + "/samples/" + row, row);
    return evaluate_toy_pc(load_eval_clips(dir + "/samples/" + row), config.detector);
}

}  // namespace

std::vector<AblationRow> ablate(const ExperimentConfig& config, const std::string& axis, const Log& log) {
    const auto rows = ablation_rows(axis);
    const auto paths = paths_of(config);
    const std::string dir = paths.ablate(axis);
    fs::create_directories(dir);

    std::vector<std::string> layer_sets{config.percep.layers()};
    if (axis == "modality") {
        layer_sets.clear();
        for (const auto& r : rows) layer_sets.push_back(percep::LayerConfig::from_layers(r).layers());
    }
    ensure_data(config, layer_sets, log);
    const auto split = load_split(paths);
    const auto& val_ids = split.val.empty() ? split.train : split.val;
    const uint64_t val_seed = config.seed + 4242;

    std::vector<AblationRow> out;
    std::shared_ptr<bct::ParallelTeacher> shared_teacher;
    double shared_std = 1.0;

    for (const auto& name : rows) {
        AblationRow row;
        row.name = name;
        try {
            const std::string layers = axis == "modality" ? percep::LayerConfig::from_layers(name).layers()
                                                          : config.percep.layers();
            auto train = load_latents(config, paths, split.train, layers);
            auto val = load_latents(config, paths, val_ids, layers);
            LoadedModel m;
            m.data_std = latent_std(train);
            bool joint = true;
            if (axis == "arch" || axis == "modality" || name == "teacher") {
                const auto arch = axis == "arch" ? bct::arch_from_string(name) : bct::Arch::Parallel;
                auto model = fresh_joint(config, arch);
                row.curve = joint_curve(bct::stage1_train(*model, train, config.teacher.hyper));
                auto v = bct::joint_validation_loss(*model, val, val_seed);
                row.joint_val = v.joint;
                row.rgb_val = v.rgb;
                row.percep_val = v.percep;
                m.kind = "joint";
                m.joint = model;
                if (name == "teacher") {
                    shared_teacher = std::dynamic_pointer_cast<bct::ParallelTeacher>(model);
                    shared_std = m.data_std;
                }
            } else if (name == "baseline") {
                torch::manual_seed(config.seed);
                dit::Backbone model(config.backbone);
                row.curve = bct::train_rgb(model, train, config.teacher.hyper);
                row.rgb_val = bct::rgb_validation_loss(model, val, val_seed);
                m.kind = "single";
                m.single = model;
                joint = false;
            } else {
                if (!shared_teacher) fail(ErrorKind::Stage, "teacher row failed, nothing to derive '" + name + "' from");
                if (name == "teacher-no-links") {
                    m.single = bct::make_student(*shared_teacher);
                } else {
                    torch::manual_seed(config.seed + 1);
                    auto res = distill::stage2_train(*shared_teacher, train, config.distill);
                    for (const auto& r : res.curve) row.curve.push_back(r.total);
                    m.single = res.student;
                }
                row.rgb_val = bct::rgb_validation_loss(m.single, val, val_seed);
                m.kind = "single";
                m.data_std = shared_std;
                joint = false;
            }
            row.toypc = toypc_of(config, m, dir, name, joint);
            row.ok = true;
            say(log, "ablate " + axis + ": " + name + " joint " + fmt(row.joint_val) + " rgb " + fmt(row.rgb_val));
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            say(log, "ablate " + axis + ": " + name + " failed: " + row.error);
        }
        out.push_back(std::move(row));
    }
    write_ablation(dir, axis, out);
    return out;
}

}  // namespace jointvid::harness
