// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "harness/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <opencv2/imgcodecs.hpp>

#include "common/error.hpp"
#include "curation/curation.hpp"
#include "harness/checkpoint.hpp"
#include "harness/hashing.hpp"
#include "percep/percep.hpp"

namespace jointvid::world {

using nlohmann::json;

namespace {
json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
}  // namespace

void to_json(json& j, const Camera& c) {
    j = json{{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"distance", c.distance}};
}

void from_json(const json& j, Camera& c) {
    c.fx = j.at("fx");
    c.fy = j.at("fy");
    c.cx = j.at("cx");
    c.cy = j.at("cy");
    c.distance = j.at("distance");
}

void to_json(json& j, const SceneSpec& s) {
    json objects = json::array();
    for (const auto& o : s.objects) {
        objects.push_back({{"kind", o.kind == ObjectKind::RigidBall ? "ball" : "fluid"},
                           {"radius", o.radius},
                           {"position", vec(o.position)},
                           {"velocity", vec(o.velocity)},
                           {"particles", o.particles},
                           {"spread", o.spread}});
    }
    j = json{{"seed", s.seed},
             {"scene_class", to_string(s.scene_class)},
             {"class_index", int(s.scene_class)},
             {"objects", objects},
             {"gravity", vec(s.gravity)},
             {"restitution", s.restitution},
             {"box_extent", s.box_extent},
             {"fluid_damping", s.fluid_damping},
             {"camera", s.camera},
             {"frames", s.frames},
             {"height", s.height},
             {"width", s.width},
             {"track_points", s.track_points}};
}

void from_json(const json& j, SceneSpec& s) {
    s.seed = j.at("seed");
    const int cls = j.at("class_index");
    if (cls < 0 || cls >= kNumSceneClasses) fail(ErrorKind::Io, "scene: bad class index");
    s.scene_class = SceneClass(cls);
    s.objects.clear();
    for (const auto& o : j.at("objects")) {
        ObjectSpec spec;
        spec.kind = o.at("kind") == "ball" ? ObjectKind::RigidBall : ObjectKind::ParticleFluid;
        spec.radius = o.at("radius");
        spec.position = vec(o.at("position"));
        spec.velocity = vec(o.at("velocity"));
        spec.particles = o.at("particles");
        spec.spread = o.at("spread");
        s.objects.push_back(spec);
    }
    s.gravity = vec(j.at("gravity"));
    s.restitution = j.at("restitution");
    s.box_extent = j.at("box_extent");
    s.fluid_damping = j.at("fluid_damping");
    s.camera = j.at("camera").get<Camera>();
    s.frames = j.at("frames");
    s.height = j.at("height");
    s.width = j.at("width");
    s.track_points = j.at("track_points");
}

}  // namespace jointvid::world

namespace jointvid::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string frame_name(int f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%03d.png", f);
    return buf;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Io, path + ": " + e.what());
    }
}

}  // namespace

std::string RunPaths::percep(const std::string& layers) const {
    std::string tag = layers;
    std::replace(tag.begin(), tag.end(), ',', '+');
    return root + "/percep/" + tag;
}

void save_video(const std::string& dir, const Video& video) {
    fs::create_directories(dir);
    cv::Mat img(video.height, video.width, CV_8UC3);
    for (int f = 0; f < video.frames; ++f) {
        for (int y = 0; y < video.height; ++y) {
            auto* row = img.ptr<cv::Vec3b>(y);
            for (int x = 0; x < video.width; ++x) {
                for (int c = 0; c < 3; ++c) {
                    const float v = std::clamp(video.at(c, f, y, x), 0.0f, 1.0f);
                    row[x][2 - c] = uchar(std::lround(v * 255.0f));
                }
            }
        }
        const auto path = (fs::path(dir) / frame_name(f)).string();
        if (!cv::imwrite(path, img)) fail(ErrorKind::Io, "cannot write " + path);
    }
}

Video load_video(const std::string& dir) {
    std::vector<cv::Mat> frames;
    for (int f = 0;; ++f) {
        const auto path = (fs::path(dir) / frame_name(f)).string();
        if (!fs::exists(path)) break;
        cv::Mat img = cv::imread(path, cv::IMREAD_COLOR);
        if (img.empty()) fail(ErrorKind::Io, "cannot decode " + path);
        if (!frames.empty() && img.size() != frames.front().size()) fail(ErrorKind::Io, path + ": frame size differs");
        frames.push_back(img);
    }
    if (frames.empty()) fail(ErrorKind::Io, "no frames in " + dir);
    Video v(int(frames.size()), frames[0].rows, frames[0].cols);
    for (int f = 0; f < v.frames; ++f) {
        for (int y = 0; y < v.height; ++y) {
            const auto* row = frames[f].ptr<cv::Vec3b>(y);
            for (int x = 0; x < v.width; ++x) {
                for (int c = 0; c < 3; ++c) v.at(c, f, y, x) = row[x][2 - c] / 255.0f;
            }
        }
    }
    return v;
}

std::vector<int> rle_encode(const std::vector<int32_t>& values) {
    std::vector<int> runs;
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        runs.push_back(values[i]);
        runs.push_back(int(j - i));
        i = j;
    }
    return runs;
}

std::vector<int32_t> rle_decode(const std::vector<int>& runs) {
    if (runs.size() % 2 != 0) fail(ErrorKind::Io, "odd run-length list");
    std::vector<int32_t> out;
    for (std::size_t k = 0; k < runs.size(); k += 2) out.insert(out.end(), std::size_t(runs[k + 1]), runs[k]);
    return out;
}

json truth_to_json(const world::SceneTruth& truth) {
    json tracks = json::array();
    for (const auto& t : truth.tracks) {
        json pos = json::array();
        for (const auto& p : t.positions) pos.push_back({p.x(), p.y(), p.z()});
        tracks.push_back({{"id", t.id}, {"label", t.label}, {"positions", pos}});
    }
    return json{{"frames", truth.frames},
                {"height", truth.height},
                {"width", truth.width},
                {"masks_rle", rle_encode(truth.masks)},
                {"tracks", tracks},
                {"physics_labels", std::vector<double>(truth.physics_labels.begin(), truth.physics_labels.end())},
                {"wall_impacts", truth.wall_impacts},
                {"ball_impacts", truth.ball_impacts},
                {"mean_frame_change", truth.mean_frame_change}};
}

std::vector<std::string> generate_dataset(const ExperimentConfig& config, const RunPaths& paths) {
    std::vector<std::string> ids;
    std::vector<curation::ScoreRecord> scores;
    for (int i = 0; i < config.world.clips; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "clip_%04d", i);
        const auto cls = world::SceneClass(i % world::kNumSceneClasses);
        auto spec = world::random_scene(cls, config.seed * 1000003ULL + uint64_t(i), config.world.frames,
                                        config.world.size);
        spec.track_points = config.world.track_points;
        auto sim = world::simulate(spec);
        const std::string dir = paths.clips() + "/" + id;
        fs::create_directories(dir);
        write_atomic(dir + "/scene.json", json(spec).dump(1));
        write_atomic(dir + "/truth.json", truth_to_json(sim.truth).dump());
        auto record = world::score_record_from_truth(sim.truth, spec, id);
        std::ostringstream line;
        curation::write_scores(line, {record});
        write_atomic(dir + "/score.json", line.str());
        save_video(dir + "/rgb", sim.video);
        scores.push_back(record);
        ids.push_back(id);
    }
    std::ostringstream all;
    curation::write_scores(all, scores);
    write_atomic(paths.scores(), all.str());
    return ids;
}

std::vector<std::string> list_clips(const RunPaths& paths) {
    std::vector<std::string> ids;
    if (!fs::is_directory(paths.clips())) fail(ErrorKind::Stage, "no dataset at " + paths.clips());
    for (const auto& e : fs::directory_iterator(paths.clips())) {
        if (e.is_directory()) ids.push_back(e.path().filename().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

world::SceneSpec load_scene(const RunPaths& paths, const std::string& id) {
    try {
        return read_json(paths.clips() + "/" + id + "/scene.json").get<world::SceneSpec>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Io, id + "/scene.json: " + e.what());
    }
}

void encode_percep_dataset(const ExperimentConfig& config, const RunPaths& paths,
                           const percep::LayerConfig& layers) {
    const std::string out = paths.percep(layers.layers());
    for (const auto& id : list_clips(paths)) {
        const auto spec = load_scene(paths, id);
        auto sim = world::simulate(spec);
        auto cfg = layers;
        cfg.seed = config.seed * 7919ULL + spec.seed;
        auto clip = percep::encode(sim.truth, spec.camera, cfg);
        save_video(out + "/" + id, clip.video);
    }
}

Split split_ids(const std::vector<std::string>& ids, double val_fraction) {
    Split s;
    for (const auto& id : ids) (stable_fraction(id) < val_fraction ? s.val : s.train).push_back(id);
    if (s.val.empty() && ids.size() >= 2 && val_fraction > 0.0) {
        auto it = std::min_element(s.train.begin(), s.train.end(), [](const auto& a, const auto& b) {
            return stable_fraction(a) < stable_fraction(b);
        });
        s.val.push_back(*it);
        s.train.erase(it);
    }
    return s;
}

bct::PairedLatents load_latents(const ExperimentConfig& config, const RunPaths& paths,
                                const std::vector<std::string>& ids, const std::string& layers) {
    if (ids.empty()) fail(ErrorKind::Stage, "no clips to load");
    codec::LatentCodec codec(config.codec);
    std::vector<torch::Tensor> rgb, per;
    std::vector<int64_t> labels;
    for (const auto& id : ids) {
        const auto spec = load_scene(paths, id);
        auto v = load_video(paths.clips() + "/" + id + "/rgb");
        if (v.frames != config.world.frames || v.height != config.world.size || v.width != config.world.size) {
            fail(ErrorKind::Stage, id + ": clip size does not match the config");
        }
        rgb.push_back(codec.encode(codec::to_tensor(v)));
        if (!layers.empty()) {
            auto p = load_video(paths.percep(layers) + "/" + id);
            if (!p.same_shape(v)) fail(ErrorKind::Stage, id + ": perception clip shape differs from RGB");
            per.push_back(codec.encode(codec::to_tensor(p)));
        }
        labels.push_back(int64_t(spec.scene_class));
    }
    bct::PairedLatents out;
    out.rgb = torch::stack(rgb).to(torch::kFloat32);
    if (!per.empty()) out.percep = torch::stack(per).to(torch::kFloat32);
    out.labels = torch::tensor(labels, torch::kLong);
    return out;
}

double latent_std(const bct::PairedLatents& data) {
    auto all = data.percep.defined() ? torch::cat({data.rgb.flatten(), data.percep.flatten()}) : data.rgb.flatten();
    return std::max(all.std().item<double>(), 1e-3);
}

}  // namespace jointvid::harness
