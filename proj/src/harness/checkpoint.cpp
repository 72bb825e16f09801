// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "harness/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace jointvid::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'J', 'V', 'C', 'K'};
constexpr uint32_t kVersion = 1;

std::string dtype_name(torch::ScalarType t) {
    switch (t) {
        case torch::kFloat32: return "f32";
        case torch::kFloat64: return "f64";
        case torch::kInt64: return "i64";
        default: fail(ErrorKind::Io, "unsupported tensor dtype in checkpoint");
    }
}

torch::ScalarType dtype_from(const std::string& s) {
    if (s == "f32") return torch::kFloat32;
    if (s == "f64") return torch::kFloat64;
    if (s == "i64") return torch::kInt64;
    fail(ErrorKind::Io, "unknown tensor dtype '" + s + "' in checkpoint");
}

std::vector<std::pair<std::string, torch::Tensor>> named_state(const torch::nn::Module& module) {
    std::vector<std::pair<std::string, torch::Tensor>> out;
    for (const auto& p : module.named_parameters(true)) out.emplace_back(p.key(), p.value());
    for (const auto& b : module.named_buffers(true)) out.emplace_back(b.key(), b.value());
    return out;
}

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(ErrorKind::Io, "truncated checkpoint " + path);
    return v;
}

json read_header_stream(std::istream& in, const std::string& path) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) fail(ErrorKind::Io, path + " is not a checkpoint");
    const auto version = get<uint32_t>(in, path);
    if (version != kVersion) fail(ErrorKind::Io, path + ": unsupported checkpoint version");
    const auto len = get<uint64_t>(in, path);
    std::string text(len, '\0');
    if (!in.read(text.data(), std::streamsize(len))) fail(ErrorKind::Io, "truncated checkpoint " + path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Io, path + ": bad header: " + e.what());
    }
}

}  // namespace

void write_atomic(const std::string& path, const std::string& contents) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
        out.write(contents.data(), std::streamsize(contents.size()));
        if (!out) fail(ErrorKind::Io, "short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

void save_module(const std::string& path, const torch::nn::Module& module, json header) {
    json tensors = json::array();
    std::string payload;
    for (const auto& [name, value] : named_state(module)) {
        auto t = value.detach().contiguous().cpu();
        tensors.push_back({{"name", name}, {"dtype", dtype_name(t.scalar_type())}, {"shape", t.sizes().vec()}});
        payload.append(static_cast<const char*>(t.data_ptr()), t.nbytes());
    }
    header["tensors"] = tensors;
    const std::string text = header.dump();
    std::string out(kMagic, 4);
    put<uint32_t>(out, kVersion);
    put<uint64_t>(out, text.size());
    out += text;
    out += payload;
    write_atomic(path, out);
}

json read_header(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open checkpoint " + path);
    return read_header_stream(in, path);
}

json load_module(const std::string& path, torch::nn::Module& module) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open checkpoint " + path);
    json header = read_header_stream(in, path);
    std::map<std::string, torch::Tensor> slots;
    for (auto& [name, value] : named_state(module)) slots[name] = value;
    if (header.at("tensors").size() != slots.size()) fail(ErrorKind::Io, path + ": tensor count mismatch");

    torch::NoGradGuard no_grad;
    for (const auto& entry : header.at("tensors")) {
        const auto name = entry.at("name").get<std::string>();
        auto it = slots.find(name);
        if (it == slots.end()) fail(ErrorKind::Io, path + ": unexpected tensor " + name);
        auto shape = entry.at("shape").get<std::vector<int64_t>>();
        auto t = torch::empty(shape, torch::TensorOptions().dtype(dtype_from(entry.at("dtype"))));
        if (!in.read(static_cast<char*>(t.data_ptr()), std::streamsize(t.nbytes()))) {
            fail(ErrorKind::Io, "truncated checkpoint " + path);
        }
        if (it->second.sizes() != t.sizes()) fail(ErrorKind::Io, path + ": shape mismatch for " + name);
        if (it->second.scalar_type() != t.scalar_type()) it->second.set_data(it->second.to(t.scalar_type()));
        it->second.copy_(t);
    }
    return header;
}

void save_joint(const std::string& path, bct::JointDenoiser& model, int step, double data_std) {
    json h{{"kind", "joint"},
           {"arch", bct::to_string(model.arch())},
           {"backbone", model.backbone_config()},
           {"step", step},
           {"data_std", data_std}};
    if (auto* p = dynamic_cast<bct::ParallelTeacher*>(&model)) h["link_blocks"] = p->link_blocks();
    save_module(path, model, h);
}

void save_single(const std::string& path, dit::Backbone& model, const std::string& role, int step,
                 double data_std) {
    json h{{"kind", "single"}, {"role", role}, {"backbone", model->config()}, {"step", step}, {"data_std", data_std}};
    save_module(path, *model, h);
}

LoadedModel load_model(const std::string& path) {
    LoadedModel out;
    json h = read_header(path);
    out.kind = h.value("kind", "");
    const auto cfg = h.at("backbone").get<dit::BackboneConfig>();
    cfg.validate();
    if (out.kind == "joint") {
        const auto arch = bct::arch_from_string(h.at("arch").get<std::string>());
        std::vector<int> links = h.value("link_blocks", std::vector<int>{});
        out.joint = bct::make_joint(arch, dit::Backbone(cfg), links);
        out.header = load_module(path, *out.joint);
        out.joint->eval();
    } else if (out.kind == "single") {
        out.single = dit::Backbone(cfg);
        out.header = load_module(path, *out.single);
        out.single->eval();
    } else {
        fail(ErrorKind::Io, path + ": unknown checkpoint kind");
    }
    out.data_std = h.value("data_std", 1.0);
    return out;
}

}  // namespace jointvid::harness
