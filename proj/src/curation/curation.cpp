// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "curation/curation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "common/error.hpp"
#include "common/plot.hpp"

namespace jointvid::curation {

using nlohmann::json;

void validate(const ScoreRecord& r) {
    if (!(r.vqa >= 1.0 && r.vqa <= 5.0)) fail(ErrorKind::InvalidArgument, r.video_id + ": vqa outside [1, 5]");
    if (r.reality < 1 || r.reality > 5) fail(ErrorKind::InvalidArgument, r.video_id + ": reality outside 1..5");
    for (int j = 0; j < kNumPrimitives; ++j) {
        if (!(r.s[j] >= 1.0 && r.s[j] <= 5.0)) {
            fail(ErrorKind::InvalidArgument,
                 r.video_id + ": score " + std::string(kPrimitiveNames[j]) + " outside [1, 5]");
        }
    }
}

std::vector<ScoreRecord> filter_pool(const std::vector<ScoreRecord>& records, double vqa_min, int reality_min) {
    std::vector<ScoreRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [&](const ScoreRecord& r) { return r.vqa >= vqa_min && r.reality >= reality_min; });
    return out;
}

Richness richness_aggregate(const RichnessVector& s) {
    std::array<double, 3> sum{};
    std::array<int, 3> n{};
    for (int j = 0; j < kNumPrimitives; ++j) {
        const int d = int(domain_of(j));
        sum[d] += s[j];
        ++n[d];
    }
    Richness r;
    r.dynamic = sum[0] / n[0];
    r.thermodynamic = sum[1] / n[1];
    r.optic = sum[2] / n[2];
    r.total = (r.dynamic + r.thermodynamic + r.optic) / 3.0;
    return r;
}

std::vector<ScoreRecord> filter_richness(const std::vector<ScoreRecord>& records, double min_total) {
    std::vector<ScoreRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [&](const ScoreRecord& r) { return richness_aggregate(r.s).total >= min_total; });
    return out;
}

Counts LabelMatrix::column_counts() const {
    Counts c{};
    for (const auto& row : rows) {
        for (int j = 0; j < kNumPrimitives; ++j) c[j] += row[j];
    }
    return c;
}

LabelMatrix assign_labels(const std::vector<RichnessVector>& scores, double tau) {
    if (!(tau > 1.0 && tau <= 5.0)) fail(ErrorKind::InvalidArgument, "tau must lie in (1, 5]");
    LabelMatrix y;
    y.tau = tau;
    y.rows.reserve(scores.size());
    for (const auto& s : scores) {
        LabelRow row{};
        bool any = false;
        for (int j = 0; j < kNumPrimitives; ++j) {
            row[j] = s[j] >= tau ? 1 : 0;
            any = any || row[j];
        }
        if (!any) row[std::size_t(std::max_element(s.begin(), s.end()) - s.begin())] = 1;
        y.rows.push_back(row);
    }
    return y;
}

LabelMatrix assign_labels(const std::vector<ScoreRecord>& records, double tau) {
    std::vector<RichnessVector> scores;
    scores.reserve(records.size());
    for (const auto& r : records) scores.push_back(r.s);
    return assign_labels(scores, tau);
}

std::vector<int> IrblWeights::excluded() const {
    std::vector<int> out;
    for (int j = 0; j < kNumPrimitives; ++j) {
        if (!included[j]) out.push_back(j);
    }
    return out;
}

IrblWeights irbl_weights(const LabelMatrix& y) {
    IrblWeights w;
    w.counts = y.column_counts();
    const int64_t top = *std::max_element(w.counts.begin(), w.counts.end());
    if (top == 0) fail(ErrorKind::InvalidArgument, "no labels");
    for (int j = 0; j < kNumPrimitives; ++j) {
        w.included[j] = w.counts[j] > 0;
        w.irbl[j] = w.included[j] ? double(top) / double(w.counts[j]) : 0.0;
    }
    return w;
}

std::vector<double> video_weights(const LabelMatrix& y, const IrblWeights& w) {
    const double norm = std::accumulate(w.irbl.begin(), w.irbl.end(), 0.0);
    std::vector<double> out(y.size(), 0.0);
    if (norm <= 0.0) return out;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double sum = 0.0;
        for (int j = 0; j < kNumPrimitives; ++j) {
            if (w.included[j] && y.rows[i][j]) sum += w.irbl[j];
        }
        out[i] = sum / norm;
    }
    return out;
}

namespace {

Counts histogram(const LabelMatrix& y, const std::vector<std::size_t>& indices) {
    Counts c{};
    for (std::size_t i : indices) {
        for (int j = 0; j < kNumPrimitives; ++j) c[j] += y.rows[i][j];
    }
    return c;
}

std::size_t weighted_pick(const std::vector<double>& weights, double total, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng) * total;
    double acc = 0.0;
    std::size_t last = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last = i;
        if (u < acc) return i;
    }
    return last;
}

}  // namespace

ResampleResult resample(const LabelMatrix& y, const IrblWeights& w, std::size_t n_out, uint64_t seed,
                        bool with_replacement) {
    if (!with_replacement && n_out > y.size()) {
        fail(ErrorKind::InvalidArgument, "cannot draw more videos than the pool holds without replacement");
    }
    auto weights = video_weights(y, w);
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) fail(ErrorKind::InvalidArgument, "all sampling weights are zero");

    ResampleResult r;
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    r.before = histogram(y, all);

    std::mt19937_64 rng(seed);
    r.indices.reserve(n_out);
    for (std::size_t k = 0; k < n_out; ++k) {
        if (!(total > 0.0)) {
            // Only zero-weight videos remain; take them in pool order.
            for (std::size_t i = 0; i < weights.size() && r.indices.size() < n_out; ++i) {
                if (weights[i] == 0.0 && std::find(r.indices.begin(), r.indices.end(), i) == r.indices.end()) {
                    r.indices.push_back(i);
                }
            }
            break;
        }
        const std::size_t pick = weighted_pick(weights, total, rng);
        r.indices.push_back(pick);
        if (!with_replacement) {
            weights[pick] = -1.0;
            total = 0.0;
            for (double v : weights) total += std::max(v, 0.0);
        }
    }
    r.after = histogram(y, r.indices);
    return r;
}

double imbalance_ratio(const Counts& counts) {
    int64_t hi = 0, lo = 0;
    for (int64_t c : counts) {
        if (c <= 0) continue;
        hi = std::max(hi, c);
        lo = lo == 0 ? c : std::min(lo, c);
    }
    return lo == 0 ? 0.0 : double(hi) / double(lo);
}

CurationResult curate(const std::vector<ScoreRecord>& records, const CurationConfig& config) {
    for (const auto& r : records) validate(r);
    CurationResult out;
    out.funnel.push_back(records.size());
    auto pool = filter_pool(records, config.vqa_min, config.reality_min);
    out.funnel.push_back(pool.size());
    out.admitted = filter_richness(pool, config.richness_min);
    out.funnel.push_back(out.admitted.size());
    if (out.admitted.empty()) fail(ErrorKind::Stage, "no records survive filtering");

    out.labels = assign_labels(out.admitted, config.tau);
    out.weights = irbl_weights(out.labels);
    const std::size_t n = config.n_out == 0 ? out.admitted.size() : config.n_out;
    out.draw = resample(out.labels, out.weights, n, config.seed, config.with_replacement);
    for (std::size_t i : out.draw.indices) out.selected.push_back(out.admitted[i]);
    out.funnel.push_back(out.selected.size());
    return out;
}

namespace {

ScoreRecord record_from_json(const json& j) {
    ScoreRecord r;
    r.video_id = j.at("video_id").get<std::string>();
    r.vqa = j.at("vqa").get<double>();
    r.reality = j.at("reality").get<int>();
    const auto& s = j.at("s");
    if (!s.is_array() || s.size() != std::size_t(kNumPrimitives)) {
        fail(ErrorKind::InvalidArgument, r.video_id + ": expected 17 richness scores");
    }
    for (int k = 0; k < kNumPrimitives; ++k) r.s[k] = s[k].get<double>();
    if (j.contains("subject_phrases")) r.subject_phrases = j["subject_phrases"].get<std::vector<std::string>>();
    return r;
}

json record_to_json(const ScoreRecord& r) {
    return json{{"video_id", r.video_id},
                {"vqa", r.vqa},
                {"reality", r.reality},
                {"s", std::vector<double>(r.s.begin(), r.s.end())},
                {"subject_phrases", r.subject_phrases}};
}

}  // namespace

std::vector<ScoreRecord> read_scores(std::istream& in) {
    std::vector<ScoreRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto rec = record_from_json(json::parse(line));
            validate(rec);
            out.push_back(std::move(rec));
        } catch (const json::exception& e) {
            fail(ErrorKind::InvalidArgument, "score line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            fail(ErrorKind::InvalidArgument, "score line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_scores(std::ostream& out, const std::vector<ScoreRecord>& records) {
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<ScoreRecord> read_scores_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    return read_scores(in);
}

void write_scores_file(const std::string& path, const std::vector<ScoreRecord>& records) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write " + path);
    write_scores(out, records);
}

void write_report(const CurationResult& result, const std::string& html_path, const std::string& png_path) {
    namespace fs = std::filesystem;
    const std::string csv_path = fs::path(png_path).replace_extension(".csv").string();
    {
        std::ofstream csv(csv_path);
        if (!csv) fail(ErrorKind::Io, "cannot write " + csv_path);
        csv << "primitive,domain,before,after,irbl\n";
        for (int j = 0; j < kNumPrimitives; ++j) {
            static const char* domains[] = {"dynamic", "thermodynamic", "optic"};
            csv << kPrimitiveNames[j] << ',' << domains[int(domain_of(j))] << ',' << result.draw.before[j] << ','
                << result.draw.after[j] << ',' << result.weights.irbl[j] << '\n';
        }
    }

    std::vector<std::string> names(kPrimitiveNames.begin(), kPrimitiveNames.end());
    auto share = [](const Counts& c) {
        const double total = double(std::accumulate(c.begin(), c.end(), int64_t{0}));
        std::vector<double> v;
        for (int64_t x : c) v.push_back(total > 0 ? double(x) / total : 0.0);
        return v;
    };
    plot::bar_chart(png_path, "primitive label share", names,
                    {{"before", share(result.draw.before)}, {"after", share(result.draw.after)}});

    std::ofstream html(html_path);
    if (!html) fail(ErrorKind::Io, "cannot write " + html_path);
    const auto rel_png = fs::path(png_path).filename().string();
    html << "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>curation report</title></head><body>\n"
         << "<h1>Curation report</h1>\n<h2>Funnel</h2>\n<table border=\"1\"><tr><th>stage</th><th>videos</th></tr>\n";
    static const char* stages[] = {"input", "vqa and reality", "physical richness", "resampled"};
    for (std::size_t k = 0; k < result.funnel.size() && k < 4; ++k) {
        html << "<tr><td>" << stages[k] << "</td><td>" << result.funnel[k] << "</td></tr>\n";
    }
    html << "</table>\n<p>imbalance ratio before " << imbalance_ratio(result.draw.before) << ", after "
         << imbalance_ratio(result.draw.after) << "</p>\n";
    const auto excluded = result.weights.excluded();
    if (!excluded.empty()) {
        html << "<p>primitives without labels (excluded from weighting):";
        for (int j : excluded) html << ' ' << kPrimitiveNames[j];
        html << "</p>\n";
    }
    html << "<img src=\"" << rel_png << "\" alt=\"primitive histogram\">\n"
         << "<table border=\"1\"><tr><th>primitive</th><th>before</th><th>after</th><th>IRBL</th></tr>\n";
    for (int j = 0; j < kNumPrimitives; ++j) {
        html << "<tr><td>" << kPrimitiveNames[j] << "</td><td>" << result.draw.before[j] << "</td><td>"
             << result.draw.after[j] << "</td><td>" << result.weights.irbl[j] << "</td></tr>\n";
    }
    html << "</table>\n</body></html>\n";
}

}  // namespace jointvid::curation
