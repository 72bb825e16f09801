// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "curation/records.hpp"

namespace jointvid::curation {

/// Keeps records with vqa >= vqa_min and reality >= reality_min, in order.
std::vector<ScoreRecord> filter_pool(const std::vector<ScoreRecord>& records, double vqa_min = 3.0,
                                     int reality_min = 4);

struct Richness {
    double dynamic = 0.0;
    double thermodynamic = 0.0;
    double optic = 0.0;
    double total = 0.0;
};

/// Per-domain means and their unweighted average.
Richness richness_aggregate(const RichnessVector& s);

/// Keeps records whose aggregated richness total is at least `min_total`.
std::vector<ScoreRecord> filter_richness(const std::vector<ScoreRecord>& records, double min_total);

using LabelRow = std::array<uint8_t, kNumPrimitives>;
using Counts = std::array<int64_t, kNumPrimitives>;

struct LabelMatrix {
    std::vector<LabelRow> rows;
    double tau = 4.0;

    std::size_t size() const { return rows.size(); }
    Counts column_counts() const;
};

/// y_ij = [s_ij >= tau]; an all-zero row gets a single 1 at its argmax
/// (lowest index on ties).
LabelMatrix assign_labels(const std::vector<RichnessVector>& scores, double tau = 4.0);
LabelMatrix assign_labels(const std::vector<ScoreRecord>& records, double tau = 4.0);

struct IrblWeights {
    std::array<double, kNumPrimitives> irbl{};  // 0 for excluded primitives
    std::array<bool, kNumPrimitives> included{};
    Counts counts{};
    std::vector<int> excluded() const;
};

/// IRBL_j = max_k C_k / C_j over primitives with a non-zero count.
IrblWeights irbl_weights(const LabelMatrix& y);

/// Raw per-video weight sum_j y_ij IRBL_j / sum_j IRBL_j (before renormalizing).
std::vector<double> video_weights(const LabelMatrix& y, const IrblWeights& w);

struct ResampleResult {
    std::vector<std::size_t> indices;  // into the pool, in draw order
    Counts before{};
    Counts after{};
};

/// Draws n_out videos with probability proportional to their weights,
/// sequentially and without replacement unless `with_replacement`.
ResampleResult resample(const LabelMatrix& y, const IrblWeights& w, std::size_t n_out, uint64_t seed,
                        bool with_replacement = false);

/// Max over min non-zero primitive count; 0 for an empty histogram.
double imbalance_ratio(const Counts& counts);

struct CurationConfig {
    double vqa_min = 3.0;
    int reality_min = 4;
    double richness_min = 2.0;
    double tau = 4.0;
    std::size_t n_out = 0;  // 0 keeps the size of the admitted pool
    uint64_t seed = 0;
    bool with_replacement = false;
};

struct CurationResult {
    std::vector<std::size_t> funnel;  // input, after vqa/reality, after richness, output
    std::vector<ScoreRecord> admitted;
    LabelMatrix labels;
    IrblWeights weights;
    ResampleResult draw;
    std::vector<ScoreRecord> selected;
};

CurationResult curate(const std::vector<ScoreRecord>& records, const CurationConfig& config);

/// One JSON object per line.
std::vector<ScoreRecord> read_scores(std::istream& in);
void write_scores(std::ostream& out, const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> read_scores_file(const std::string& path);
void write_scores_file(const std::string& path, const std::vector<ScoreRecord>& records);

/// Before/after primitive histograms as CSV, a PNG chart, and an HTML page
/// embedding both. Paths are derived from `html_path` and `png_path`.
void write_report(const CurationResult& result, const std::string& html_path, const std::string& png_path);

}  // namespace jointvid::curation
