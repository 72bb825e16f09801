// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace jointvid::curation {

inline constexpr int kNumPrimitives = 17;

enum class Domain { Dynamic, Thermodynamic, Optic };

/// Physical primitive taxonomy: six dynamic, six thermodynamic and five
/// optic primitives, in this fixed column order.
inline constexpr std::array<std::string_view, kNumPrimitives> kPrimitiveNames = {
    "rigid_body_motion", "collision",     "liquid_motion", "gas_motion",
    "elastic_motion",    "deformation",   "melting",       "solidification",
    "vaporization",      "liquefaction",  "combustion",    "explosion",
    "reflection",        "refraction",    "scattering",    "interference_diffraction",
    "unnatural_light_source",
};

namespace primitive {
inline constexpr int RigidBodyMotion = 0;
inline constexpr int Collision = 1;
inline constexpr int LiquidMotion = 2;
inline constexpr int GasMotion = 3;
inline constexpr int ElasticMotion = 4;
inline constexpr int Deformation = 5;
}  // namespace primitive

constexpr Domain domain_of(int primitive) {
    return primitive < 6 ? Domain::Dynamic : (primitive < 12 ? Domain::Thermodynamic : Domain::Optic);
}

using RichnessVector = std::array<double, kNumPrimitives>;

struct ScoreRecord {
    std::string video_id;
    double vqa = 1.0;
    int reality = 1;
    RichnessVector s{};
    std::vector<std::string> subject_phrases;
};

/// Throws InvalidArgument when any score is outside [1, 5].
void validate(const ScoreRecord& r);

}  // namespace jointvid::curation
