// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "common/video.hpp"
#include "curation/records.hpp"

namespace jointvid::world {

using Vec3 = Eigen::Vector3d;

enum class ObjectKind { RigidBall, ParticleFluid };

/// Scene classes double as the conditioning vocabulary of the generator.
enum class SceneClass : int { SingleBall = 0, TwoBalls = 1, ThreeBalls = 2, Fluid = 3 };
inline constexpr int kNumSceneClasses = 4;

std::string to_string(SceneClass c);
/// Number of separately detectable objects a clip of this class shows.
int expected_object_count(SceneClass c);

/// Flat render color of the object at `index` (scene object order). Saturated hues,
/// so they separate from the gray box walls.
std::array<float, 3> object_color(int index);
inline constexpr int kPaletteSize = 6;

struct ObjectSpec {
    ObjectKind kind = ObjectKind::RigidBall;
    double radius = 0.2;  // ball radius, or per-particle radius for fluids
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    int particles = 24;   // fluid only
    double spread = 0.3;  // fluid only: initial cluster half-size
};

/// Pinhole intrinsics. The camera sits at world (0, 0, -distance) looking
/// down +z; camera axes are X right, Y down, Z forward.
struct Camera {
    double fx = 51.2;
    double fy = 51.2;
    double cx = 31.5;
    double cy = 31.5;
    double distance = 3.0;

    Eigen::Vector2d project(const Vec3& p_cam) const {
        return {fx * p_cam.x() / p_cam.z() + cx, fy * p_cam.y() / p_cam.z() + cy};
    }
    Vec3 world_to_camera(const Vec3& p) const { return {p.x(), -p.y(), p.z() + distance}; }
    Vec3 camera_to_world(const Vec3& p) const { return {p.x(), -p.y(), p.z() - distance}; }

    /// Camera framing the box so its front face spans 80% of the image.
    static Camera framing(int height, int width, double box_extent = 1.0, double distance = 3.0);
};

struct SceneSpec {
    std::uint64_t seed = 0;
    SceneClass scene_class = SceneClass::SingleBall;
    std::vector<ObjectSpec> objects;
    Vec3 gravity = Vec3(0.0, -0.004, 0.0);  // units / frame^2
    double restitution = 0.9;
    double box_extent = 1.0;  // box is [-extent, extent]^3
    double fluid_damping = 0.05;
    Camera camera;
    int frames = 16;
    int height = 64;
    int width = 64;
    int track_points = 256;
};

/// Throws InvalidArgument on F < 2, non-positive radii, restitution outside
/// [0, 1], objects outside the box or overlapping rigid balls.
void validate(const SceneSpec& spec);

/// A rigid sub-body whose center is known every frame: a ball, or one particle
/// of a fluid. Tracks ride on parts.
struct Part {
    int label = 0;  // object label (1-based) the part belongs to
    double radius = 0.0;
    std::vector<Vec3> centers;  // camera frame, one per frame
};

struct Track {
    int id = 0;
    int label = 0;
    std::vector<Vec3> positions;  // camera frame, one per frame
};

struct SceneTruth {
    int frames = 0;
    int height = 0;
    int width = 0;
    std::vector<std::int32_t> masks;  // [F, H, W], 0 = background
    std::vector<float> pointmap;      // [3, F, H, W], camera-frame XYZ
    std::vector<Part> parts;
    std::vector<Track> tracks;
    curation::RichnessVector physics_labels{};
    int wall_impacts = 0;
    int ball_impacts = 0;
    double mean_frame_change = 0.0;  // mean |rgb(s+1) - rgb(s)| over pixels

    std::int32_t mask(int f, int y, int x) const {
        return masks[(std::size_t(f) * height + y) * width + x];
    }
    std::size_t pm_index(int c, int f, int y, int x) const {
        return ((std::size_t(c) * frames + f) * height + y) * width + x;
    }
    Vec3 point(int f, int y, int x) const {
        return {pointmap[pm_index(0, f, y, x)], pointmap[pm_index(1, f, y, x)],
                pointmap[pm_index(2, f, y, x)]};
    }
};

/// World-frame ball state as recorded per frame, used by the energy audits.
struct BodyState {
    Vec3 position;
    Vec3 velocity;
    double mass;
};

struct SimulationResult {
    Video video;
    SceneTruth truth;
    std::vector<std::vector<BodyState>> ball_states;  // [frame][ball]
};

SimulationResult simulate(const SceneSpec& spec);

/// Kinetic plus gravitational potential energy of the rigid balls.
double mechanical_energy(const std::vector<BodyState>& balls, const Vec3& gravity);

/// Follows frame-0 surface points through the clip by attaching each to the
/// nearest part of its object. This stands in for a 3D point tracker.
std::vector<Track> propagate_tracks(const SceneTruth& truth, std::span<const Vec3> points,
                                    std::span<const int> labels);

/// Synthetic stand-in for the VLM and VQA scorers: quality from inter-frame
/// change, reality fixed at 5, richness copied from the simulator labels.
curation::ScoreRecord score_record_from_truth(const SceneTruth& truth, const SceneSpec& spec,
                                              std::string video_id = {});

/// Randomized spec for a scene class; same (class, seed) gives the same spec.
SceneSpec random_scene(SceneClass cls, std::uint64_t seed, int frames = 16, int size = 64);

}  // namespace jointvid::world
