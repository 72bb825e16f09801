// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "world/scene.hpp"

namespace jointvid::world {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kContactEps = 1e-9;
// Normal speeds below this after a wall bounce come to rest on the wall.
constexpr double kRestSpeed = 1e-3;
// A pair that keeps colliding this often within one frame is left alone for
// the rest of the frame (resting stacks would otherwise never terminate).
constexpr int kMaxPairEventsPerFrame = 200;
constexpr int kFluidSubsteps = 8;

constexpr std::array<std::array<float, 3>, kPaletteSize> kPalette = {{
    {0.90f, 0.15f, 0.15f},
    {0.15f, 0.80f, 0.20f},
    {0.20f, 0.30f, 0.95f},
    {0.95f, 0.85f, 0.10f},
    {0.10f, 0.85f, 0.90f},
    {0.90f, 0.20f, 0.85f},
}};

// Gray levels of the box faces; the region outside the box is darker.
constexpr float kBackWall = 0.55f;
constexpr float kFloor = 0.42f;
constexpr float kCeiling = 0.62f;
constexpr float kSideWall = 0.48f;
constexpr float kOutside = 0.08f;

struct Ball {
    Vec3 p0;
    Vec3 v0;
    double t0 = 0.0;
    Vec3 accel;
    std::array<int, 3> support{};  // -1 / +1 when resting on that wall, else 0
    double radius = 0.0;
    double mass = 0.0;
    int label = 0;

    Vec3 position(double t) const {
        const double dt = t - t0;
        return p0 + v0 * dt + 0.5 * accel * dt * dt;
    }
    Vec3 velocity(double t) const { return v0 + accel * (t - t0); }
    void rebase(double t) {
        p0 = position(t);
        v0 = velocity(t);
        t0 = t;
    }
};

struct Particle {
    Vec3 p;
    Vec3 v;
};

struct Fluid {
    int label = 0;
    double radius = 0.0;
    std::vector<Particle> particles;
};

// Smallest root in (0, horizon] of a*t^2 + b*t + c = 0 whose derivative sign
// matches `direction` (the crossing happens moving outward).
double first_crossing(double a, double b, double c, double horizon, double direction) {
    double best = kInf;
    auto consider = [&](double t) {
        if (t > 0.0 && t <= horizon && (2.0 * a * t + b) * direction > 0.0) best = std::min(best, t);
    };
    if (std::abs(a) < 1e-300) {
        if (b != 0.0) consider(-c / b);
        return best;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return best;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    if (q != 0.0) {
        consider(q / a);
        consider(c / q);
    } else {
        consider(0.0);
    }
    return best;
}

struct Event {
    double dt = kInf;
    int ball = -1;
    int other = -1;  // -1 for wall events
    int axis = -1;
    int side = 0;
};

class BallWorld {
public:
    BallWorld(std::vector<Ball> balls, const SceneSpec& spec)
        : balls_(std::move(balls)), gravity_(spec.gravity), restitution_(spec.restitution),
          extent_(spec.box_extent) {}

    // Advances from `now` to `until`, resolving every collision on the way.
    void advance(double now, double until) {
        pair_events_.assign(balls_.size() * balls_.size(), 0);
        double t = now;
        while (true) {
            const Event ev = next_event(t, until - t);
            if (ev.dt == kInf) break;
            t += ev.dt;
            if (ev.other < 0) {
                resolve_wall(ev, t);
            } else {
                resolve_pair(ev, t);
            }
        }
    }

    const std::vector<Ball>& balls() const { return balls_; }
    int wall_impacts() const { return wall_impacts_; }
    int ball_impacts() const { return ball_impacts_; }

private:
    Event next_event(double t, double horizon) {
        Event best;
        for (int i = 0; i < int(balls_.size()); ++i) {
            const Ball& b = balls_[i];
            const Vec3 p = b.position(t);
            const Vec3 v = b.velocity(t);
            const double bound = extent_ - b.radius;
            for (int k = 0; k < 3; ++k) {
                for (int side : {-1, 1}) {
                    const double wall = side * bound;
                    double dt;
                    if ((p[k] - wall) * side >= -kContactEps && v[k] * side > 0.0) {
                        dt = 0.0;
                    } else {
                        dt = first_crossing(0.5 * b.accel[k], v[k], p[k] - wall, horizon, side);
                    }
                    if (dt < best.dt) best = Event{dt, i, -1, k, side};
                }
            }
        }
        for (int i = 0; i < int(balls_.size()); ++i) {
            for (int j = i + 1; j < int(balls_.size()); ++j) {
                if (pair_events_[i * balls_.size() + j] >= kMaxPairEventsPerFrame) continue;
                const double dt = pair_contact(i, j, t, horizon);
                if (dt < best.dt) best = Event{dt, i, j, -1, 0};
            }
        }
        return best;
    }

    double pair_contact(int i, int j, double t, double horizon) const {
        const Ball& a = balls_[i];
        const Ball& b = balls_[j];
        const Vec3 dp = a.position(t) - b.position(t);
        const Vec3 dv = a.velocity(t) - b.velocity(t);
        const Vec3 da = a.accel - b.accel;
        const double reach = a.radius + b.radius;
        if (dp.norm() <= reach + kContactEps && dp.dot(dv) < 0.0) return 0.0;

        if (da.squaredNorm() < 1e-300) {
            // Relative motion is linear: |dp + dv t|^2 = reach^2.
            if (dp.dot(dv) >= 0.0) return kInf;
            const double qa = dv.squaredNorm();
            const double qb = 2.0 * dp.dot(dv);
            const double qc = dp.squaredNorm() - reach * reach;
            const double disc = qb * qb - 4.0 * qa * qc;
            if (disc < 0.0) return kInf;
            const double root = (2.0 * qc) / (-qb + std::sqrt(disc));
            return (root > 0.0 && root <= horizon) ? root : kInf;
        }

        // Relative motion is quadratic; scan for the first sign change of the
        // gap and bisect.
        auto gap = [&](double s) {
            const Vec3 d = dp + dv * s + 0.5 * da * s * s;
            return d.squaredNorm() - reach * reach;
        };
        constexpr int kScan = 64;
        double lo = 0.0;
        for (int k = 1; k <= kScan; ++k) {
            const double hi = horizon * k / kScan;
            if (gap(hi) <= 0.0) {
                double l = lo, h = hi;
                for (int it = 0; it < 80; ++it) {
                    const double m = 0.5 * (l + h);
                    (gap(m) <= 0.0 ? h : l) = m;
                }
                const Vec3 d = dp + dv * h + 0.5 * da * h * h;
                const Vec3 rel_v = dv + da * h;
                return d.dot(rel_v) < 0.0 ? h : kInf;
            }
            lo = hi;
        }
        return kInf;
    }

    void resolve_wall(const Event& ev, double t) {
        Ball& b = balls_[ev.ball];
        b.rebase(t);
        const int k = ev.axis;
        const double incoming = std::abs(b.v0[k]);
        b.p0[k] = ev.side * (extent_ - b.radius);
        b.v0[k] = -restitution_ * b.v0[k];
        if (incoming > 1e-4) ++wall_impacts_;
        if (std::abs(b.v0[k]) < kRestSpeed && gravity_[k] * ev.side > 0.0) {
            b.v0[k] = 0.0;
            b.support[k] = ev.side;
            b.accel[k] = 0.0;
        } else {
            b.support[k] = 0;
            b.accel[k] = gravity_[k];
        }
    }

    void resolve_pair(const Event& ev, double t) {
        Ball& a = balls_[ev.ball];
        Ball& b = balls_[ev.other];
        ++pair_events_[ev.ball * balls_.size() + ev.other];
        a.rebase(t);
        b.rebase(t);
        const Vec3 d = a.p0 - b.p0;
        const double dist = d.norm();
        if (dist == 0.0) return;
        const Vec3 n = d / dist;
        const double rel = (a.v0 - b.v0).dot(n);
        if (rel >= 0.0) return;
        const double impulse = -(1.0 + restitution_) * rel / (1.0 / a.mass + 1.0 / b.mass);
        a.v0 += (impulse / a.mass) * n;
        b.v0 -= (impulse / b.mass) * n;
        if (-rel > 1e-4) ++ball_impacts_;
        for (Ball* ball : {&a, &b}) {
            for (int k = 0; k < 3; ++k) {
                if (ball->support[k] != 0 && ball->v0[k] * ball->support[k] < 0.0) {
                    ball->support[k] = 0;
                    ball->accel[k] = gravity_[k];
                }
            }
        }
    }

    std::vector<Ball> balls_;
    Vec3 gravity_;
    double restitution_;
    double extent_;
    std::vector<int> pair_events_;
    int wall_impacts_ = 0;
    int ball_impacts_ = 0;
};

void step_fluid(Fluid& fluid, const SceneSpec& spec) {
    const double h = 1.0 / kFluidSubsteps;
    const double bound = spec.box_extent - fluid.radius;
    const double bounce = 0.3 * spec.restitution;
    for (int sub = 0; sub < kFluidSubsteps; ++sub) {
        for (Particle& q : fluid.particles) {
            q.v += spec.gravity * h;
            q.v *= (1.0 - spec.fluid_damping * h);
            q.p += q.v * h;
            for (int k = 0; k < 3; ++k) {
                if (q.p[k] > bound) {
                    q.p[k] = bound;
                    if (q.v[k] > 0.0) q.v[k] = -bounce * q.v[k];
                } else if (q.p[k] < -bound) {
                    q.p[k] = -bound;
                    if (q.v[k] < 0.0) q.v[k] = -bounce * q.v[k];
                }
            }
        }
    }
}

struct Sphere {
    Vec3 center;  // camera frame
    double radius;
    int label;
    int color;
};

// Nearest-hit rasterization of spheres plus the box interior behind them.
void render_frame(const SceneSpec& spec, const std::vector<Sphere>& spheres, int f, Video& video,
                  SceneTruth& truth) {
    const Camera& cam = spec.camera;
    const double e = spec.box_extent;
    const double z_front = cam.distance - e;
    const double z_back = cam.distance + e;
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            const Vec3 dir((x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0);
            double best = kInf;
            int hit = -1;
            for (int s = 0; s < int(spheres.size()); ++s) {
                const Vec3& c = spheres[s].center;
                const double qa = dir.squaredNorm();
                const double qb = -2.0 * dir.dot(c);
                const double qc = c.squaredNorm() - spheres[s].radius * spheres[s].radius;
                const double disc = qb * qb - 4.0 * qa * qc;
                if (disc < 0.0) continue;
                const double lambda = (-qb - std::sqrt(disc)) / (2.0 * qa);
                if (lambda > 0.0 && lambda < best) {
                    best = lambda;
                    hit = s;
                }
            }
            std::array<float, 3> rgb{};
            double lambda;
            int label = 0;
            if (hit >= 0) {
                lambda = best;
                label = spheres[hit].label;
                rgb = kPalette[spheres[hit].color % kPaletteSize];
            } else {
                // Slab test against the box; the visible surface is where the
                // ray leaves it.
                double t_enter = z_front, t_exit = z_back;
                int exit_axis = 2, exit_side = 1;
                for (int k = 0; k < 2; ++k) {
                    if (dir[k] == 0.0) continue;
                    const double t1 = -e / dir[k], t2 = e / dir[k];
                    const double lo = std::min(t1, t2), hi = std::max(t1, t2);
                    t_enter = std::max(t_enter, lo);
                    if (hi < t_exit) {
                        t_exit = hi;
                        exit_axis = k;
                        exit_side = dir[k] > 0.0 ? 1 : -1;
                    }
                }
                float gray;
                if (t_enter <= t_exit) {
                    lambda = t_exit;
                    if (exit_axis == 2) {
                        gray = kBackWall;
                    } else if (exit_axis == 1) {
                        gray = exit_side > 0 ? kFloor : kCeiling;  // camera Y points down
                    } else {
                        gray = kSideWall;
                    }
                } else {
                    lambda = z_back;
                    gray = kOutside;
                }
                rgb = {gray, gray, gray};
            }
            for (int c = 0; c < 3; ++c) {
                video.at(c, f, y, x) = rgb[c];
                truth.pointmap[truth.pm_index(c, f, y, x)] = float(lambda * dir[c]);
            }
            truth.masks[(std::size_t(f) * spec.height + y) * spec.width + x] = label;
        }
    }
}

double saturating_score(double amount, double scale) {
    return 1.0 + 4.0 * (1.0 - std::exp(-std::max(0.0, amount) / scale));
}

}  // namespace

std::array<float, 3> object_color(int index) { return kPalette[index % kPaletteSize]; }

std::string to_string(SceneClass c) {
    switch (c) {
        case SceneClass::SingleBall: return "single_ball";
        case SceneClass::TwoBalls: return "two_balls";
        case SceneClass::ThreeBalls: return "three_balls";
        case SceneClass::Fluid: return "fluid";
    }
    return "unknown";
}

int expected_object_count(SceneClass c) {
    switch (c) {
        case SceneClass::SingleBall: return 1;
        case SceneClass::TwoBalls: return 2;
        case SceneClass::ThreeBalls: return 3;
        case SceneClass::Fluid: return 1;
    }
    return 0;
}

Camera Camera::framing(int height, int width, double box_extent, double distance) {
    Camera cam;
    cam.distance = distance;
    const double front = distance - box_extent;
    cam.fx = 0.4 * width * front / box_extent;
    cam.fy = 0.4 * height * front / box_extent;
    cam.cx = 0.5 * (width - 1);
    cam.cy = 0.5 * (height - 1);
    return cam;
}

void validate(const SceneSpec& spec) {
    require(spec.frames >= 2, "scene needs at least 2 frames");
    require(spec.height > 0 && spec.width > 0, "image size must be positive");
    require(spec.restitution >= 0.0 && spec.restitution <= 1.0, "restitution must lie in [0, 1]");
    require(spec.box_extent > 0.0, "box extent must be positive");
    require(!spec.objects.empty(), "scene needs at least one object");
    require(spec.camera.distance > spec.box_extent, "camera must sit outside the box");
    require(spec.track_points >= 0, "track point count must be non-negative");
    for (const ObjectSpec& o : spec.objects) {
        require(o.radius > 0.0, "object radius must be positive");
        require(o.radius < spec.box_extent, "object radius must fit inside the box");
        require(o.kind != ObjectKind::ParticleFluid || o.particles >= 1,
                "fluid needs at least one particle");
        for (int k = 0; k < 3; ++k) {
            require(std::abs(o.position[k]) <= spec.box_extent - o.radius + 1e-12,
                    "object starts outside the box");
        }
    }
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        for (std::size_t j = i + 1; j < spec.objects.size(); ++j) {
            const ObjectSpec& a = spec.objects[i];
            const ObjectSpec& b = spec.objects[j];
            if (a.kind != ObjectKind::RigidBall || b.kind != ObjectKind::RigidBall) continue;
            if ((a.position - b.position).norm() < a.radius + b.radius) {
                fail(ErrorKind::InvalidArgument, "initial configuration has overlapping objects");
            }
        }
    }
}

double mechanical_energy(const std::vector<BodyState>& balls, const Vec3& gravity) {
    double e = 0.0;
    for (const BodyState& b : balls) {
        e += 0.5 * b.mass * b.velocity.squaredNorm() - b.mass * gravity.dot(b.position);
    }
    return e;
}

SimulationResult simulate(const SceneSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<Ball> balls;
    std::vector<Fluid> fluids;
    std::vector<int> color_of_label(spec.objects.size() + 1, 0);
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const ObjectSpec& o = spec.objects[i];
        const int label = int(i) + 1;
        color_of_label[label] = int(i);
        if (o.kind == ObjectKind::RigidBall) {
            Ball b;
            b.p0 = o.position;
            b.v0 = o.velocity;
            b.accel = spec.gravity;
            b.radius = o.radius;
            b.mass = o.radius * o.radius * o.radius;
            b.label = label;
            balls.push_back(b);
        } else {
            Fluid fl;
            fl.label = label;
            fl.radius = o.radius;
            std::uniform_real_distribution<double> off(-o.spread, o.spread);
            std::uniform_real_distribution<double> jitter(-0.01, 0.01);
            const double bound = spec.box_extent - o.radius;
            for (int q = 0; q < o.particles; ++q) {
                Particle p;
                for (int k = 0; k < 3; ++k) {
                    p.p[k] = std::clamp(o.position[k] + off(rng), -bound, bound);
                    p.v[k] = o.velocity[k] + jitter(rng);
                }
                fl.particles.push_back(p);
            }
            fluids.push_back(std::move(fl));
        }
    }

    SimulationResult out;
    out.video = Video(spec.frames, spec.height, spec.width);
    SceneTruth& truth = out.truth;
    truth.frames = spec.frames;
    truth.height = spec.height;
    truth.width = spec.width;
    truth.masks.assign(std::size_t(spec.frames) * spec.height * spec.width, 0);
    truth.pointmap.assign(std::size_t(3) * spec.frames * spec.height * spec.width, 0.0f);
    for (const Ball& b : balls) truth.parts.push_back(Part{b.label, b.radius, {}});
    for (const Fluid& fl : fluids) {
        for (std::size_t q = 0; q < fl.particles.size(); ++q) {
            truth.parts.push_back(Part{fl.label, fl.radius, {}});
        }
    }

    BallWorld ball_world(balls, spec);
    double ball_speed_sum = 0.0;
    double fluid_speed_sum = 0.0;
    std::size_t fluid_samples = 0;
    for (int f = 0; f < spec.frames; ++f) {
        if (f > 0) {
            ball_world.advance(double(f - 1), double(f));
            for (Fluid& fl : fluids) step_fluid(fl, spec);
        }
        std::vector<Sphere> spheres;
        std::vector<BodyState> states;
        std::size_t part = 0;
        for (const Ball& b : ball_world.balls()) {
            const Vec3 p = b.position(f);
            const Vec3 v = b.velocity(f);
            states.push_back(BodyState{p, v, b.mass});
            ball_speed_sum += v.norm();
            const Vec3 c = spec.camera.world_to_camera(p);
            truth.parts[part++].centers.push_back(c);
            spheres.push_back(Sphere{c, b.radius, b.label, color_of_label[b.label]});
        }
        for (const Fluid& fl : fluids) {
            for (const Particle& q : fl.particles) {
                const Vec3 c = spec.camera.world_to_camera(q.p);
                truth.parts[part++].centers.push_back(c);
                spheres.push_back(Sphere{c, fl.radius, fl.label, color_of_label[fl.label]});
                fluid_speed_sum += q.v.norm();
                ++fluid_samples;
            }
        }
        out.ball_states.push_back(std::move(states));
        render_frame(spec, spheres, f, out.video, truth);
    }
    truth.wall_impacts = ball_world.wall_impacts();
    truth.ball_impacts = ball_world.ball_impacts();

    double change = 0.0;
    const std::size_t plane = std::size_t(spec.height) * spec.width;
    for (int c = 0; c < 3; ++c) {
        for (int f = 1; f < spec.frames; ++f) {
            for (std::size_t i = 0; i < plane; ++i) {
                change += std::abs(out.video.data[(std::size_t(c) * spec.frames + f) * plane + i] -
                                   out.video.data[(std::size_t(c) * spec.frames + f - 1) * plane + i]);
            }
        }
    }
    truth.mean_frame_change = change / double(3 * (spec.frames - 1) * plane);

    // Simulator-derived primitive intensities: each observable is squashed
    // monotonically from [0, inf) onto [1, 5]. Unmodelled primitives stay at 1.
    auto& labels = truth.physics_labels;
    labels.fill(1.0);
    const double ball_speed =
        balls.empty() ? 0.0 : ball_speed_sum / double(balls.size() * spec.frames);
    const double fluid_speed = fluid_samples == 0 ? 0.0 : fluid_speed_sum / double(fluid_samples);
    const int impacts = truth.wall_impacts + 2 * truth.ball_impacts;
    labels[curation::primitive::RigidBodyMotion] = saturating_score(ball_speed, 0.05);
    labels[curation::primitive::Collision] = saturating_score(impacts, 4.0);
    labels[curation::primitive::LiquidMotion] = saturating_score(fluid_speed, 0.03);
    labels[curation::primitive::ElasticMotion] = saturating_score(spec.restitution * impacts, 4.0);

    // Ground-truth tracks: uniform frame-0 surface samples carried by parts.
    std::vector<std::size_t> masked;
    for (std::size_t i = 0; i < plane; ++i) {
        if (truth.masks[i] != 0) masked.push_back(i);
    }
    std::vector<std::size_t> chosen;
    std::sample(masked.begin(), masked.end(), std::back_inserter(chosen),
                std::min<std::size_t>(spec.track_points, masked.size()), rng);
    std::vector<Vec3> points;
    std::vector<int> point_labels;
    for (std::size_t i : chosen) {
        const int y = int(i / spec.width), x = int(i % spec.width);
        points.push_back(truth.point(0, y, x));
        point_labels.push_back(truth.masks[i]);
    }
    truth.tracks = propagate_tracks(truth, points, point_labels);
    return out;
}

std::vector<Track> propagate_tracks(const SceneTruth& truth, std::span<const Vec3> points,
                                    std::span<const int> labels) {
    require(points.size() == labels.size(), "points and labels must pair up");
    std::vector<Track> tracks;
    tracks.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Part* host = nullptr;
        double best = kInf;
        for (const Part& part : truth.parts) {
            if (part.label != labels[i]) continue;
            const double d = std::abs((points[i] - part.centers.front()).norm() - part.radius);
            if (d < best) {
                best = d;
                host = &part;
            }
        }
        require(host != nullptr, "track point label has no matching object");
        Track t{int(i), labels[i], {}};
        t.positions.reserve(host->centers.size());
        for (const Vec3& c : host->centers) t.positions.push_back(points[i] + (c - host->centers.front()));
        tracks.push_back(std::move(t));
    }
    return tracks;
}

curation::ScoreRecord score_record_from_truth(const SceneTruth& truth, const SceneSpec& spec,
                                              std::string video_id) {
    curation::ScoreRecord r;
    r.video_id = std::move(video_id);
    r.vqa = saturating_score(truth.mean_frame_change, 0.0005);
    r.reality = 5;
    r.s = truth.physics_labels;
    r.subject_phrases.push_back(to_string(spec.scene_class));
    return r;
}

SceneSpec random_scene(SceneClass cls, std::uint64_t seed, int frames, int size) {
    std::mt19937_64 rng(seed);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    SceneSpec spec;
    spec.seed = seed;
    spec.scene_class = cls;
    spec.frames = frames;
    spec.height = size;
    spec.width = size;
    spec.camera = Camera::framing(size, size, spec.box_extent);
    spec.gravity = Vec3(0.0, -uni(0.002, 0.006), 0.0);
    spec.restitution = uni(0.6, 1.0);

    auto random_velocity = [&](double speed) {
        return Vec3(uni(-speed, speed), uni(-speed, speed), uni(-speed, speed));
    };

    switch (cls) {
        case SceneClass::SingleBall: {
            ObjectSpec o;
            o.radius = uni(0.18, 0.26);
            const double b = spec.box_extent - o.radius;
            o.position = Vec3(uni(-b, b), uni(0.0, b), uni(-b, b));
            o.velocity = random_velocity(0.06);
            spec.objects.push_back(o);
            break;
        }
        case SceneClass::TwoBalls: {
            const double r = uni(0.18, 0.24);
            const double b = spec.box_extent - r;
            ObjectSpec left, right;
            left.radius = right.radius = r;
            left.position = Vec3(-0.5, uni(-0.2, 0.5), uni(-0.3, 0.3));
            right.position = Vec3(0.5, uni(-0.2, 0.5), uni(-0.3, 0.3));
            left.position = left.position.cwiseMax(-b).cwiseMin(b);
            right.position = right.position.cwiseMax(-b).cwiseMin(b);
            const double speed = uni(0.04, 0.08);
            left.velocity = Vec3(speed, uni(-0.01, 0.01), uni(-0.01, 0.01));
            right.velocity = Vec3(-speed, uni(-0.01, 0.01), uni(-0.01, 0.01));
            spec.objects = {left, right};
            break;
        }
        case SceneClass::ThreeBalls: {
            const double r = uni(0.16, 0.22);
            const double b = spec.box_extent - r;
            while (spec.objects.size() < 3) {
                ObjectSpec o;
                o.radius = r;
                o.position = Vec3(uni(-b, b), uni(-b, b), uni(-b, b));
                o.velocity = random_velocity(0.05);
                bool clear = true;
                for (const ObjectSpec& other : spec.objects) {
                    clear = clear && (other.position - o.position).norm() > 2.0 * r + 0.1;
                }
                if (clear) spec.objects.push_back(o);
            }
            break;
        }
        case SceneClass::Fluid: {
            ObjectSpec o;
            o.kind = ObjectKind::ParticleFluid;
            o.radius = 0.09;
            o.particles = 24;
            o.spread = 0.25;
            const double b = spec.box_extent - 0.4;
            o.position = Vec3(uni(-b, b), uni(0.2, 0.6), uni(-b, b));
            o.velocity = Vec3(uni(-0.03, 0.03), uni(-0.02, 0.0), uni(-0.03, 0.03));
            spec.objects.push_back(o);
            break;
        }
    }
    return spec;
}

}  // namespace jointvid::world
