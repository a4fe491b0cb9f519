#pragma once

#include "skillplan/dynamics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace skillplan::envs {

enum class TaskKind { Launch, Slide, Bounce, Bridge };

std::string_view to_string(TaskKind kind);
TaskKind task_from_string(std::string_view name);
const std::vector<TaskKind>& all_tasks();

struct SubAction {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    std::string unit;
};

/// Scene constants. Distances in metres, angles in radians.
///
/// Launch and Slide: a pendulum of length `physics.length` swings in a
/// vertical plane at the chosen azimuth and strikes a ball (Launch, resting on
/// a pillar) or a puck (Slide, on the table) placed at the origin.
/// Bounce: a ball dropped onto a wedge whose contact point is at
/// `wedge_height` and x = 0; it then flies to the floor.
/// Bridge: as Slide, with a gap across the table between x = gap_start and
/// x = gap_start + gap_width that the puck only crosses on a bridge.
struct Geometry {
    double pillar_height = 1.0;
    double table_friction = 0.3;
    double bridge_friction = 0.5;
    double gap_start = 0.5;
    double gap_width = 0.4;
    double bridge_length = 0.6;
    double align_tolerance = 6.0 * kPi / 180.0;
    double wedge_height = 0.3;
    double hit_restitution = 0.9;
    double bounce_restitution = 0.8;
    double mass_bob = 1.0;
    double mass_ball = 0.5;
};

struct TaskSpec {
    std::string name;
    TaskKind kind = TaskKind::Launch;
    std::vector<SubAction> sub_actions;
    Eigen::Vector2d goal = Eigen::Vector2d::Zero();
    Geometry geometry;
    dynamics::PhysParams physics;
    double d_scale = 0.5;
    double landing_noise = 0.0;  // Gaussian sigma on the final position, seeded per rollout

    std::size_t action_dim() const { return sub_actions.size(); }
    /// Skills in chain order (Bridge lists slide once per surface).
    std::vector<SkillKind> chain() const;
    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;
    /// Canonical text form; equal specs give equal fingerprints.
    std::string fingerprint() const;
};

TaskSpec make_task(TaskKind kind);

/// Reads a task from a JSON file: {"task": "launch", "goal": [x, y],
/// "d_scale": ..., "landing_noise": ..., "geometry": {...}, "physics": {...},
/// "sub_actions": [{"name", "lower", "upper", "unit"}]}. Keys other than
/// "task" are optional and override the defaults of make_task.
TaskSpec load_task_file(const std::string& path);

using ActionSeq = std::vector<double>;

/// Throws std::invalid_argument unless `action` has one in-bounds value per
/// sub-action.
void check_action(const TaskSpec& task, const ActionSeq& action);

struct TraceEvent {
    dynamics::EventKind kind = dynamics::EventKind::Landing;
    double time = 0.0;  // time since the start of the stage that produced it
};

struct Outcome {
    Eigen::Vector2d final_position = Eigen::Vector2d::Zero();
    double distance = 0.0;
    double reward = 0.0;
    std::vector<TraceEvent> events;
    bool dead_end = false;  // the chain ended early (fell into the gap, missed event, ...)
};

double reward(double distance, double d_scale);

/// Normalised regret (r* - r) / r*, with r clamped to r*.
double regret(double best_achieved, double best_attainable);

// Skill primitives a task chain is built from. A ground-truth engine
// integrates the dynamics; a learned engine queries skill networks.

struct SwingResult {
    bool ok = false;
    double time = 0.0;
    double omega = 0.0;  // angular velocity when the bob reaches the bottom
};

struct FlightResult {
    bool ok = false;
    double time = 0.0;
    double x = 0.0;  // horizontal displacement from launch
    double v_hor = 0.0;
    double v_ver = 0.0;
};

struct SlideResult {
    bool ok = false;
    bool stopped = false;  // false: reached the distance limit still moving
    double time = 0.0;
    double distance = 0.0;
    double speed = 0.0;
};

class SkillEngine {
public:
    virtual ~SkillEngine() = default;
    /// Release from rest at theta0 until theta = 0.
    virtual SwingResult swing_to_bottom(double theta0) = 0;
    virtual double hit(double mass_impactor, double mass_target, double restitution, double speed) = 0;
    /// Projectile from the origin until its height drops by `drop`.
    virtual FlightResult fly(double v_hor, double v_ver, double drop) = 0;
    virtual dynamics::Velocity2 bounce(double restitution, double wedge_angle, dynamics::Velocity2 incoming) = 0;
    /// Slide from speed v0 until rest or until `limit` metres travelled.
    virtual SlideResult slide(double v0, double friction, double limit) = 0;
};

class GroundTruthEngine : public SkillEngine {
public:
    GroundTruthEngine(const dynamics::PhysParams& physics, double dt);

    SwingResult swing_to_bottom(double theta0) override;
    double hit(double mass_impactor, double mass_target, double restitution, double speed) override;
    FlightResult fly(double v_hor, double v_ver, double drop) override;
    dynamics::Velocity2 bounce(double restitution, double wedge_angle, dynamics::Velocity2 incoming) override;
    SlideResult slide(double v0, double friction, double limit) override;

private:
    dynamics::PhysParams physics_;
    double dt_;
};

/// Runs the task's skill chain on `engine` and scores the final position.
/// Noise is not applied here.
Outcome run_chain(const TaskSpec& task, const ActionSeq& action, SkillEngine& engine);

/// Ground-truth rollout. `seed` only drives the optional landing noise.
Outcome real_rollout(const TaskSpec& task, const ActionSeq& action, std::uint64_t seed, double dt = 1e-3);

struct BestAttainable {
    double reward = 0.0;
    ActionSeq action;
};

/// Maximum real reward over a uniform grid with `resolution` points per
/// sub-action (endpoints included). Results are cached per task and
/// resolution for the life of the process.
BestAttainable best_attainable(const TaskSpec& task, int resolution = 50);

}  // namespace skillplan::envs
