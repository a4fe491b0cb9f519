#pragma once

#include "skillplan/envs.hpp"
#include "skillplan/pinn.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace skillplan::rollout {

/// Trained skill models keyed by skill. A slide model may be specialised
/// (fixed friction) or generalised (friction as an input).
class ModelSet {
public:
    void put(pinn::PinnModel model);
    bool has(SkillKind kind) const { return models_.count(kind) != 0; }
    const pinn::PinnModel& at(SkillKind kind) const;
    /// Throws std::invalid_argument naming the first skill of the task's
    /// chain without a model.
    void require_chain(const envs::TaskSpec& task) const;
    const std::map<SkillKind, pinn::PinnModel>& all() const { return models_; }

private:
    std::map<SkillKind, pinn::PinnModel> models_;
};

/// Event on a model output: fires where outputs[output] - level changes sign.
struct OutputEvent {
    int output = 0;
    double level = 0.0;
};

/// Output index an event kind watches for a skill (e.g. Landing -> y for throw).
OutputEvent output_event(SkillKind skill, const dynamics::Event& event);

struct ScanHit {
    std::size_t index = 0;     // which event fired
    double time = 0.0;
    Eigen::VectorXd outputs;   // interpolated at `time`
};

struct ScanResult {
    std::optional<ScanHit> hit;
    Eigen::VectorXd last_outputs;   // at t_max, for the no-event case
    Eigen::MatrixXd grid_outputs;   // outputs at each grid time (columns)
    Eigen::VectorXd grid_times;
};

/// Evaluates the model on n_t uniformly spaced times in [0, t_max] with the
/// other inputs fixed (`fixed_inputs` lists them in schema order, skipping
/// t_query), finds the first sign change of any event function and refines it
/// by linear interpolation.
ScanResult scan_events(const pinn::PinnModel& model, const Eigen::VectorXd& fixed_inputs,
                       std::span<const OutputEvent> events, double t_max, int n_t = 200);

/// Single-event convenience form; std::nullopt means no event in [0, t_max].
std::optional<ScanHit> scan_event(const pinn::PinnModel& model, const Eigen::VectorXd& fixed_inputs,
                                  const dynamics::Event& event, double t_max, int n_t = 200);

struct ScanConfig {
    int n_t = 200;
};

/// One sampled point of a learned trajectory, for plotting.
struct TraceRow {
    int stage = 0;
    SkillKind skill = SkillKind::Swing;
    double time = 0.0;
    Eigen::VectorXd outputs;
};

/// Skill engine backed by trained networks. Never touches the integrator.
class PinnEngine : public envs::SkillEngine {
public:
    PinnEngine(const ModelSet& models, const dynamics::PhysParams& physics, ScanConfig config = {});

    envs::SwingResult swing_to_bottom(double theta0) override;
    double hit(double mass_impactor, double mass_target, double restitution, double speed) override;
    envs::FlightResult fly(double v_hor, double v_ver, double drop) override;
    dynamics::Velocity2 bounce(double restitution, double wedge_angle, dynamics::Velocity2 incoming) override;
    envs::SlideResult slide(double v0, double friction, double limit) override;

    /// When set, every scan appends its grid (up to the event) to `trace`.
    void record_to(std::vector<TraceRow>* trace) { trace_ = trace; }
    /// True once a generalised model was queried outside its parameter range.
    bool out_of_domain() const { return out_of_domain_; }

private:
    void record(SkillKind skill, const ScanResult& scan);

    const ModelSet& models_;
    dynamics::PhysParams physics_;
    ScanConfig config_;
    std::vector<TraceRow>* trace_ = nullptr;
    int stage_ = 0;
    bool out_of_domain_ = false;
};

/// Predicted outcome of `action` from the cascaded skill networks.
envs::Outcome pinn_rollout(const envs::TaskSpec& task, const envs::ActionSeq& action, const ModelSet& models,
                           ScanConfig config = {});

/// Cascade where the first `truth_stages` skill calls use the ground-truth
/// simulator and the rest use the networks. Used to localise where cascade
/// error accumulates.
envs::Outcome pinn_rollout_substituted(const envs::TaskSpec& task, const envs::ActionSeq& action,
                                       const ModelSet& models, int truth_stages, ScanConfig config = {},
                                       double dt = 1e-3);

/// Writes the learned trajectory of every stage as CSV:
/// stage,skill,t,out0,out1,...
void dump_trajectory(std::ostream& os, const envs::TaskSpec& task, const envs::ActionSeq& action,
                     const ModelSet& models, ScanConfig config = {});

struct BenchResult {
    int n_actions = 0;
    double pinn_mean = 0.0;  // seconds per rollout
    double pinn_stddev = 0.0;
    double real_mean = 0.0;
    double real_stddev = 0.0;
    double speedup() const { return real_mean / pinn_mean; }
};

/// Times pinn_rollout and real_rollout (at dt_fine) on the same uniformly
/// drawn actions.
BenchResult rollout_bench(const envs::TaskSpec& task, const ModelSet& models, int n_actions, double dt_fine,
                          std::uint64_t seed, ScanConfig config = {});

}  // namespace skillplan::rollout
