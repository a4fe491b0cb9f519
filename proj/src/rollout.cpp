#include "skillplan/rollout.hpp"

#include "skillplan/rng.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace skillplan::rollout {
namespace {

bool crosses(double before, double after) {
    return (before > 0.0 && after <= 0.0) || (before < 0.0 && after >= 0.0);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : v) {
        s += (x - mean) * (x - mean);
    }
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Routes the first `truth_stages` primitive calls to the simulator.
class SubstitutionEngine : public envs::SkillEngine {
public:
    SubstitutionEngine(envs::SkillEngine& truth, envs::SkillEngine& learned, int truth_stages)
        : truth_(truth), learned_(learned), remaining_(truth_stages) {}

    envs::SwingResult swing_to_bottom(double theta0) override { return pick().swing_to_bottom(theta0); }
    double hit(double m1, double m2, double e, double speed) override { return pick().hit(m1, m2, e, speed); }
    envs::FlightResult fly(double v_hor, double v_ver, double drop) override {
        return pick().fly(v_hor, v_ver, drop);
    }
    dynamics::Velocity2 bounce(double e, double wedge_angle, dynamics::Velocity2 incoming) override {
        return pick().bounce(e, wedge_angle, incoming);
    }
    envs::SlideResult slide(double v0, double friction, double limit) override {
        return pick().slide(v0, friction, limit);
    }

private:
    envs::SkillEngine& pick() {
        if (remaining_ > 0) {
            --remaining_;
            return truth_;
        }
        return learned_;
    }

    envs::SkillEngine& truth_;
    envs::SkillEngine& learned_;
    int remaining_;
};

}  // namespace

void ModelSet::put(pinn::PinnModel model) {
    const SkillKind kind = model.schema.kind;
    models_.insert_or_assign(kind, std::move(model));
}

const pinn::PinnModel& ModelSet::at(SkillKind kind) const {
    auto it = models_.find(kind);
    if (it == models_.end()) {
        throw std::invalid_argument("no trained model for skill '" + std::string(to_string(kind)) + "'");
    }
    return it->second;
}

void ModelSet::require_chain(const envs::TaskSpec& task) const {
    for (SkillKind k : task.chain()) {
        at(k);
    }
}

OutputEvent output_event(SkillKind skill, const dynamics::Event& event) {
    using dynamics::EventKind;
    switch (skill) {
        case SkillKind::Swing:
            if (event.kind == EventKind::PendulumBottom) {
                return {0, event.level};
            }
            break;
        case SkillKind::Slide:
            if (event.kind == EventKind::SlideStop) {
                return {1, 0.0};
            }
            if (event.kind == EventKind::GapEdge) {
                return {0, event.level};
            }
            break;
        case SkillKind::Throw:
            if (event.kind == EventKind::Landing || event.kind == EventKind::WedgeContact) {
                return {1, event.level};
            }
            break;
        default:
            break;
    }
    throw std::invalid_argument("event '" + std::string(dynamics::to_string(event.kind)) +
                                "' is not observable on " + std::string(to_string(skill)) + " outputs");
}

ScanResult scan_events(const pinn::PinnModel& model, const Eigen::VectorXd& fixed_inputs,
                       std::span<const OutputEvent> events, double t_max, int n_t) {
    const int ti = model.schema.time_input;
    if (ti < 0) {
        throw std::invalid_argument("scan_event needs a model with a time input");
    }
    if (n_t < 50) {
        throw std::invalid_argument("scan_event needs at least 50 grid points");
    }
    if (!(t_max > 0.0)) {
        throw std::invalid_argument("scan_event needs t_max > 0");
    }
    if (fixed_inputs.size() != model.schema.input_width() - 1) {
        throw std::invalid_argument("scan_event: expected " + std::to_string(model.schema.input_width() - 1) +
                                    " fixed inputs");
    }
    for (const OutputEvent& e : events) {
        if (e.output < 0 || e.output >= model.schema.output_width()) {
            throw std::invalid_argument("scan_event: event output index out of range");
        }
    }

    ScanResult result;
    result.grid_times = Eigen::VectorXd::LinSpaced(n_t, 0.0, t_max);
    Eigen::MatrixXd inputs(model.schema.input_width(), n_t);
    for (int r = 0, f = 0; r < model.schema.input_width(); ++r) {
        if (r == ti) {
            inputs.row(r) = result.grid_times.transpose();
        } else {
            inputs.row(r).setConstant(fixed_inputs[f++]);
        }
    }
    result.grid_outputs = model.predict(inputs);
    const Eigen::MatrixXd& y = result.grid_outputs;
    result.last_outputs = y.col(n_t - 1);

    for (int k = 1; k < n_t; ++k) {
        double best_alpha = 2.0;
        std::size_t best = events.size();
        for (std::size_t e = 0; e < events.size(); ++e) {
            const double before = y(events[e].output, k - 1) - events[e].level;
            const double after = y(events[e].output, k) - events[e].level;
            if (crosses(before, after)) {
                const double alpha = before / (before - after);
                if (alpha < best_alpha) {
                    best_alpha = alpha;
                    best = e;
                }
            }
        }
        if (best < events.size()) {
            ScanHit hit;
            hit.index = best;
            hit.time = result.grid_times[k - 1] + best_alpha * (result.grid_times[k] - result.grid_times[k - 1]);
            hit.outputs = y.col(k - 1) + best_alpha * (y.col(k) - y.col(k - 1));
            result.hit = std::move(hit);
            break;
        }
    }
    return result;
}

std::optional<ScanHit> scan_event(const pinn::PinnModel& model, const Eigen::VectorXd& fixed_inputs,
                                  const dynamics::Event& event, double t_max, int n_t) {
    const OutputEvent e = output_event(model.schema.kind, event);
    return scan_events(model, fixed_inputs, std::span<const OutputEvent>(&e, 1), t_max, n_t).hit;
}

PinnEngine::PinnEngine(const ModelSet& models, const dynamics::PhysParams& physics, ScanConfig config)
    : models_(models), physics_(physics), config_(config) {}

void PinnEngine::record(SkillKind skill, const ScanResult& scan) {
    if (trace_ != nullptr) {
        const double end = scan.hit ? scan.hit->time : scan.grid_times[scan.grid_times.size() - 1];
        for (Eigen::Index k = 0; k < scan.grid_times.size() && scan.grid_times[k] < end; ++k) {
            trace_->push_back({stage_, skill, scan.grid_times[k], scan.grid_outputs.col(k)});
        }
        if (scan.hit) {
            trace_->push_back({stage_, skill, scan.hit->time, scan.hit->outputs});
        }
    }
    ++stage_;
}

envs::SwingResult PinnEngine::swing_to_bottom(double theta0) {
    if (theta0 == 0.0) {
        ++stage_;
        return envs::SwingResult{true, 0.0, 0.0};
    }
    const pinn::PinnModel& m = models_.at(SkillKind::Swing);
    const OutputEvent bottom{0, 0.0};
    Eigen::VectorXd fixed(1);
    fixed << theta0;
    const ScanResult scan =
        scan_events(m, fixed, std::span<const OutputEvent>(&bottom, 1), m.schema.time_horizon(), config_.n_t);
    record(SkillKind::Swing, scan);
    if (!scan.hit) {
        return {};
    }
    return envs::SwingResult{true, scan.hit->time, scan.hit->outputs[1]};
}

double PinnEngine::hit(double mass_impactor, double mass_target, double restitution, double speed) {
    const pinn::PinnModel& m = models_.at(SkillKind::Hit);
    if (std::abs(m.physics.restitution - restitution) > 1e-9) {
        throw std::invalid_argument("hit model was trained for restitution " + std::to_string(m.physics.restitution));
    }
    Eigen::VectorXd in(3);
    in << mass_impactor, mass_target, speed;
    ++stage_;
    return m.predict_one(in)[0];
}

envs::FlightResult PinnEngine::fly(double v_hor, double v_ver, double drop) {
    const pinn::PinnModel& m = models_.at(SkillKind::Throw);
    const OutputEvent floor{1, -drop};
    Eigen::VectorXd fixed(2);
    fixed << v_hor, v_ver;
    const ScanResult scan =
        scan_events(m, fixed, std::span<const OutputEvent>(&floor, 1), m.schema.time_horizon(), config_.n_t);
    record(SkillKind::Throw, scan);
    if (!scan.hit) {
        return envs::FlightResult{false, m.schema.time_horizon(), scan.last_outputs[2], v_hor, scan.last_outputs[0]};
    }
    const Eigen::VectorXd& y = scan.hit->outputs;
    return envs::FlightResult{true, scan.hit->time, y[2], v_hor, y[0]};
}

dynamics::Velocity2 PinnEngine::bounce(double restitution, double wedge_angle, dynamics::Velocity2 incoming) {
    const pinn::PinnModel& m = models_.at(SkillKind::Bounce);
    Eigen::VectorXd in(4);
    in << restitution, wedge_angle, incoming.vertical, incoming.horizontal;
    const Eigen::VectorXd out = m.predict_one(in);
    ++stage_;
    return dynamics::Velocity2{out[1], out[0]};
}

envs::SlideResult PinnEngine::slide(double v0, double friction, double limit) {
    if (v0 <= 0.0) {
        ++stage_;
        return envs::SlideResult{true, true, 0.0, 0.0, 0.0};
    }
    const pinn::PinnModel& m = models_.at(SkillKind::Slide);
    Eigen::VectorXd fixed;
    if (m.schema.generalized()) {
        const auto pi = m.schema.parameter_input;
        const double lo = m.schema.input_box.lower[pi];
        const double hi = m.schema.input_box.upper[pi];
        const double mu = std::clamp(friction, lo, hi);
        out_of_domain_ = out_of_domain_ || mu != friction;
        fixed.resize(2);
        fixed << v0, mu;
    } else {
        if (std::abs(m.physics.friction - friction) > 1e-9) {
            throw std::invalid_argument("specialised slide model was trained for friction " +
                                        std::to_string(m.physics.friction) + ", asked for " +
                                        std::to_string(friction));
        }
        fixed.resize(1);
        fixed << v0;
    }
    const std::array<OutputEvent, 2> events{OutputEvent{1, 0.0}, OutputEvent{0, limit}};
    const std::size_t watched = std::isfinite(limit) ? 2 : 1;
    const ScanResult scan = scan_events(m, fixed, std::span<const OutputEvent>(events.data(), watched),
                                        m.schema.time_horizon(), config_.n_t);
    record(SkillKind::Slide, scan);
    if (!scan.hit) {
        return envs::SlideResult{false, false, m.schema.time_horizon(), scan.last_outputs[0], scan.last_outputs[1]};
    }
    const Eigen::VectorXd& y = scan.hit->outputs;
    const bool stopped = scan.hit->index == 0;
    return envs::SlideResult{true, stopped, scan.hit->time, y[0], stopped ? 0.0 : y[1]};
}

envs::Outcome pinn_rollout(const envs::TaskSpec& task, const envs::ActionSeq& action, const ModelSet& models,
                           ScanConfig config) {
    models.require_chain(task);
    PinnEngine engine(models, task.physics, config);
    return envs::run_chain(task, action, engine);
}

envs::Outcome pinn_rollout_substituted(const envs::TaskSpec& task, const envs::ActionSeq& action,
                                       const ModelSet& models, int truth_stages, ScanConfig config, double dt) {
    models.require_chain(task);
    PinnEngine learned(models, task.physics, config);
    envs::GroundTruthEngine truth(task.physics, dt);
    SubstitutionEngine engine(truth, learned, truth_stages);
    return envs::run_chain(task, action, engine);
}

void dump_trajectory(std::ostream& os, const envs::TaskSpec& task, const envs::ActionSeq& action,
                     const ModelSet& models, ScanConfig config) {
    models.require_chain(task);
    std::vector<TraceRow> trace;
    PinnEngine engine(models, task.physics, config);
    engine.record_to(&trace);
    envs::run_chain(task, action, engine);
    int width = 0;
    for (const TraceRow& r : trace) {
        width = std::max(width, static_cast<int>(r.outputs.size()));
    }
    os << "stage,skill,t";
    for (int i = 0; i < width; ++i) {
        os << ",out" << i;
    }
    os << '\n';
    os.precision(10);
    for (const TraceRow& r : trace) {
        os << r.stage << ',' << to_string(r.skill) << ',' << r.time;
        for (Eigen::Index i = 0; i < r.outputs.size(); ++i) {
            os << ',' << r.outputs[i];
        }
        for (auto i = r.outputs.size(); i < width; ++i) {
            os << ',';
        }
        os << '\n';
    }
}

BenchResult rollout_bench(const envs::TaskSpec& task, const ModelSet& models, int n_actions, double dt_fine,
                          std::uint64_t seed, ScanConfig config) {
    if (n_actions < 1) {
        throw std::invalid_argument("rollout_bench needs at least one action");
    }
    models.require_chain(task);
    std::mt19937_64 rng = substream(seed, "bench");
    std::vector<envs::ActionSeq> actions(static_cast<std::size_t>(n_actions));
    for (auto& a : actions) {
        for (const envs::SubAction& s : task.sub_actions) {
            a.push_back(std::uniform_real_distribution<double>(s.lower, s.upper)(rng));
        }
    }
    using clock = std::chrono::steady_clock;
    std::vector<double> pinn_times;
    std::vector<double> real_times;
    double sink = 0.0;
    for (const auto& a : actions) {
        auto t0 = clock::now();
        sink += pinn_rollout(task, a, models, config).reward;
        auto t1 = clock::now();
        sink += envs::real_rollout(task, a, seed, dt_fine).reward;
        auto t2 = clock::now();
        pinn_times.push_back(std::chrono::duration<double>(t1 - t0).count());
        real_times.push_back(std::chrono::duration<double>(t2 - t1).count());
    }
    if (!std::isfinite(sink)) {
        throw std::runtime_error("rollout_bench produced a non-finite reward");
    }
    BenchResult r;
    r.n_actions = n_actions;
    r.pinn_mean = mean_of(pinn_times);
    r.pinn_stddev = stddev_of(pinn_times, r.pinn_mean);
    r.real_mean = mean_of(real_times);
    r.real_stddev = stddev_of(real_times, r.real_mean);
    return r;
}

}  // namespace skillplan::rollout
