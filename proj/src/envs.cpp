#include "skillplan/envs.hpp"

#include "skillplan/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>

namespace skillplan::envs {
namespace {

constexpr double kDeg = kPi / 180.0;
constexpr double kFlightLimit = 10.0;  // s; every in-bounds flight lands well before this
constexpr double kSwingLimit = 5.0;

Eigen::Vector2d heading(double azimuth) {
    return {std::cos(azimuth), std::sin(azimuth)};
}

// Pendulum swing and hit shared by Launch, Slide and Bridge. Returns the
// struck object's speed, or nullopt if the swing never reaches the bottom.
std::optional<double> strike(const TaskSpec& task, double release_angle, SkillEngine& engine, Outcome& out) {
    const SwingResult swing = engine.swing_to_bottom(release_angle);
    if (!swing.ok) {
        return std::nullopt;
    }
    out.events.push_back({dynamics::EventKind::PendulumBottom, swing.time});
    const Geometry& g = task.geometry;
    const double bob_speed = task.physics.length * std::abs(swing.omega);
    return engine.hit(g.mass_bob, g.mass_ball, g.hit_restitution, bob_speed);
}

void record_slide(const SlideResult& s, Outcome& out) {
    if (s.ok) {
        out.events.push_back({s.stopped ? dynamics::EventKind::SlideStop : dynamics::EventKind::GapEdge, s.time});
    }
}

Eigen::Vector2d launch_chain(const TaskSpec& task, const ActionSeq& a, SkillEngine& engine, Outcome& out) {
    const auto speed = strike(task, a[1], engine, out);
    if (!speed) {
        out.dead_end = true;
        return Eigen::Vector2d::Zero();
    }
    const FlightResult flight = engine.fly(*speed, 0.0, task.geometry.pillar_height);
    if (flight.ok) {
        out.events.push_back({dynamics::EventKind::Landing, flight.time});
    } else {
        out.dead_end = true;
    }
    return flight.x * heading(a[0]);
}

Eigen::Vector2d slide_chain(const TaskSpec& task, const ActionSeq& a, SkillEngine& engine, Outcome& out) {
    const auto speed = strike(task, a[1], engine, out);
    if (!speed) {
        out.dead_end = true;
        return Eigen::Vector2d::Zero();
    }
    const SlideResult s = engine.slide(*speed, task.geometry.table_friction, std::numeric_limits<double>::infinity());
    record_slide(s, out);
    out.dead_end = !s.ok;
    return s.distance * heading(a[0]);
}

Eigen::Vector2d bounce_chain(const TaskSpec& task, const ActionSeq& a, SkillEngine& engine, Outcome& out) {
    const Geometry& g = task.geometry;
    const double wedge = a[0];
    const double drop = a[1];
    const FlightResult fall = engine.fly(0.0, 0.0, drop);
    if (!fall.ok) {
        out.dead_end = true;
        return {fall.x, 0.0};
    }
    out.events.push_back({dynamics::EventKind::WedgeContact, fall.time});
    const dynamics::Velocity2 exit = engine.bounce(g.bounce_restitution, wedge, {fall.v_hor, fall.v_ver});
    const FlightResult flight = engine.fly(exit.horizontal, exit.vertical, g.wedge_height);
    if (flight.ok) {
        out.events.push_back({dynamics::EventKind::Landing, flight.time});
    } else {
        out.dead_end = true;
    }
    return {fall.x + flight.x, 0.0};
}

Eigen::Vector2d bridge_chain(const TaskSpec& task, const ActionSeq& a, SkillEngine& engine, Outcome& out) {
    const Geometry& g = task.geometry;
    const double orientation = a[0];
    const double azimuth = a[1];
    const Eigen::Vector2d dir = heading(azimuth);
    const auto speed = strike(task, a[2], engine, out);
    if (!speed) {
        out.dead_end = true;
        return Eigen::Vector2d::Zero();
    }
    const double to_edge = g.gap_start / std::cos(azimuth);
    const SlideResult near = engine.slide(*speed, g.table_friction, to_edge);
    record_slide(near, out);
    if (!near.ok || near.stopped) {
        out.dead_end = !near.ok;
        return near.distance * dir;
    }
    const double crossing = g.gap_width / std::cos(azimuth);
    const bool aligned = std::abs(std::remainder(orientation - azimuth, 2.0 * kPi)) <= g.align_tolerance &&
                         g.bridge_length >= crossing;
    if (!aligned) {
        // Falls into the gap at the near edge.
        out.dead_end = true;
        return to_edge * dir;
    }
    const SlideResult on_bridge = engine.slide(near.speed, g.bridge_friction, crossing);
    record_slide(on_bridge, out);
    if (!on_bridge.ok || on_bridge.stopped) {
        out.dead_end = !on_bridge.ok;
        return (to_edge + on_bridge.distance) * dir;
    }
    const SlideResult far = engine.slide(on_bridge.speed, g.table_friction, std::numeric_limits<double>::infinity());
    record_slide(far, out);
    out.dead_end = !far.ok;
    return (to_edge + crossing + far.distance) * dir;
}

void write_geometry(std::ostream& os, const Geometry& g) {
    os << g.pillar_height << ' ' << g.table_friction << ' ' << g.bridge_friction << ' ' << g.gap_start << ' '
       << g.gap_width << ' ' << g.bridge_length << ' ' << g.align_tolerance << ' ' << g.wedge_height << ' '
       << g.hit_restitution << ' ' << g.bounce_restitution << ' ' << g.mass_bob << ' ' << g.mass_ball;
}

}  // namespace

std::string_view to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::Launch:
            return "launch";
        case TaskKind::Slide:
            return "slide";
        case TaskKind::Bounce:
            return "bounce";
        case TaskKind::Bridge:
            return "bridge";
    }
    return "unknown";
}

TaskKind task_from_string(std::string_view name) {
    for (TaskKind k : all_tasks()) {
        if (name == to_string(k)) {
            return k;
        }
    }
    throw std::invalid_argument("unknown task '" + std::string(name) + "' (expected launch, slide, bounce or bridge)");
}

const std::vector<TaskKind>& all_tasks() {
    static const std::vector<TaskKind> tasks{TaskKind::Launch, TaskKind::Slide, TaskKind::Bounce, TaskKind::Bridge};
    return tasks;
}

std::vector<SkillKind> TaskSpec::chain() const {
    switch (kind) {
        case TaskKind::Launch:
            return {SkillKind::Swing, SkillKind::Hit, SkillKind::Throw};
        case TaskKind::Slide:
            return {SkillKind::Swing, SkillKind::Hit, SkillKind::Slide};
        case TaskKind::Bounce:
            return {SkillKind::Throw, SkillKind::Bounce, SkillKind::Throw};
        case TaskKind::Bridge:
            return {SkillKind::Swing, SkillKind::Hit, SkillKind::Slide, SkillKind::Slide, SkillKind::Slide};
    }
    return {};
}

void TaskSpec::validate() const {
    physics.validate();
    if (sub_actions.empty()) {
        throw std::invalid_argument("task needs at least one sub-action");
    }
    for (const SubAction& s : sub_actions) {
        if (!(s.lower <= s.upper)) {
            throw std::invalid_argument("sub-action '" + s.name + "' has an empty interval");
        }
    }
    const std::size_t expected = kind == TaskKind::Bridge ? 3 : 2;
    if (sub_actions.size() != expected) {
        throw std::invalid_argument("task '" + name + "' expects " + std::to_string(expected) + " sub-actions");
    }
    if (!(d_scale > 0.0)) {
        throw std::invalid_argument("d_scale must be positive");
    }
    if (landing_noise < 0.0) {
        throw std::invalid_argument("landing_noise must be non-negative");
    }
    const Geometry& g = geometry;
    if (!(g.pillar_height > 0.0 && g.wedge_height > 0.0 && g.gap_start > 0.0 && g.gap_width > 0.0 &&
          g.bridge_length > 0.0 && g.mass_bob > 0.0 && g.mass_ball > 0.0)) {
        throw std::invalid_argument("geometry lengths and masses must be positive");
    }
    if (g.table_friction < 0.0 || g.bridge_friction < 0.0) {
        throw std::invalid_argument("friction coefficients must be non-negative");
    }
    if (g.hit_restitution < 0.0 || g.hit_restitution > 1.0 || g.bounce_restitution < 0.0 ||
        g.bounce_restitution > 1.0) {
        throw std::invalid_argument("restitution coefficients must lie in [0, 1]");
    }
    if (goal.norm() == 0.0) {
        throw std::invalid_argument("goal coincides with the start position");
    }
}

std::string TaskSpec::fingerprint() const {
    std::ostringstream os;
    os.precision(17);
    os << name << ' ' << to_string(kind) << " goal " << goal.x() << ' ' << goal.y() << " d " << d_scale << " noise "
       << landing_noise << " geom ";
    write_geometry(os, geometry);
    const auto& p = physics;
    os << " phys " << p.gravity << ' ' << p.length << ' ' << p.friction << ' ' << p.restitution << ' '
       << p.mass_impactor << ' ' << p.mass_target << ' ' << p.wedge_angle;
    for (const SubAction& s : sub_actions) {
        os << " [" << s.name << ' ' << s.lower << ' ' << s.upper << ']';
    }
    return os.str();
}

TaskSpec make_task(TaskKind kind) {
    TaskSpec t;
    t.kind = kind;
    t.name = std::string(to_string(kind));
    switch (kind) {
        case TaskKind::Launch:
            t.sub_actions = {{"azimuth", -kPi / 2.0, kPi / 2.0, "rad"}, {"release_angle", 0.1, kPi / 2.0, "rad"}};
            t.goal = {1.0, 0.45};
            break;
        case TaskKind::Slide:
            t.sub_actions = {{"azimuth", -kPi / 2.0, kPi / 2.0, "rad"}, {"release_angle", 0.1, kPi / 2.0, "rad"}};
            t.goal = {0.9, -0.3};
            break;
        case TaskKind::Bounce:
            t.sub_actions = {{"wedge_angle", 15.0 * kDeg, 75.0 * kDeg, "rad"}, {"drop_height", 0.2, 1.5, "m"}};
            t.goal = {1.2, 0.0};
            break;
        case TaskKind::Bridge:
            t.sub_actions = {{"bridge_orientation", -kPi / 4.0, kPi / 4.0, "rad"},
                             {"azimuth", -kPi / 4.0, kPi / 4.0, "rad"},
                             {"release_angle", 0.1, kPi / 2.0, "rad"}};
            t.goal = {1.4, 0.25};
            break;
    }
    t.physics.friction = t.geometry.table_friction;
    t.physics.restitution = t.geometry.bounce_restitution;
    t.physics.mass_impactor = t.geometry.mass_bob;
    t.physics.mass_target = t.geometry.mass_ball;
    return t;
}

TaskSpec load_task_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open task file '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("task file '" + path + "': " + e.what());
    }
    if (!j.contains("task")) {
        throw std::runtime_error("task file '" + path + "' lacks the \"task\" key");
    }
    TaskSpec t = make_task(task_from_string(j.at("task").get<std::string>()));
    t.name = j.value("name", t.name);
    if (j.contains("goal")) {
        const auto& g = j.at("goal");
        t.goal = {g.at(0).get<double>(), g.at(1).get<double>()};
    }
    t.d_scale = j.value("d_scale", t.d_scale);
    t.landing_noise = j.value("landing_noise", t.landing_noise);
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        Geometry& geo = t.geometry;
        geo.pillar_height = g.value("pillar_height", geo.pillar_height);
        geo.table_friction = g.value("table_friction", geo.table_friction);
        geo.bridge_friction = g.value("bridge_friction", geo.bridge_friction);
        geo.gap_start = g.value("gap_start", geo.gap_start);
        geo.gap_width = g.value("gap_width", geo.gap_width);
        geo.bridge_length = g.value("bridge_length", geo.bridge_length);
        geo.align_tolerance = g.value("align_tolerance", geo.align_tolerance);
        geo.wedge_height = g.value("wedge_height", geo.wedge_height);
        geo.hit_restitution = g.value("hit_restitution", geo.hit_restitution);
        geo.bounce_restitution = g.value("bounce_restitution", geo.bounce_restitution);
        geo.mass_bob = g.value("mass_bob", geo.mass_bob);
        geo.mass_ball = g.value("mass_ball", geo.mass_ball);
    }
    if (j.contains("physics")) {
        const auto& p = j.at("physics");
        t.physics.gravity = p.value("gravity", t.physics.gravity);
        t.physics.length = p.value("length", t.physics.length);
    }
    if (j.contains("sub_actions")) {
        t.sub_actions.clear();
        for (const auto& s : j.at("sub_actions")) {
            t.sub_actions.push_back({s.at("name").get<std::string>(), s.at("lower").get<double>(),
                                     s.at("upper").get<double>(), s.value("unit", std::string())});
        }
    }
    t.physics.friction = t.geometry.table_friction;
    t.physics.restitution = t.geometry.bounce_restitution;
    t.physics.mass_impactor = t.geometry.mass_bob;
    t.physics.mass_target = t.geometry.mass_ball;
    t.validate();
    return t;
}

void check_action(const TaskSpec& task, const ActionSeq& action) {
    if (action.size() != task.sub_actions.size()) {
        throw std::invalid_argument("action has " + std::to_string(action.size()) + " values, task '" + task.name +
                                    "' expects " + std::to_string(task.sub_actions.size()));
    }
    for (std::size_t i = 0; i < action.size(); ++i) {
        const SubAction& s = task.sub_actions[i];
        if (!(action[i] >= s.lower && action[i] <= s.upper)) {
            std::ostringstream msg;
            msg << "sub-action '" << s.name << "' = " << action[i] << " outside [" << s.lower << ", " << s.upper
                << "]";
            throw std::invalid_argument(msg.str());
        }
    }
}

double reward(double distance, double d_scale) {
    if (!(distance >= 0.0)) {
        throw std::invalid_argument("reward needs a non-negative distance");
    }
    if (!(d_scale > 0.0)) {
        throw std::invalid_argument("reward needs a positive distance scale");
    }
    return std::exp(-distance / d_scale);
}

double regret(double best_achieved, double best_attainable) {
    if (!(best_attainable > 0.0)) {
        throw std::invalid_argument("regret needs a positive attainable reward");
    }
    const double r = std::min(std::max(best_achieved, 0.0), best_attainable);
    return (best_attainable - r) / best_attainable;
}

GroundTruthEngine::GroundTruthEngine(const dynamics::PhysParams& physics, double dt) : physics_(physics), dt_(dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("time step must be positive");
    }
}

SwingResult GroundTruthEngine::swing_to_bottom(double theta0) {
    if (theta0 == 0.0) {
        return SwingResult{true, 0.0, 0.0};
    }
    const dynamics::Event bottom{dynamics::EventKind::PendulumBottom, 0.0};
    const auto hit = dynamics::integrate_until(SkillKind::Swing, {theta0, 0.0}, physics_, bottom, dt_, kSwingLimit);
    if (!hit) {
        return {};
    }
    return SwingResult{true, hit->time, hit->state[1]};
}

double GroundTruthEngine::hit(double mass_impactor, double mass_target, double restitution, double speed) {
    return dynamics::impulse_hit(mass_impactor, mass_target, restitution, speed);
}

FlightResult GroundTruthEngine::fly(double v_hor, double v_ver, double drop) {
    const dynamics::Event floor{dynamics::EventKind::Landing, -drop};
    const auto hit =
        dynamics::integrate_until(SkillKind::Throw, {0.0, 0.0, v_hor, v_ver}, physics_, floor, dt_, kFlightLimit);
    if (!hit) {
        return {};
    }
    const auto& s = hit->state;
    return FlightResult{true, hit->time, s[0], s[2], s[3]};
}

dynamics::Velocity2 GroundTruthEngine::bounce(double restitution, double wedge_angle, dynamics::Velocity2 incoming) {
    return dynamics::impulse_bounce(incoming, wedge_angle, restitution);
}

SlideResult GroundTruthEngine::slide(double v0, double friction, double limit) {
    if (v0 <= 0.0) {
        return SlideResult{true, true, 0.0, 0.0, 0.0};
    }
    dynamics::PhysParams p = physics_;
    p.friction = friction;
    const std::array<dynamics::Event, 2> events{dynamics::Event{dynamics::EventKind::SlideStop, 0.0},
                                                dynamics::Event{dynamics::EventKind::GapEdge, limit}};
    const std::size_t watched = std::isfinite(limit) ? 2 : 1;
    const double t_max = friction > 0.0 ? 2.0 * v0 / (friction * p.gravity) + 1.0 : kFlightLimit;
    const auto hit = dynamics::integrate_until_any(SkillKind::Slide, {0.0, v0}, p,
                                                   std::span<const dynamics::Event>(events.data(), watched), dt_, t_max);
    if (!hit) {
        // Frictionless and never reached the limit within the horizon.
        const auto end = dynamics::integrate_to(SkillKind::Slide, {0.0, v0}, p, t_max, dt_);
        return SlideResult{false, false, t_max, end[0], end[1]};
    }
    const auto& s = hit->crossing.state;
    return SlideResult{true, hit->index == 0, hit->crossing.time, s[0], s[1]};
}

Outcome run_chain(const TaskSpec& task, const ActionSeq& action, SkillEngine& engine) {
    check_action(task, action);
    Outcome out;
    switch (task.kind) {
        case TaskKind::Launch:
            out.final_position = launch_chain(task, action, engine, out);
            break;
        case TaskKind::Slide:
            out.final_position = slide_chain(task, action, engine, out);
            break;
        case TaskKind::Bounce:
            out.final_position = bounce_chain(task, action, engine, out);
            break;
        case TaskKind::Bridge:
            out.final_position = bridge_chain(task, action, engine, out);
            break;
    }
    out.distance = (out.final_position - task.goal).norm();
    out.reward = reward(out.distance, task.d_scale);
    return out;
}

Outcome real_rollout(const TaskSpec& task, const ActionSeq& action, std::uint64_t seed, double dt) {
    task.validate();
    GroundTruthEngine engine(task.physics, dt);
    Outcome out = run_chain(task, action, engine);
    if (task.landing_noise > 0.0) {
        std::mt19937_64 rng = substream(seed, "landing");
        std::normal_distribution<double> noise(0.0, task.landing_noise);
        out.final_position.x() += noise(rng);
        if (task.kind != TaskKind::Bounce) {
            out.final_position.y() += noise(rng);
        }
        out.distance = (out.final_position - task.goal).norm();
        out.reward = reward(out.distance, task.d_scale);
    }
    return out;
}

BestAttainable best_attainable(const TaskSpec& task, int resolution) {
    if (resolution < 2) {
        throw std::invalid_argument("best_attainable needs at least 2 grid points per sub-action");
    }
    static std::mutex mutex;
    static std::map<std::string, BestAttainable> cache;
    const std::string key = task.fingerprint() + " res " + std::to_string(resolution);
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) {
            return it->second;
        }
    }
    task.validate();
    // Noise-free: the optimum is a property of the scene, not of a draw.
    TaskSpec clean = task;
    clean.landing_noise = 0.0;
    const std::size_t n = clean.action_dim();
    std::vector<std::vector<double>> axes(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SubAction& s = clean.sub_actions[i];
        for (int k = 0; k < resolution; ++k) {
            const double v = s.lower + (s.upper - s.lower) * k / (resolution - 1);
            axes[i].push_back(k == resolution - 1 ? s.upper : v);
        }
    }
    BestAttainable best;
    std::vector<int> idx(n, 0);
    ActionSeq action(n);
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) {
            action[i] = axes[i][static_cast<std::size_t>(idx[i])];
        }
        const double r = real_rollout(clean, action, 0).reward;
        if (r > best.reward) {
            best.reward = r;
            best.action = action;
        }
        std::size_t d = 0;
        while (d < n && ++idx[d] == resolution) {
            idx[d] = 0;
            ++d;
        }
        if (d == n) {
            break;
        }
    }
    std::lock_guard<std::mutex> lock(mutex);
    cache.emplace(key, best);
    return best;
}

}  // namespace skillplan::envs
