#include "skillplan/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace skillplan {

std::string_view to_string(SkillKind kind) {
    switch (kind) {
        case SkillKind::Swing:
            return "swing";
        case SkillKind::Slide:
            return "slide";
        case SkillKind::Throw:
            return "throw";
        case SkillKind::Bounce:
            return "bounce";
        case SkillKind::Hit:
            return "hit";
    }
    return "unknown";
}

SkillKind skill_from_string(std::string_view name) {
    for (SkillKind kind : {SkillKind::Swing, SkillKind::Slide, SkillKind::Throw, SkillKind::Bounce, SkillKind::Hit}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw std::invalid_argument("unknown skill '" + std::string(name) + "'");
}

namespace dynamics {
namespace {

thread_local std::uint64_t g_step_count = 0;

double sign_of(double v) {
    if (v > 0.0) {
        return 1.0;
    }
    if (v < 0.0) {
        return -1.0;
    }
    return 0.0;
}

template <typename Rhs>
StateVec rk4(const StateVec& s, double dt, Rhs&& rhs) {
    const StateVec k1 = rhs(s);
    const StateVec k2 = rhs(s + (0.5 * dt) * k1);
    const StateVec k3 = rhs(s + (0.5 * dt) * k2);
    const StateVec k4 = rhs(s + dt * k3);
    StateVec out = s;
    out += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return out;
}

// Slide step with the friction direction frozen over the step. No clamping.
StateVec slide_step_raw(const StateVec& s, const PhysParams& p, double dt) {
    const double dir = sign_of(s[1]);
    return rk4(s, dt, [&](const StateVec& x) { return slide_rhs(x, p, dir); });
}

StateVec slide_rest_state(const StateVec& s, const PhysParams& p) {
    const double dir = sign_of(s[1]);
    const double decel = p.friction * p.gravity;
    return StateVec{s[0] + dir * s[1] * s[1] / (2.0 * decel), 0.0};
}

bool crossed_zero(double before, double after) {
    return (after == 0.0) || (std::signbit(before) != std::signbit(after));
}

void require_skill_state(SkillKind skill, const StateVec& state) {
    if (state.size() != state_dim(skill)) {
        throw std::invalid_argument("state dimension does not match skill " + std::string(to_string(skill)));
    }
}

}  // namespace

StateVec::StateVec(std::initializer_list<double> values) {
    if (values.size() > kCapacity) {
        throw std::invalid_argument("StateVec supports at most 4 components");
    }
    std::copy(values.begin(), values.end(), data_.begin());
    dim_ = values.size();
}

StateVec StateVec::zeros(std::size_t dim) {
    if (dim > kCapacity) {
        throw std::invalid_argument("StateVec supports at most 4 components");
    }
    StateVec s;
    s.dim_ = dim;
    return s;
}

bool StateVec::all_finite() const {
    for (std::size_t i = 0; i < dim_; ++i) {
        if (!std::isfinite(data_[i])) {
            return false;
        }
    }
    return true;
}

StateVec& StateVec::operator+=(const StateVec& other) {
    for (std::size_t i = 0; i < dim_; ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

StateVec operator*(double s, StateVec a) {
    for (std::size_t i = 0; i < a.dim_; ++i) {
        a.data_[i] *= s;
    }
    return a;
}

bool operator==(const StateVec& a, const StateVec& b) {
    if (a.dim_ != b.dim_) {
        return false;
    }
    for (std::size_t i = 0; i < a.dim_; ++i) {
        if (a.data_[i] != b.data_[i]) {
            return false;
        }
    }
    return true;
}

void PhysParams::validate() const {
    if (!(gravity > 0.0)) {
        throw std::invalid_argument("gravity must be positive");
    }
    if (!(length > 0.0)) {
        throw std::invalid_argument("pendulum length must be positive");
    }
    if (!(friction >= 0.0)) {
        throw std::invalid_argument("friction coefficient must be non-negative");
    }
    if (!(restitution >= 0.0 && restitution <= 1.0)) {
        throw std::invalid_argument("restitution must lie in [0, 1]");
    }
    if (!(mass_impactor > 0.0 && mass_target > 0.0)) {
        throw std::invalid_argument("masses must be positive");
    }
    if (!(wedge_angle > 0.0 && wedge_angle < kPi / 2.0)) {
        throw std::invalid_argument("wedge angle must lie in (0, pi/2)");
    }
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::PendulumBottom:
            return "pendulum_bottom";
        case EventKind::SlideStop:
            return "slide_stop";
        case EventKind::Landing:
            return "landing";
        case EventKind::WedgeContact:
            return "wedge_contact";
        case EventKind::GapEdge:
            return "gap_edge";
    }
    return "unknown";
}

std::size_t state_dim(SkillKind skill) {
    switch (skill) {
        case SkillKind::Swing:
        case SkillKind::Slide:
            return 2;
        case SkillKind::Throw:
            return 4;
        case SkillKind::Bounce:
        case SkillKind::Hit:
            break;
    }
    throw std::invalid_argument("skill " + std::string(to_string(skill)) + " has no governing ODE");
}

bool event_observable(SkillKind skill, EventKind kind) {
    switch (kind) {
        case EventKind::PendulumBottom:
            return skill == SkillKind::Swing;
        case EventKind::SlideStop:
        case EventKind::GapEdge:
            return skill == SkillKind::Slide;
        case EventKind::Landing:
        case EventKind::WedgeContact:
            return skill == SkillKind::Throw;
    }
    return false;
}

double event_value(SkillKind skill, const Event& event, const StateVec& state) {
    if (!event_observable(skill, event.kind)) {
        throw std::invalid_argument("event " + std::string(to_string(event.kind)) + " is not observable for skill " +
                                    std::string(to_string(skill)));
    }
    switch (event.kind) {
        case EventKind::PendulumBottom:
            return state[0] - event.level;
        case EventKind::SlideStop:
            return state[1];
        case EventKind::Landing:
        case EventKind::WedgeContact:
            return state[1] - event.level;
        case EventKind::GapEdge:
            return state[0] - event.level;
    }
    return 0.0;
}

StateVec slide_rhs(const StateVec& state, const PhysParams& params, double direction) {
    return StateVec{state[1], -direction * params.friction * params.gravity};
}

StateVec ode_rhs(SkillKind skill, const StateVec& state, const PhysParams& params) {
    require_skill_state(skill, state);
    switch (skill) {
        case SkillKind::Swing:
            return StateVec{state[1], -(params.gravity / params.length) * std::sin(state[0])};
        case SkillKind::Slide:
            return slide_rhs(state, params, sign_of(state[1]));
        case SkillKind::Throw:
            return StateVec{state[2], state[3], 0.0, -params.gravity};
        case SkillKind::Bounce:
        case SkillKind::Hit:
            break;
    }
    throw std::invalid_argument("skill has no governing ODE");
}

namespace {

// Advances one step and also reports the unclamped Slide state, which is what
// event bracketing interpolates on.
StateVec step_with_raw(SkillKind skill, const StateVec& state, const PhysParams& params, double dt, StateVec& raw) {
    ++g_step_count;
    StateVec next;
    if (skill == SkillKind::Slide) {
        raw = slide_step_raw(state, params, dt);
        next = raw;
        if (state[1] != 0.0 && crossed_zero(state[1], raw[1])) {
            next = slide_rest_state(state, params);
        }
    } else {
        next = rk4(state, dt, [&](const StateVec& s) { return ode_rhs(skill, s, params); });
        raw = next;
    }
    if (!next.all_finite()) {
        throw std::runtime_error("rk4_step diverged (non-finite state)");
    }
    return next;
}

}  // namespace

StateVec rk4_step(SkillKind skill, const StateVec& state, const PhysParams& params, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("rk4_step requires dt > 0");
    }
    require_skill_state(skill, state);
    StateVec raw;
    return step_with_raw(skill, state, params, dt, raw);
}

StateVec integrate_to(SkillKind skill, StateVec state, const PhysParams& params, double t, double dt) {
    if (t < 0.0) {
        throw std::invalid_argument("integrate_to requires t >= 0");
    }
    double elapsed = 0.0;
    while (t - elapsed > 1e-15) {
        const double h = std::min(dt, t - elapsed);
        state = rk4_step(skill, state, params, h);
        elapsed += h;
    }
    return state;
}

std::optional<EventHit> integrate_until_any(SkillKind skill, StateVec state, const PhysParams& params,
                                           std::span<const Event> events, double dt, double t_max) {
    if (!(t_max > 0.0) || !(dt > 0.0)) {
        throw std::invalid_argument("integrate_until requires dt > 0 and t_max > 0");
    }
    if (events.empty()) {
        throw std::invalid_argument("integrate_until needs at least one event");
    }
    require_skill_state(skill, state);
    std::array<double, 8> previous{};
    if (events.size() > previous.size()) {
        throw std::invalid_argument("integrate_until supports at most 8 simultaneous events");
    }
    for (std::size_t k = 0; k < events.size(); ++k) {
        previous[k] = event_value(skill, events[k], state);
    }
    double t = 0.0;
    const bool slide = skill == SkillKind::Slide;
    while (t < t_max) {
        const double h = std::min(dt, t_max - t);
        // Slide brackets on the unclamped step so the zero crossing of v
        // interpolates exactly; the clamped state is what carries forward.
        StateVec raw;
        const StateVec next = step_with_raw(skill, state, params, h, raw);
        std::size_t first = events.size();
        double first_alpha = 2.0;
        for (std::size_t k = 0; k < events.size(); ++k) {
            const double value = event_value(skill, events[k], raw);
            if (previous[k] != 0.0 && crossed_zero(previous[k], value)) {
                const double alpha = previous[k] / (previous[k] - value);
                if (alpha < first_alpha) {
                    first_alpha = alpha;
                    first = k;
                }
            }
        }
        if (first < events.size()) {
            StateVec at = state;
            for (std::size_t i = 0; i < at.size(); ++i) {
                at[i] += first_alpha * (raw[i] - state[i]);
            }
            if (slide && events[first].kind == EventKind::SlideStop) {
                at[1] = 0.0;
            }
            return EventHit{first, Crossing{t + first_alpha * h, at}};
        }
        for (std::size_t k = 0; k < events.size(); ++k) {
            previous[k] = event_value(skill, events[k], next);
        }
        state = next;
        t += h;
        if (slide && state[1] == 0.0) {
            // At rest: nothing further can change.
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<Crossing> integrate_until(SkillKind skill, StateVec state, const PhysParams& params,
                                        const Event& event, double dt, double t_max) {
    const auto hit = integrate_until_any(skill, state, params, std::span<const Event>(&event, 1), dt, t_max);
    if (!hit) {
        return std::nullopt;
    }
    return hit->crossing;
}

double impulse_hit(double mass_impactor, double mass_target, double restitution, double impactor_speed) {
    if (!(mass_impactor > 0.0 && mass_target > 0.0)) {
        throw std::invalid_argument("impulse_hit requires positive masses");
    }
    if (!(restitution >= 0.0 && restitution <= 1.0)) {
        throw std::invalid_argument("impulse_hit requires restitution in [0, 1]");
    }
    return (1.0 + restitution) * mass_impactor * impactor_speed / (mass_impactor + mass_target);
}

Velocity2 impulse_bounce(Velocity2 incoming, double wedge_angle, double restitution) {
    if (!(restitution >= 0.0 && restitution <= 1.0)) {
        throw std::invalid_argument("impulse_bounce requires restitution in [0, 1]");
    }
    const double s = std::sin(wedge_angle);
    const double c = std::cos(wedge_angle);
    // n = (s, c), t = (c, -s)
    const double vn = incoming.horizontal * s + incoming.vertical * c;
    const double vt = incoming.horizontal * c - incoming.vertical * s;
    if (vn >= 0.0) {
        throw std::invalid_argument("impulse_bounce: velocity is separating from the wedge face");
    }
    const double vn_out = -restitution * vn;
    return Velocity2{vt * c + vn_out * s, -vt * s + vn_out * c};
}

StateVec analytic_oracle(SkillKind skill, const StateVec& initial, const PhysParams& params, double t) {
    if (t < 0.0) {
        throw std::invalid_argument("analytic_oracle requires t >= 0");
    }
    switch (skill) {
        case SkillKind::Throw: {
            require_skill_state(skill, initial);
            const double g = params.gravity;
            return StateVec{initial[0] + initial[2] * t, initial[1] + initial[3] * t - 0.5 * g * t * t, initial[2],
                            initial[3] - g * t};
        }
        case SkillKind::Slide: {
            require_skill_state(skill, initial);
            const double v0 = initial[1];
            const double decel = params.friction * params.gravity;
            if (v0 == 0.0) {
                return initial;
            }
            const double dir = sign_of(v0);
            if (decel > 0.0) {
                const double t_stop = std::abs(v0) / decel;
                if (t >= t_stop) {
                    return StateVec{initial[0] + dir * v0 * v0 / (2.0 * decel), 0.0};
                }
            }
            return StateVec{initial[0] + v0 * t - 0.5 * dir * decel * t * t, v0 - dir * decel * t};
        }
        case SkillKind::Swing:
            throw std::invalid_argument("analytic_oracle: the pendulum has no elementary closed form");
        case SkillKind::Bounce:
        case SkillKind::Hit:
            break;
    }
    throw std::invalid_argument("analytic_oracle: skill has no trajectory");
}

double pendulum_energy(const StateVec& state, const PhysParams& params) {
    const double l = params.length;
    return 0.5 * l * l * state[1] * state[1] - params.gravity * l * std::cos(state[0]);
}

std::uint64_t integration_steps() { return g_step_count; }

}  // namespace dynamics
}  // namespace skillplan
