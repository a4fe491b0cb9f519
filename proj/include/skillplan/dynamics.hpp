#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>

namespace skillplan {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

enum class SkillKind { Swing, Slide, Throw, Bounce, Hit };

std::string_view to_string(SkillKind kind);
SkillKind skill_from_string(std::string_view name);

namespace dynamics {

/// Small fixed-capacity state vector. Layouts by skill:
///   Swing: (theta, omega)
///   Slide: (x, v)
///   Throw: (x, y, v_hor, v_ver), y measured upward
class StateVec {
public:
    static constexpr std::size_t kCapacity = 4;

    StateVec() = default;
    StateVec(std::initializer_list<double> values);

    static StateVec zeros(std::size_t dim);

    std::size_t size() const { return dim_; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    bool all_finite() const;

    StateVec& operator+=(const StateVec& other);
    friend StateVec operator+(StateVec a, const StateVec& b) { return a += b; }
    friend StateVec operator*(double s, StateVec a);
    friend bool operator==(const StateVec& a, const StateVec& b);

private:
    std::array<double, kCapacity> data_{};
    std::size_t dim_ = 0;
};

struct PhysParams {
    double gravity = 9.81;
    double length = 0.6;         // pendulum length (m)
    double friction = 0.3;       // sliding friction coefficient
    double restitution = 0.8;
    double mass_impactor = 1.0;  // m1 (kg)
    double mass_target = 0.5;    // m2 (kg)
    double wedge_angle = kPi / 4.0;

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;
};

enum class EventKind { PendulumBottom, SlideStop, Landing, WedgeContact, GapEdge };

std::string_view to_string(EventKind kind);

/// An event is the first sign change of a scalar function of the state.
///   PendulumBottom: theta - level
///   SlideStop:      v
///   Landing, WedgeContact: y - level
///   GapEdge:        x - level
struct Event {
    EventKind kind = EventKind::Landing;
    double level = 0.0;
};

std::size_t state_dim(SkillKind skill);
bool event_observable(SkillKind skill, EventKind kind);
double event_value(SkillKind skill, const Event& event, const StateVec& state);

StateVec ode_rhs(SkillKind skill, const StateVec& state, const PhysParams& params);

/// Slide right-hand side with the friction direction supplied explicitly
/// (+1 decelerates motion along +x). Friction acts whenever direction != 0.
StateVec slide_rhs(const StateVec& state, const PhysParams& params, double direction);

/// One classical RK4 step. For Slide the friction direction is frozen at the
/// sign of the velocity at the start of the step and the puck is clamped to
/// rest if the step crosses v = 0. Throws std::runtime_error on divergence.
StateVec rk4_step(SkillKind skill, const StateVec& state, const PhysParams& params, double dt);

/// Integrates to exactly `t` with steps of at most `dt`.
StateVec integrate_to(SkillKind skill, StateVec state, const PhysParams& params, double t, double dt);

struct Crossing {
    double time = 0.0;
    StateVec state;
};

/// Steps with rk4_step until `event` first changes sign, then refines the
/// crossing by linear interpolation between the bracketing steps. Returns
/// std::nullopt when no crossing happens before t_max.
std::optional<Crossing> integrate_until(SkillKind skill, StateVec state, const PhysParams& params,
                                        const Event& event, double dt, double t_max);

struct EventHit {
    std::size_t index = 0;  // which of the supplied events fired first
    Crossing crossing;
};

/// Like integrate_until, watching several events at once and reporting the
/// earliest crossing.
std::optional<EventHit> integrate_until_any(SkillKind skill, StateVec state, const PhysParams& params,
                                           std::span<const Event> events, double dt, double t_max);

/// Target speed after a restitution impulse from an impactor of mass m1
/// moving at `impactor_speed` into a resting target of mass m2.
double impulse_hit(double mass_impactor, double mass_target, double restitution, double impactor_speed);

struct Velocity2 {
    double horizontal = 0.0;
    double vertical = 0.0;
};

/// Reflects an incoming velocity off a wedge face inclined at `wedge_angle`
/// from horizontal and descending towards +x. Face normal is
/// (sin a, cos a); the tangential component is kept and the normal component
/// is reversed and scaled by `restitution`.
Velocity2 impulse_bounce(Velocity2 incoming, double wedge_angle, double restitution);

/// Closed-form state at time t for Throw and Slide. Swing is rejected.
StateVec analytic_oracle(SkillKind skill, const StateVec& initial, const PhysParams& params, double t);

double pendulum_energy(const StateVec& state, const PhysParams& params);

/// Number of RK4 steps taken on the calling thread. Used to verify that
/// learned rollouts never touch the integrator.
std::uint64_t integration_steps();

}  // namespace dynamics
}  // namespace skillplan
