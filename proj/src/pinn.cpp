#include "skillplan/pinn.hpp"

#include "skillplan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace skillplan::pinn {
namespace {

Box make_box(std::initializer_list<double> lower, std::initializer_list<double> upper) {
    Box box;
    box.lower = Eigen::Map<const Eigen::VectorXd>(lower.begin(), static_cast<Eigen::Index>(lower.size()));
    box.upper = Eigen::Map<const Eigen::VectorXd>(upper.begin(), static_cast<Eigen::Index>(upper.size()));
    return box;
}

void set_physics_constant(dynamics::PhysParams& params, const std::string& name, double value) {
    if (name == "friction") {
        params.friction = value;
    } else if (name == "length") {
        params.length = value;
    } else if (name == "gravity") {
        params.gravity = value;
    } else {
        throw std::invalid_argument("unknown physical constant '" + name + "'");
    }
}

// Residual R = dP/dt - G(P) in physical units. P: predicted state (outputs x
// N), D: its time derivative, inputs: physical collocation inputs (a
// generalised slide model reads friction from them).
Eigen::MatrixXd ode_residual(const SkillSchema& schema, const dynamics::PhysParams& phys, const Eigen::MatrixXd& P,
                             const Eigen::MatrixXd& D, const Eigen::MatrixXd& inputs) {
    const double g = phys.gravity;
    Eigen::MatrixXd R(P.rows(), P.cols());
    switch (schema.kind) {
        case SkillKind::Swing:
            R.row(0) = D.row(0) - P.row(1);
            R.row(1) = D.row(1).array() + (g / phys.length) * P.row(0).array().sin();
            break;
        case SkillKind::Slide:
            R.row(0) = D.row(0) - P.row(1);
            if (schema.parameter_input >= 0) {
                R.row(1) = D.row(1).array() + g * inputs.row(schema.parameter_input).array();
            } else {
                R.row(1) = D.row(1).array() + phys.friction * g;
            }
            break;
        case SkillKind::Throw:
            R.row(0) = D.row(0).array() + g;
            R.row(1) = D.row(1) - P.row(0);
            R.row(2) = D.row(2) - inputs.row(0);
            break;
        default:
            throw std::invalid_argument("skill has no governing ODE");
    }
    return R;
}

// J_G^T Q where G is the right-hand side as a function of the state.
Eigen::MatrixXd rhs_jacobian_t(const SkillSchema& schema, const dynamics::PhysParams& phys, const Eigen::MatrixXd& P,
                               const Eigen::MatrixXd& Q) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(P.rows(), P.cols());
    switch (schema.kind) {
        case SkillKind::Swing:
            // G = (omega, -(g/l) sin theta)
            out.row(0) = -(phys.gravity / phys.length) * (P.row(0).array().cos() * Q.row(1).array());
            out.row(1) = Q.row(0);
            break;
        case SkillKind::Slide:
            // G = (v, -mu g)
            out.row(1) = Q.row(0);
            break;
        case SkillKind::Throw:
            // G = (-g, v_ver, v_hor_init)
            out.row(0) = Q.row(1);
            break;
        default:
            throw std::invalid_argument("skill has no governing ODE");
    }
    return out;
}

// sum_ic Q_ic dR_ic/dlambda
double latent_sensitivity(const SkillSchema& schema, const dynamics::PhysParams& phys, const std::string& name,
                          const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q) {
    const double g = phys.gravity;
    if (schema.kind == SkillKind::Slide && name == "friction" && schema.parameter_input < 0) {
        return g * Q.row(1).sum();
    }
    if (schema.kind == SkillKind::Swing && name == "length") {
        const double l = phys.length;
        return (-(g / (l * l)) * (P.row(0).array().sin() * Q.row(1).array())).sum();
    }
    if (schema.kind == SkillKind::Swing && name == "gravity") {
        return ((1.0 / phys.length) * (P.row(0).array().sin() * Q.row(1).array())).sum();
    }
    if (schema.kind == SkillKind::Throw && name == "gravity") {
        return Q.row(0).sum();
    }
    if (schema.kind == SkillKind::Slide && name == "gravity" && schema.parameter_input < 0) {
        return phys.friction * Q.row(1).sum();
    }
    throw std::invalid_argument("constant '" + name + "' does not enter the " + std::string(to_string(schema.kind)) +
                                " equation");
}

// Collocation inputs shifted by +/- h in time, already normalised.
struct Stencil {
    Eigen::MatrixXd physical;  // centre points
    Eigen::MatrixXd plus;      // encoded
    Eigen::MatrixXd minus;     // encoded
};

Stencil make_stencil(const PinnModel& model, const Eigen::MatrixXd& collocation, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("finite-difference step must be positive");
    }
    const int ti = model.schema.time_input;
    Stencil s;
    s.physical = collocation;
    Eigen::MatrixXd shifted = collocation;
    shifted.row(ti).array() += h;
    s.plus = model.input_norm.encode(shifted);
    shifted.row(ti).array() -= 2.0 * h;
    s.minus = model.input_norm.encode(shifted);
    return s;
}

struct PhysicsTerms {
    double loss = 0.0;
    Eigen::MatrixXd cot_plus;   // cotangent on network outputs at t + h
    Eigen::MatrixXd cot_minus;  // at t - h
    double d_latent = 0.0;
};

PhysicsTerms physics_terms(const PinnModel& model, const Stencil& stencil, const Eigen::MatrixXd& y_plus,
                           const Eigen::MatrixXd& y_minus, double h, bool want_grad) {
    const dynamics::PhysParams phys = model.effective_physics();
    const Eigen::VectorXd& scale = model.output_norm.half_range;
    const double s_t = model.input_norm.half_range[model.schema.time_input];
    const Eigen::MatrixXd p_plus = model.output_norm.decode(y_plus);
    const Eigen::MatrixXd p_minus = model.output_norm.decode(y_minus);
    const Eigen::MatrixXd P = 0.5 * (p_plus + p_minus);
    const Eigen::MatrixXd D = (p_plus - p_minus) / (2.0 * h);
    const Eigen::MatrixXd R = ode_residual(model.schema, phys, P, D, stencil.physical);

    // Residual per component in normalised output per normalised time.
    const Eigen::VectorXd weight = (s_t / scale.array()).square().matrix();
    const auto n = static_cast<double>(R.cols());
    PhysicsTerms terms;
    terms.loss = (weight.asDiagonal() * R.cwiseAbs2()).sum() / n;
    if (!want_grad) {
        return terms;
    }
    const Eigen::MatrixXd Q = (2.0 / n) * (weight.asDiagonal() * R);
    const Eigen::MatrixXd jq = rhs_jacobian_t(model.schema, phys, P, Q);
    // R = D - G(P), P = (p+ + p-)/2, D = (p+ - p-)/(2h)
    const Eigen::MatrixXd dp_plus = Q / (2.0 * h) - 0.5 * jq;
    const Eigen::MatrixXd dp_minus = -Q / (2.0 * h) - 0.5 * jq;
    terms.cot_plus = scale.asDiagonal() * dp_plus;
    terms.cot_minus = scale.asDiagonal() * dp_minus;
    if (model.latent) {
        terms.d_latent = latent_sensitivity(model.schema, phys, model.latent->name, P, Q);
    }
    return terms;
}

// Encoded data and stencils reused across loss evaluations.
struct Prepared {
    Eigen::MatrixXd data_in;
    Eigen::MatrixXd data_target;
    Stencil stencil;
    bool use_physics = false;
    mutable net::ForwardCache data_cache;
    mutable net::ForwardCache plus_cache;
    mutable net::ForwardCache minus_cache;
};

Prepared prepare(const PinnModel& model, const TrainSet& set, double fd_step) {
    Prepared p;
    p.data_in = model.input_norm.encode(set.inputs);
    p.data_target = model.output_norm.encode(set.targets);
    p.use_physics = model.schema.has_ode && model.epsilon > 0.0 && set.collocation.cols() > 0;
    if (p.use_physics) {
        p.stencil = make_stencil(model, set.collocation, fd_step);
    }
    return p;
}

LossBreakdown evaluate(const PinnModel& model, const Prepared& prep, double fd_step, Eigen::VectorXd* grad) {
    const bool want = grad != nullptr;
    const auto n_net = static_cast<Eigen::Index>(model.net.parameter_count());
    if (want) {
        grad->setZero(n_net + (model.latent ? 1 : 0));
    }
    LossBreakdown out;
    if (prep.data_in.cols() > 0) {
        net::ForwardCache& cache = prep.data_cache;
        const Eigen::MatrixXd y = net::forward(model.net, prep.data_in, cache);
        const Eigen::MatrixXd diff = y - prep.data_target;
        const double count = static_cast<double>(diff.size());
        out.data = diff.squaredNorm() / count;
        if (want) {
            net::backward_accumulate(model.net, cache, (2.0 / count) * diff, grad->head(n_net));
        }
    }
    if (prep.use_physics) {
        net::ForwardCache& cache_plus = prep.plus_cache;
        net::ForwardCache& cache_minus = prep.minus_cache;
        const Eigen::MatrixXd y_plus = net::forward(model.net, prep.stencil.plus, cache_plus);
        const Eigen::MatrixXd y_minus = net::forward(model.net, prep.stencil.minus, cache_minus);
        const PhysicsTerms terms = physics_terms(model, prep.stencil, y_plus, y_minus, fd_step, want);
        out.physics = terms.loss;
        if (want) {
            const double eps = model.epsilon;
            net::backward_accumulate(model.net, cache_plus, eps * terms.cot_plus, grad->head(n_net));
            net::backward_accumulate(model.net, cache_minus, eps * terms.cot_minus, grad->head(n_net));
            if (model.latent) {
                (*grad)[n_net] = eps * terms.d_latent;
            }
        }
    }
    out.total = out.data + model.epsilon * out.physics;
    return out;
}

void load_parameters(PinnModel& model, const Eigen::VectorXd& x) {
    const auto n_net = static_cast<Eigen::Index>(model.net.parameter_count());
    model.net.values() = x.head(n_net);
    if (model.latent) {
        model.latent->value = x[n_net];
    }
}

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::VectorXd sample_box(std::mt19937_64& rng, const Box& box) {
    Eigen::VectorXd x(box.dim());
    for (Eigen::Index i = 0; i < box.dim(); ++i) {
        x[i] = uniform_in(rng, box.lower[i], box.upper[i]);
    }
    return x;
}

std::vector<double> sorted_times(std::mt19937_64& rng, int count, double t_end) {
    std::vector<double> t(static_cast<std::size_t>(count));
    for (double& v : t) {
        v = uniform_in(rng, 0.0, t_end);
    }
    std::sort(t.begin(), t.end());
    return t;
}

}  // namespace

bool Box::contains(const Eigen::VectorXd& x, double slack) const {
    if (x.size() != lower.size()) {
        return false;
    }
    return ((x.array() >= lower.array() - slack) && (x.array() <= upper.array() + slack)).all();
}

double SkillSchema::time_horizon() const {
    if (time_input < 0) {
        throw std::logic_error("skill has no time input");
    }
    return input_box.upper[time_input];
}

SkillSchema make_schema(SkillKind kind) {
    SkillSchema s;
    s.kind = kind;
    switch (kind) {
        case SkillKind::Swing:
            s.inputs = {"theta_init", "t_query"};
            s.outputs = {"theta", "omega"};
            s.has_ode = true;
            s.latent = {"length", "gravity"};
            s.time_input = 1;
            s.input_box = make_box({0.0, 0.0}, {kPi / 2.0, 0.6});
            s.output_box = make_box({-kPi / 2.0, -6.0}, {kPi / 2.0, 6.0});
            break;
        case SkillKind::Slide:
            s.inputs = {"v_init", "t_query"};
            s.outputs = {"x", "v"};
            s.has_ode = true;
            s.latent = {"friction", "gravity"};
            s.time_input = 1;
            s.input_box = make_box({0.0, 0.0}, {4.5, 1.6});
            s.output_box = make_box({0.0, 0.0}, {3.5, 4.5});
            break;
        case SkillKind::Throw:
            s.inputs = {"v_hor_init", "v_ver_init", "t_query"};
            s.outputs = {"v_ver", "y", "x"};
            s.has_ode = true;
            s.latent = {"gravity"};
            s.time_input = 2;
            s.input_box = make_box({0.0, -5.0, 0.0}, {5.0, 4.0, 0.9});
            s.output_box = make_box({-14.0, -8.5, 0.0}, {4.0, 1.0, 4.5});
            break;
        case SkillKind::Bounce:
            s.inputs = {"e", "wedge_angle", "v_ver_init", "v_hor_init"};
            s.outputs = {"v_ver", "v_hor"};
            s.input_box = make_box({0.5, 15.0 * kPi / 180.0, -6.0, -0.25}, {1.0, 75.0 * kPi / 180.0, -1.0, 0.25});
            s.output_box = make_box({-6.0, -1.0}, {6.0, 6.0});
            break;
        case SkillKind::Hit:
            s.inputs = {"m1", "m2", "v_init"};
            s.outputs = {"v"};
            s.input_box = make_box({0.5, 0.25, 0.0}, {1.5, 1.0, 4.0});
            s.output_box = make_box({0.0}, {7.0});
            break;
    }
    return s;
}

SkillSchema make_generalized_schema(SkillKind kind, double parameter_lower, double parameter_upper) {
    if (kind != SkillKind::Slide) {
        throw std::invalid_argument("generalised models are available for slide (friction) only");
    }
    if (!(parameter_upper > parameter_lower) || parameter_lower < 0.0) {
        throw std::invalid_argument("generalised parameter range must be non-degenerate and non-negative");
    }
    SkillSchema s = make_schema(kind);
    s.inputs.push_back("friction");
    s.parameter_input = 2;
    s.latent.clear();
    const auto n = s.input_box.dim();
    s.input_box.lower.conservativeResize(n + 1);
    s.input_box.upper.conservativeResize(n + 1);
    s.input_box.lower[n] = parameter_lower;
    s.input_box.upper[n] = parameter_upper;
    return s;
}

std::string schema_id(const SkillSchema& schema) {
    std::string id(to_string(schema.kind));
    if (schema.generalized()) {
        id += "+" + schema.inputs[static_cast<std::size_t>(schema.parameter_input)];
    }
    return id;
}

Normalizer Normalizer::from_box(const Box& box) {
    if (box.lower.size() != box.upper.size() || !((box.upper.array() > box.lower.array()).all())) {
        throw std::invalid_argument("normaliser box must have upper > lower in every dimension");
    }
    return Normalizer{0.5 * (box.lower + box.upper), 0.5 * (box.upper - box.lower)};
}

Normalizer Normalizer::identity(Eigen::Index dim) {
    return Normalizer{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Eigen::MatrixXd Normalizer::encode(const Eigen::MatrixXd& physical) const {
    return (physical.colwise() - center).array().colwise() / half_range.array();
}

Eigen::MatrixXd Normalizer::decode(const Eigen::MatrixXd& unit) const {
    return (unit.array().colwise() * half_range.array()).matrix().colwise() + center;
}

PinnModel PinnModel::create(SkillSchema schema, const dynamics::PhysParams& physics, std::uint64_t seed,
                            int hidden_layers, int hidden_width) {
    physics.validate();
    PinnModel m;
    m.net = net::init_xavier(net::default_widths(schema.input_width(), schema.output_width(), hidden_layers, hidden_width),
                             seed);
    m.input_norm = Normalizer::from_box(schema.input_box);
    m.output_norm = Normalizer::from_box(schema.output_box);
    m.schema = std::move(schema);
    m.physics = physics;
    return m;
}

Eigen::MatrixXd PinnModel::predict(const Eigen::MatrixXd& inputs) const {
    return output_norm.decode(net::forward(net, input_norm.encode(inputs)));
}

Eigen::VectorXd PinnModel::predict_one(const Eigen::VectorXd& input) const {
    return predict(input);
}

PinnModel::CheckedPrediction PinnModel::predict_checked(const Eigen::VectorXd& input) const {
    CheckedPrediction out;
    Eigen::VectorXd x = input;
    if (schema.generalized()) {
        const auto i = schema.parameter_input;
        const double clamped = std::clamp(x[i], schema.input_box.lower[i], schema.input_box.upper[i]);
        out.out_of_domain = clamped != x[i];
        x[i] = clamped;
    }
    out.outputs = predict_one(x);
    return out;
}

dynamics::PhysParams PinnModel::effective_physics() const {
    dynamics::PhysParams p = physics;
    if (latent) {
        set_physics_constant(p, latent->name, latent->value);
    }
    return p;
}

TrainSet generate_dataset(const SkillSchema& schema, const dynamics::PhysParams& physics, const DatasetConfig& config) {
    if (config.n_rollouts <= 0 || config.samples_per_rollout <= 0) {
        throw std::invalid_argument("dataset counts must be positive");
    }
    if (config.obs_noise < 0.0 || config.collocation_ratio < 0.0) {
        throw std::invalid_argument("noise and collocation ratio must be non-negative");
    }
    physics.validate();
    std::mt19937_64 rng = substream(config.seed, "dataset");
    const int n_u = config.n_rollouts * config.samples_per_rollout;
    TrainSet set;
    set.inputs.resize(schema.input_width(), n_u);
    set.targets.resize(schema.output_width(), n_u);
    const Box& box = schema.input_box;
    int col = 0;

    auto rollout_times = [&](double t_end) { return sorted_times(rng, config.samples_per_rollout, t_end); };

    for (int r = 0; r < config.n_rollouts; ++r) {
        switch (schema.kind) {
            case SkillKind::Swing: {
                const double theta0 = uniform_in(rng, box.lower[0], box.upper[0]);
                dynamics::StateVec s{theta0, 0.0};
                double t_prev = 0.0;
                for (double t : rollout_times(box.upper[1])) {
                    s = dynamics::integrate_to(SkillKind::Swing, s, physics, t - t_prev, config.dt);
                    t_prev = t;
                    set.inputs.col(col) << theta0, t;
                    set.targets.col(col) << s[0], s[1];
                    ++col;
                }
                break;
            }
            case SkillKind::Slide: {
                const double v0 = uniform_in(rng, box.lower[0], box.upper[0]);
                dynamics::PhysParams p = physics;
                if (schema.generalized()) {
                    p.friction = uniform_in(rng, box.lower[2], box.upper[2]);
                }
                const double decel = p.friction * p.gravity;
                double t_end = box.upper[1];
                if (decel > 0.0) {
                    t_end = std::min(t_end, v0 / decel);
                }
                dynamics::StateVec s{0.0, v0};
                double t_prev = 0.0;
                for (double t : rollout_times(t_end)) {
                    s = dynamics::integrate_to(SkillKind::Slide, s, p, t - t_prev, config.dt);
                    t_prev = t;
                    if (schema.generalized()) {
                        set.inputs.col(col) << v0, t, p.friction;
                    } else {
                        set.inputs.col(col) << v0, t;
                    }
                    set.targets.col(col) << s[0], s[1];
                    ++col;
                }
                break;
            }
            case SkillKind::Throw: {
                const double vh = uniform_in(rng, box.lower[0], box.upper[0]);
                const double vv = uniform_in(rng, box.lower[1], box.upper[1]);
                dynamics::StateVec s{0.0, 0.0, vh, vv};
                double t_prev = 0.0;
                for (double t : rollout_times(box.upper[2])) {
                    s = dynamics::integrate_to(SkillKind::Throw, s, physics, t - t_prev, config.dt);
                    t_prev = t;
                    set.inputs.col(col) << vh, vv, t;
                    set.targets.col(col) << s[3], s[1], s[0];
                    ++col;
                }
                break;
            }
            case SkillKind::Bounce: {
                for (int k = 0; k < config.samples_per_rollout; ++k) {
                    for (;;) {
                        const Eigen::VectorXd x = sample_box(rng, box);
                        const dynamics::Velocity2 in{x[3], x[2]};
                        const double vn = in.horizontal * std::sin(x[1]) + in.vertical * std::cos(x[1]);
                        if (vn >= 0.0) {
                            continue;
                        }
                        const dynamics::Velocity2 out = dynamics::impulse_bounce(in, x[1], x[0]);
                        set.inputs.col(col) = x;
                        set.targets.col(col) << out.vertical, out.horizontal;
                        ++col;
                        break;
                    }
                }
                break;
            }
            case SkillKind::Hit: {
                for (int k = 0; k < config.samples_per_rollout; ++k) {
                    const Eigen::VectorXd x = sample_box(rng, box);
                    set.inputs.col(col) = x;
                    set.targets(0, col) = dynamics::impulse_hit(x[0], x[1], physics.restitution, x[2]);
                    ++col;
                }
                break;
            }
        }
    }

    if (config.obs_noise > 0.0) {
        std::normal_distribution<double> noise(0.0, config.obs_noise);
        for (Eigen::Index j = 0; j < set.targets.cols(); ++j) {
            for (Eigen::Index i = 0; i < set.targets.rows(); ++i) {
                set.targets(i, j) += noise(rng);
            }
        }
    }

    if (schema.has_ode) {
        const auto n_p = static_cast<Eigen::Index>(std::llround(config.collocation_ratio * n_u));
        set.collocation.resize(schema.input_width(), n_p);
        for (Eigen::Index j = 0; j < n_p; ++j) {
            set.collocation.col(j) = sample_box(rng, box);
        }
    } else {
        set.collocation.resize(schema.input_width(), 0);
    }
    set.input_norm = Normalizer::from_box(schema.input_box);
    set.output_norm = Normalizer::from_box(schema.output_box);
    return set;
}

double data_loss(const PinnModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    if (inputs.cols() == 0) {
        throw std::invalid_argument("data_loss needs a non-empty batch");
    }
    if (targets.cols() != inputs.cols() || targets.rows() != model.schema.output_width()) {
        throw std::invalid_argument("data_loss: target shape mismatch");
    }
    const Eigen::MatrixXd y = net::forward(model.net, model.input_norm.encode(inputs));
    return (y - model.output_norm.encode(targets)).squaredNorm() / static_cast<double>(targets.size());
}

double physics_loss(const PinnModel& model, const Eigen::MatrixXd& collocation, double fd_step) {
    if (!model.schema.has_ode) {
        throw std::invalid_argument("physics_loss: " + std::string(to_string(model.schema.kind)) +
                                    " has no governing ODE");
    }
    if (collocation.cols() == 0) {
        return 0.0;
    }
    const Stencil st = make_stencil(model, collocation, fd_step);
    const Eigen::MatrixXd y_plus = net::forward(model.net, st.plus);
    const Eigen::MatrixXd y_minus = net::forward(model.net, st.minus);
    return physics_terms(model, st, y_plus, y_minus, fd_step, false).loss;
}

LossBreakdown composite_loss(const PinnModel& model, const TrainSet& set, double fd_step, Eigen::VectorXd* grad) {
    return evaluate(model, prepare(model, set, fd_step), fd_step, grad);
}

const TrainingHistory& train(PinnModel& model, const TrainSet& set, const TrainConfig& config) {
    if (config.epsilon < 0.0) {
        throw std::invalid_argument("epsilon must be non-negative");
    }
    if (config.max_cycles <= 0) {
        throw std::invalid_argument("max_cycles must be positive");
    }
    if (set.inputs.rows() != model.schema.input_width() || set.targets.rows() != model.schema.output_width()) {
        throw std::invalid_argument("training set does not match the model schema");
    }
    model.epsilon = config.epsilon;
    model.history = TrainingHistory{};
    TrainingHistory& hist = model.history;

    const Prepared prep = prepare(model, set, config.fd_step);
    const auto n_net = static_cast<Eigen::Index>(model.net.parameter_count());
    Eigen::VectorXd x(n_net + (model.latent ? 1 : 0));
    x.head(n_net) = model.net.values();
    if (model.latent) {
        x[n_net] = std::clamp(model.latent->value, model.latent->lower, model.latent->upper);
    }

    LossBreakdown last;
    int cycle = 0;
    const net::Objective objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd& g) {
        load_parameters(model, p);
        last = evaluate(model, prep, config.fd_step, &g);
        if (!std::isfinite(last.total)) {
            std::ostringstream msg;
            msg << "training diverged at cycle " << cycle << ": data loss " << last.data << ", physics loss "
                << last.physics;
            throw std::runtime_error(msg.str());
        }
        return last.total;
    };

    net::Optimizer optimizer(config.optimizer, x.size());
    int pinned = 0;
    double best_before_window = std::numeric_limits<double>::infinity();
    for (cycle = 0; cycle < config.max_cycles; ++cycle) {
        const net::StepReport report = optimizer.step(x, objective);
        if (report.line_search_failed) {
            ++hist.line_search_failures;
        }
        hist.total_loss.push_back(report.loss);
        hist.data_loss.push_back(last.data);
        hist.physics_loss.push_back(last.physics);
        if (model.latent) {
            const double clamped = std::clamp(x[n_net], model.latent->lower, model.latent->upper);
            if (clamped != x[n_net]) {
                x[n_net] = clamped;
                optimizer.invalidate();
            }
            if (clamped == model.latent->lower || clamped == model.latent->upper) {
                ++pinned;
            }
        }
        hist.cycles = cycle + 1;
        if (cycle % config.checkpoint_every == 0) {
            hist.checkpoint_cycles.push_back(cycle);
            hist.latent_trace.push_back(model.latent ? x[n_net] : 0.0);
        }
        const int window = config.early_stop_window;
        if (window > 0 && cycle >= window) {
            const auto k = static_cast<std::size_t>(cycle);
            const auto w = static_cast<std::size_t>(window);
            best_before_window = std::min(best_before_window, hist.total_loss[k - w]);
            const double best_recent =
                *std::min_element(hist.total_loss.begin() + static_cast<std::ptrdiff_t>(k - w + 1),
                                  hist.total_loss.end());
            if (best_before_window - best_recent < config.early_stop_tolerance) {
                hist.early_stopped = true;
                break;
            }
        }
    }
    load_parameters(model, x);
    if (model.latent) {
        hist.latent_trace.push_back(model.latent->value);
        hist.checkpoint_cycles.push_back(hist.cycles);
        hist.latent_unidentifiable = pinned * 2 > hist.cycles;
    }
    return hist;
}

InverseResult train_inverse(PinnModel& model, const TrainSet& set, const TrainConfig& config) {
    if (!model.latent) {
        throw std::invalid_argument("train_inverse needs a model with a trainable latent parameter");
    }
    const LatentParam& lat = *model.latent;
    if (!(lat.upper > lat.lower)) {
        throw std::invalid_argument("latent bounds must be non-degenerate");
    }
    if (std::find(model.schema.latent.begin(), model.schema.latent.end(), lat.name) == model.schema.latent.end()) {
        throw std::invalid_argument("'" + lat.name + "' is not a latent parameter of this skill");
    }
    train(model, set, config);
    return InverseResult{model.latent->value, !model.history.latent_unidentifiable};
}

PinnModel train_generalized(SkillKind kind, double parameter_lower, double parameter_upper,
                            const dynamics::PhysParams& physics, const DatasetConfig& data, const TrainConfig& config,
                            std::uint64_t init_seed, int hidden_layers, int hidden_width) {
    SkillSchema schema = make_generalized_schema(kind, parameter_lower, parameter_upper);
    const TrainSet set = generate_dataset(schema, physics, data);
    PinnModel model = PinnModel::create(std::move(schema), physics, init_seed, hidden_layers, hidden_width);
    train(model, set, config);
    return model;
}

double validation_rmse(const PinnModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    if (inputs.cols() == 0 || targets.cols() != inputs.cols()) {
        throw std::invalid_argument("validation_rmse: empty or mismatched batch");
    }
    const Eigen::MatrixXd pred = model.predict(inputs);
    return std::sqrt((pred - targets).squaredNorm() / static_cast<double>(targets.size()));
}

}  // namespace skillplan::pinn
