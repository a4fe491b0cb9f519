#pragma once

#include "skillplan/dynamics.hpp"
#include "skillplan/net.hpp"
#include "skillplan/optim.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace skillplan::pinn {

/// Axis-aligned box over physical quantities.
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index dim() const { return lower.size(); }
    bool contains(const Eigen::VectorXd& x, double slack = 1e-12) const;
};

/// Input/output signature of one skill network.
///
///   swing : (theta_init, t_query)                  -> (theta, omega)
///   slide : (v_init, t_query [, friction])         -> (x, v)
///   throw : (v_hor_init, v_ver_init, t_query)      -> (v_ver, y, x)
///   bounce: (e, wedge_angle, v_ver_init, v_hor_init) -> (v_ver, v_hor)
///   hit   : (m1, m2, v_init)                       -> v
///
/// Throw positions are displacements from the launch point, y upward.
struct SkillSchema {
    SkillKind kind = SkillKind::Swing;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    bool has_ode = false;
    std::vector<std::string> latent;  // physical constants that can be inferred
    int time_input = -1;              // index of t_query, or -1
    int parameter_input = -1;         // index of a generalised parameter input, or -1
    Box input_box;
    Box output_box;

    int input_width() const { return static_cast<int>(inputs.size()); }
    int output_width() const { return static_cast<int>(outputs.size()); }
    double time_horizon() const;
    bool generalized() const { return parameter_input >= 0; }
};

/// Default schema for a skill. `generalized` adds the friction coefficient as
/// an input (slide only) spanning [parameter_lower, parameter_upper].
SkillSchema make_schema(SkillKind kind);
SkillSchema make_generalized_schema(SkillKind kind, double parameter_lower, double parameter_upper);

/// Stable identifier written into model files, e.g. "slide" or "slide+friction".
std::string schema_id(const SkillSchema& schema);

/// Per-dimension affine map of a box onto [-1, 1].
struct Normalizer {
    Eigen::VectorXd center;
    Eigen::VectorXd half_range;

    static Normalizer from_box(const Box& box);
    static Normalizer identity(Eigen::Index dim);
    Eigen::MatrixXd encode(const Eigen::MatrixXd& physical) const;
    Eigen::MatrixXd decode(const Eigen::MatrixXd& unit) const;
};

/// A physical constant learned jointly with the network weights.
struct LatentParam {
    std::string name;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct TrainingHistory {
    std::vector<double> total_loss;    // one entry per cycle
    std::vector<double> data_loss;
    std::vector<double> physics_loss;
    std::vector<int> checkpoint_cycles;
    std::vector<double> latent_trace;  // latent value at each checkpoint
    int cycles = 0;
    bool early_stopped = false;
    bool latent_unidentifiable = false;
    int line_search_failures = 0;
};

struct PinnModel {
    SkillSchema schema;
    net::NetParams net;
    dynamics::PhysParams physics;
    double epsilon = 0.1;
    std::optional<LatentParam> latent;
    Normalizer input_norm;
    Normalizer output_norm;
    TrainingHistory history;

    /// Fresh Xavier-initialised model with normalisers taken from the schema.
    static PinnModel create(SkillSchema schema, const dynamics::PhysParams& physics, std::uint64_t seed,
                            int hidden_layers = 8, int hidden_width = 40);

    /// Physical inputs (input_width x batch) to physical outputs.
    Eigen::MatrixXd predict(const Eigen::MatrixXd& inputs) const;
    Eigen::VectorXd predict_one(const Eigen::VectorXd& input) const;

    struct CheckedPrediction {
        Eigen::VectorXd outputs;
        bool out_of_domain = false;  // a generalised parameter was clamped into range
    };
    /// Clamps the generalised parameter input into its trained range and
    /// flags when it had to.
    CheckedPrediction predict_checked(const Eigen::VectorXd& input) const;

    /// Physics constants with any latent parameter applied.
    dynamics::PhysParams effective_physics() const;
};

struct TrainSet {
    Eigen::MatrixXd inputs;       // physical, input_width x N_u
    Eigen::MatrixXd targets;      // physical, output_width x N_u
    Eigen::MatrixXd collocation;  // physical, input_width x N_p
    Normalizer input_norm;
    Normalizer output_norm;

    Eigen::Index supervised_count() const { return inputs.cols(); }
    Eigen::Index collocation_count() const { return collocation.cols(); }
};

struct DatasetConfig {
    int n_rollouts = 20;
    int samples_per_rollout = 25;
    std::uint64_t seed = 0;
    double obs_noise = 0.0;         // Gaussian sigma added to targets
    double collocation_ratio = 4.0; // N_p / N_u
    double dt = 1e-3;
};

/// Ground-truth rollouts inside the schema's input box. Supervised times are
/// drawn uniformly over the rollout; for slide only the moving phase is
/// sampled (the governing equation holds there). Collocation inputs are
/// uniform over the input box.
TrainSet generate_dataset(const SkillSchema& schema, const dynamics::PhysParams& physics,
                          const DatasetConfig& config);

/// Mean squared error over every output component, measured in normalised
/// output units.
double data_loss(const PinnModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

/// Mean squared ODE residual norm over collocation inputs. The time
/// derivative is a central difference of the network output at t +/- h; the
/// right-hand side is evaluated at the stencil midpoint. Residual components
/// are expressed in normalised output per normalised time (physical units
/// when the normalisers are the identity). Throws for skills without an ODE.
double physics_loss(const PinnModel& model, const Eigen::MatrixXd& collocation, double fd_step = 1e-3);

struct LossBreakdown {
    double total = 0.0;
    double data = 0.0;
    double physics = 0.0;
};

/// Composite loss L_D + epsilon * L_P and, if `grad` is non-null, its
/// gradient with respect to [network parameters, latent value].
LossBreakdown composite_loss(const PinnModel& model, const TrainSet& set, double fd_step, Eigen::VectorXd* grad);

struct TrainConfig {
    double epsilon = 0.1;
    net::OptimizerConfig optimizer;
    int max_cycles = 6400;
    double early_stop_tolerance = 1e-10;
    int early_stop_window = 50;
    double fd_step = 1e-3;
    int checkpoint_every = 25;
};

/// Minimises L_D + epsilon * L_P in place (full batch). Throws
/// std::runtime_error if the loss becomes non-finite.
const TrainingHistory& train(PinnModel& model, const TrainSet& set, const TrainConfig& config);

struct InverseResult {
    double estimate = 0.0;
    bool identifiable = true;
};

/// Trains with `model.latent` as an extra trainable parameter, projected into
/// its bounds after every update.
InverseResult train_inverse(PinnModel& model, const TrainSet& set, const TrainConfig& config);

/// Dataset over rollouts whose friction is drawn per rollout from
/// [lower, upper], then a model with friction as an input.
PinnModel train_generalized(SkillKind kind, double parameter_lower, double parameter_upper,
                            const dynamics::PhysParams& physics, const DatasetConfig& data,
                            const TrainConfig& config, std::uint64_t init_seed, int hidden_layers = 8,
                            int hidden_width = 40);

/// RMSE in physical units over every output component.
double validation_rmse(const PinnModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

}  // namespace skillplan::pinn
