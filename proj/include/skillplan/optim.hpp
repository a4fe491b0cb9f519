#pragma once

#include <Eigen/Dense>

#include <deque>
#include <functional>
#include <string>
#include <string_view>

namespace skillplan::net {

enum class OptimizerKind { Adam, Lbfgs };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 1e-3;  // Adam step size; L-BFGS first trial step
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int history = 10;
    double armijo = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 30;
};

/// Loss and gradient at x. The gradient buffer is sized by the caller.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct StepReport {
    double loss = 0.0;           // loss at the point the step started from
    int evaluations = 0;
    bool line_search_failed = false;
};

/// Holds optimizer state for one parameter vector. step() evaluates the
/// objective as needed and moves x.
class Optimizer {
public:
    Optimizer(OptimizerConfig config, Eigen::Index dimension);

    StepReport step(Eigen::VectorXd& x, const Objective& objective);

    /// Applies a single update from an externally computed gradient. Only
    /// valid for Adam; L-BFGS needs the objective for its line search.
    void apply_gradient(Eigen::VectorXd& x, const Eigen::VectorXd& grad);

    const OptimizerConfig& config() const { return config_; }
    long iterations() const { return iterations_; }

    /// Drops curvature history and cached evaluations (e.g. after x was
    /// modified outside the optimizer, such as by a projection).
    void invalidate();

private:
    StepReport adam_step(Eigen::VectorXd& x, const Objective& objective);
    StepReport lbfgs_step(Eigen::VectorXd& x, const Objective& objective);

    OptimizerConfig config_;
    long iterations_ = 0;

    // Adam moments.
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;

    // L-BFGS curvature pairs and the cached evaluation at the current x.
    std::deque<Eigen::VectorXd> s_hist_;
    std::deque<Eigen::VectorXd> y_hist_;
    bool have_cache_ = false;
    double cached_loss_ = 0.0;
    Eigen::VectorXd cached_grad_;
};

}  // namespace skillplan::net
