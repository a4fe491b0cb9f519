#include "skillplan/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace skillplan::net {

std::string_view to_string(OptimizerKind kind) {
    return kind == OptimizerKind::Adam ? "adam" : "lbfgs";
}

OptimizerKind optimizer_from_string(std::string_view name) {
    if (name == "adam") {
        return OptimizerKind::Adam;
    }
    if (name == "lbfgs" || name == "l-bfgs") {
        return OptimizerKind::Lbfgs;
    }
    throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (expected adam or lbfgs)");
}

Optimizer::Optimizer(OptimizerConfig config, Eigen::Index dimension)
    : config_(config),
      m_(Eigen::VectorXd::Zero(dimension)),
      v_(Eigen::VectorXd::Zero(dimension)),
      cached_grad_(Eigen::VectorXd::Zero(dimension)) {
    if (config_.history < 1) {
        throw std::invalid_argument("L-BFGS history must be at least 1");
    }
}

void Optimizer::invalidate() {
    have_cache_ = false;
    s_hist_.clear();
    y_hist_.clear();
}

StepReport Optimizer::step(Eigen::VectorXd& x, const Objective& objective) {
    if (x.size() != m_.size()) {
        throw std::invalid_argument("optimizer dimension mismatch");
    }
    return config_.kind == OptimizerKind::Adam ? adam_step(x, objective) : lbfgs_step(x, objective);
}

void Optimizer::apply_gradient(Eigen::VectorXd& x, const Eigen::VectorXd& grad) {
    if (config_.kind != OptimizerKind::Adam) {
        throw std::logic_error("apply_gradient is only defined for Adam");
    }
    ++iterations_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    m_ = b1 * m_ + (1.0 - b1) * grad;
    v_ = b2 * v_ + (1.0 - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(iterations_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(iterations_));
    x.array() -= config_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.adam_epsilon);
}

StepReport Optimizer::adam_step(Eigen::VectorXd& x, const Objective& objective) {
    Eigen::VectorXd grad(x.size());
    StepReport report;
    report.loss = objective(x, grad);
    report.evaluations = 1;
    apply_gradient(x, grad);
    return report;
}

StepReport Optimizer::lbfgs_step(Eigen::VectorXd& x, const Objective& objective) {
    StepReport report;
    if (!have_cache_) {
        cached_loss_ = objective(x, cached_grad_);
        report.evaluations += 1;
        have_cache_ = true;
    }
    report.loss = cached_loss_;
    const Eigen::VectorXd& g = cached_grad_;
    if (g.squaredNorm() == 0.0) {
        return report;
    }

    // Two-loop recursion.
    const std::size_t k = s_hist_.size();
    Eigen::VectorXd q = g;
    std::vector<double> alpha(k);
    std::vector<double> rho(k);
    for (std::size_t i = k; i-- > 0;) {
        rho[i] = 1.0 / y_hist_[i].dot(s_hist_[i]);
        alpha[i] = rho[i] * s_hist_[i].dot(q);
        q -= alpha[i] * y_hist_[i];
    }
    double gamma = 1.0;
    if (k > 0) {
        gamma = s_hist_.back().dot(y_hist_.back()) / y_hist_.back().squaredNorm();
    }
    Eigen::VectorXd direction = gamma * q;
    for (std::size_t i = 0; i < k; ++i) {
        const double beta = rho[i] * y_hist_[i].dot(direction);
        direction += (alpha[i] - beta) * s_hist_[i];
    }
    direction = -direction;

    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
        // Not a descent direction: restart from steepest descent.
        s_hist_.clear();
        y_hist_.clear();
        direction = -g;
        slope = -g.squaredNorm();
    }

    double step = (k == 0) ? config_.learning_rate : 1.0;
    Eigen::VectorXd trial(x.size());
    Eigen::VectorXd trial_grad(x.size());
    bool accepted = false;
    double trial_loss = 0.0;
    for (int attempt = 0; attempt <= config_.max_backtracks; ++attempt) {
        trial = x + step * direction;
        trial_loss = objective(trial, trial_grad);
        report.evaluations += 1;
        if (std::isfinite(trial_loss) && trial_loss <= cached_loss_ + config_.armijo * step * slope) {
            accepted = true;
            break;
        }
        step *= config_.backtrack;
    }

    if (!accepted) {
        // Fall back to a plain gradient step and forget the curvature model.
        report.line_search_failed = true;
        s_hist_.clear();
        y_hist_.clear();
        trial = x - config_.learning_rate * g;
        trial_loss = objective(trial, trial_grad);
        report.evaluations += 1;
        if (!std::isfinite(trial_loss)) {
            return report;
        }
        x = trial;
        cached_loss_ = trial_loss;
        cached_grad_ = trial_grad;
        ++iterations_;
        return report;
    }

    Eigen::VectorXd s = trial - x;
    Eigen::VectorXd y = trial_grad - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
        s_hist_.push_back(std::move(s));
        y_hist_.push_back(std::move(y));
        if (static_cast<int>(s_hist_.size()) > config_.history) {
            s_hist_.pop_front();
            y_hist_.pop_front();
        }
    }
    x = trial;
    cached_loss_ = trial_loss;
    cached_grad_ = trial_grad;
    ++iterations_;
    return report;
}

}  // namespace skillplan::net
