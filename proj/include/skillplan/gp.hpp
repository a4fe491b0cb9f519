#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace skillplan::gp {

struct Hyperparams {
    double signal_sd = 0.2;    // sigma_f
    double lengthscale = 0.2;  // in normalised [0, 1] action coordinates
    double noise_var = 1e-4;   // sigma_n^2
};

struct Posterior {
    double mean = 0.0;
    double sd = 0.0;
};

/// Gaussian-process regression over action tuples with a squared-exponential
/// kernel and fixed hyperparameters. Actions are mapped to [0, 1] per
/// dimension using the bounds supplied at construction.
class GpDataset {
public:
    GpDataset(Eigen::VectorXd lower, Eigen::VectorXd upper, Hyperparams hyper = {});

    /// Adds an observation and refactorises.
    void add(const std::vector<double>& action, double value);
    /// Rebuilds the factorisation. If Cholesky fails, jitter is added to the
    /// diagonal, starting at 1e-10 and growing x10 up to 1e-4; beyond that
    /// std::runtime_error is thrown.
    void fit();

    Posterior posterior(const std::vector<double>& action) const;
    double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;  // normalised inputs

    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    const Hyperparams& hyper() const { return hyper_; }
    double jitter() const { return jitter_; }
    /// Human-readable notes from fits that needed jitter.
    const std::vector<std::string>& fit_log() const { return fit_log_; }

    Eigen::VectorXd normalize(const std::vector<double>& action) const;

private:
    Eigen::VectorXd lower_;
    Eigen::VectorXd span_;
    Hyperparams hyper_;
    Eigen::MatrixXd points_;   // normalised, one column per observation
    Eigen::VectorXd values_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;    // K^-1 y
    double jitter_ = 0.0;
    std::vector<std::string> fit_log_;
};

/// r_sim + mu(A) + sqrt(beta) * sigma(A).
double ucb_correct(double r_sim, const GpDataset& gp, const std::vector<double>& action, double beta = 0.25);

}  // namespace skillplan::gp
