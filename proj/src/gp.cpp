#include "skillplan/gp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace skillplan::gp {

GpDataset::GpDataset(Eigen::VectorXd lower, Eigen::VectorXd upper, Hyperparams hyper)
    : lower_(std::move(lower)), hyper_(hyper) {
    if (lower_.size() != upper.size() || lower_.size() == 0) {
        throw std::invalid_argument("GP bounds must be non-empty and of equal length");
    }
    if (!(hyper_.signal_sd > 0.0 && hyper_.lengthscale > 0.0 && hyper_.noise_var >= 0.0)) {
        throw std::invalid_argument("GP needs sigma_f > 0, lengthscale > 0 and noise variance >= 0");
    }
    span_ = upper - lower_;
    // A degenerate interval contributes nothing to distances.
    for (Eigen::Index i = 0; i < span_.size(); ++i) {
        if (!(span_[i] >= 0.0)) {
            throw std::invalid_argument("GP bounds must satisfy lower <= upper");
        }
        if (span_[i] == 0.0) {
            span_[i] = 1.0;
        }
    }
    points_.resize(lower_.size(), 0);
}

Eigen::VectorXd GpDataset::normalize(const std::vector<double>& action) const {
    if (static_cast<Eigen::Index>(action.size()) != lower_.size()) {
        throw std::invalid_argument("GP action dimension mismatch");
    }
    const Eigen::Map<const Eigen::VectorXd> a(action.data(), lower_.size());
    return ((a - lower_).array() / span_.array()).matrix();
}

double GpDataset::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    const double l = hyper_.lengthscale;
    return hyper_.signal_sd * hyper_.signal_sd * std::exp(-(a - b).squaredNorm() / (2.0 * l * l));
}

void GpDataset::add(const std::vector<double>& action, double value) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("GP observations must be finite");
    }
    const Eigen::VectorXd x = normalize(action);
    const Eigen::Index n = points_.cols();
    points_.conservativeResize(Eigen::NoChange, n + 1);
    points_.col(n) = x;
    values_.conservativeResize(n + 1);
    values_[n] = value;
    fit();
}

void GpDataset::fit() {
    const Eigen::Index n = points_.cols();
    jitter_ = 0.0;
    if (n == 0) {
        alpha_.resize(0);
        return;
    }
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            k(i, j) = k(j, i) = kernel(points_.col(i), points_.col(j));
        }
    }
    k.diagonal().array() += hyper_.noise_var;
    llt_.compute(k);
    double jitter = 1e-10;
    while (llt_.info() != Eigen::Success) {
        if (jitter > 1e-4 * (1.0 + 1e-9)) {
            throw std::runtime_error("GP kernel matrix is not positive definite even with jitter 1e-4");
        }
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        llt_.compute(kj);
        jitter_ = jitter;
        jitter *= 10.0;
    }
    if (jitter_ > 0.0) {
        std::ostringstream msg;
        msg << "GP fit with " << n << " points needed jitter " << jitter_;
        fit_log_.push_back(msg.str());
    }
    alpha_ = llt_.solve(values_);
}

Posterior GpDataset::posterior(const std::vector<double>& action) const {
    const Eigen::VectorXd x = normalize(action);
    const double prior_var = hyper_.signal_sd * hyper_.signal_sd;
    const Eigen::Index n = points_.cols();
    if (n == 0) {
        return Posterior{0.0, hyper_.signal_sd};
    }
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ks[i] = kernel(x, points_.col(i));
    }
    const double mean = ks.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(ks);
    const double var = std::clamp(prior_var - v.squaredNorm(), 0.0, prior_var);
    return Posterior{mean, std::sqrt(var)};
}

double ucb_correct(double r_sim, const GpDataset& gp, const std::vector<double>& action, double beta) {
    if (!(beta >= 0.0)) {
        throw std::invalid_argument("beta must be non-negative");
    }
    const Posterior p = gp.posterior(action);
    return r_sim + p.mean + std::sqrt(beta) * p.sd;
}

}  // namespace skillplan::gp
