// Full-size training runs; slower than the other unit tests.
#include "skillplan/pinn.hpp"
#include "skillplan/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace skillplan;
using namespace skillplan::pinn;

namespace {

TrainConfig lbfgs(int cycles) {
    TrainConfig c;
    c.max_cycles = cycles;
    c.optimizer.kind = net::OptimizerKind::Lbfgs;
    c.optimizer.learning_rate = 0.01;
    return c;
}

// Held-out slide samples from the closed form, moving phase only.
void slide_validation(double mu, double mu_low, double mu_high, bool with_mu, Eigen::MatrixXd& in,
                      Eigen::MatrixXd& out) {
    std::mt19937_64 rng(991);
    const int n = 400;
    in.resize(with_mu ? 3 : 2, n);
    out.resize(2, n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double g = 9.81;
    for (int j = 0; j < n; ++j) {
        const double m = with_mu ? mu_low + (mu_high - mu_low) * u(rng) : mu;
        const double v0 = 4.5 * u(rng);
        const double t = std::min(1.6, v0 / (m * g)) * u(rng);
        if (with_mu) {
            in.col(j) << v0, t, m;
        } else {
            in.col(j) << v0, t;
        }
        out.col(j) << v0 * t - 0.5 * m * g * t * t, v0 - m * g * t;
    }
}

PinnModel inverse_slide(double true_mu, std::uint64_t seed) {
    dynamics::PhysParams phys;
    phys.friction = true_mu;
    DatasetConfig d;
    d.n_rollouts = 32;
    d.samples_per_rollout = 25;
    d.seed = substream_seed(seed, "dataset");
    const TrainSet set = generate_dataset(make_schema(SkillKind::Slide), phys, d);
    dynamics::PhysParams wrong = phys;
    wrong.friction = 0.5;
    PinnModel m = PinnModel::create(make_schema(SkillKind::Slide), wrong, substream_seed(seed, "init"));
    m.latent = LatentParam{"friction", 0.5, 0.0, 1.0};
    train_inverse(m, set, lbfgs(1000));
    return m;
}

}  // namespace

TEST_CASE("slide skill reaches millimetre accuracy") {
    const dynamics::PhysParams phys;
    DatasetConfig d;
    d.n_rollouts = 20;
    d.samples_per_rollout = 25;
    const TrainSet set = generate_dataset(make_schema(SkillKind::Slide), phys, d);
    PinnModel m = PinnModel::create(make_schema(SkillKind::Slide), phys, 1);
    train(m, set, lbfgs(2000));
    Eigen::MatrixXd in;
    Eigen::MatrixXd out;
    slide_validation(phys.friction, 0, 0, false, in, out);
    const Eigen::MatrixXd pred = m.predict(in);
    const double rmse_x = std::sqrt((pred.row(0) - out.row(0)).squaredNorm() / static_cast<double>(in.cols()));
    MESSAGE("slide position RMSE " << rmse_x);
    CHECK(rmse_x < 5e-3);
}

TEST_CASE("inverse friction recovery") {
    SUBCASE("zero friction") {
        const PinnModel m = inverse_slide(0.0, 3);
        MESSAGE("estimate " << m.latent->value);
        CHECK(m.latent->value < 0.02);
    }
    SUBCASE("two data seeds agree") {
        const PinnModel a = inverse_slide(0.3, 11);
        const PinnModel b = inverse_slide(0.3, 12);
        MESSAGE("estimates " << a.latent->value << " " << b.latent->value);
        CHECK(std::abs(a.latent->value - b.latent->value) < 0.03);
        CHECK(!a.history.latent_trace.empty());
    }
}

TEST_CASE("friction-generalised slide model") {
    const dynamics::PhysParams phys;
    DatasetConfig d;
    d.n_rollouts = 100;
    d.samples_per_rollout = 10;
    const PinnModel general = train_generalized(SkillKind::Slide, 0.1, 0.6, phys, d, lbfgs(2000), 2);

    Eigen::MatrixXd in;
    Eigen::MatrixXd out;
    slide_validation(0.35, 0.35, 0.35, true, in, out);
    const double rmse_general = validation_rmse(general, in, out);
    MESSAGE("generalised RMSE at 0.35: " << rmse_general);
    CHECK(rmse_general < 1e-2);

    // Against a model specialised at the default friction, queried there.
    DatasetConfig ds;
    ds.n_rollouts = 40;
    ds.samples_per_rollout = 25;
    const TrainSet set = generate_dataset(make_schema(SkillKind::Slide), phys, ds);
    PinnModel special = PinnModel::create(make_schema(SkillKind::Slide), phys, 2);
    train(special, set, lbfgs(2000));
    Eigen::MatrixXd in_s;
    Eigen::MatrixXd out_s;
    slide_validation(phys.friction, 0, 0, false, in_s, out_s);
    Eigen::MatrixXd in_g(3, in_s.cols());
    in_g << in_s, Eigen::RowVectorXd::Constant(in_s.cols(), phys.friction);
    const double rmse_special = validation_rmse(special, in_s, out_s);
    const double rmse_at_train = validation_rmse(general, in_g, out_s);
    MESSAGE("specialised " << rmse_special << ", generalised " << rmse_at_train);
    CHECK(rmse_at_train <= 2.0 * rmse_special);
}

TEST_CASE("inverse error does not grow with more data") {
    // Noisy observations, so the estimate is limited by the data rather
    // than by the optimiser.
    auto median_error = [](int rollouts) {
        std::vector<double> errors;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            dynamics::PhysParams phys;
            DatasetConfig d;
            d.n_rollouts = rollouts;
            d.samples_per_rollout = 25;
            d.obs_noise = 0.05;
            d.seed = substream_seed(seed, "dataset");
            const TrainSet set = generate_dataset(make_schema(SkillKind::Slide), phys, d);
            PinnModel m = PinnModel::create(make_schema(SkillKind::Slide), phys, substream_seed(seed, "init"));
            m.latent = LatentParam{"friction", 0.5, 0.0, 1.0};
            train_inverse(m, set, lbfgs(1000));
            errors.push_back(std::abs(m.latent->value - phys.friction));
        }
        std::nth_element(errors.begin(), errors.begin() + 2, errors.end());
        return errors[2];
    };
    const double e100 = median_error(4);
    const double e400 = median_error(16);
    const double e800 = median_error(32);
    MESSAGE("median errors " << e100 << " " << e400 << " " << e800);
    CHECK(e400 <= e100);
    CHECK(e800 <= e400);
}
