#include "skillplan/net.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace skillplan::net;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = u(rng);
        }
    }
    return m;
}

// Reference forward pass written directly from the definition.
Eigen::VectorXd reference_forward(const NetParams& p, Eigen::VectorXd x) {
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        Eigen::VectorXd z = p.weight(l) * x + p.bias(l);
        if (l + 1 < p.layer_count()) {
            z = z.array().tanh();
        }
        x = z;
    }
    return x;
}

}  // namespace

TEST_CASE("xavier initialisation") {
    const std::vector<int> widths = default_widths(3, 3);
    CHECK(widths.size() == 10);
    CHECK(widths.front() == 3);
    CHECK(widths[4] == 40);
    const NetParams a = init_xavier(widths, 42);
    const NetParams b = init_xavier(widths, 42);
    CHECK(a.values() == b.values());
    CHECK(a.values() != init_xavier(widths, 43).values());
    for (std::size_t l = 0; l < a.layer_count(); ++l) {
        CHECK(a.bias(l).cwiseAbs().maxCoeff() == 0.0);
    }

    // Sample variance of a 40x40 layer, averaged over seeds, against 2/80.
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const NetParams p = init_xavier(widths, seed);
        const auto w = p.weight(3);
        const double mean = w.mean();
        total += (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
    }
    const double variance = total / 10.0;
    CHECK(variance > 0.7 * 2.0 / 80.0);
    CHECK(variance < 1.3 * 2.0 / 80.0);
}

TEST_CASE("forward pass") {
    SUBCASE("zero weights give the final bias") {
        NetParams p({2, 5, 3});
        p.values().setZero();
        p.bias(1) << 0.1, -0.2, 0.3;
        const Eigen::MatrixXd out = forward(p, random_matrix(2, 4, 1));
        for (Eigen::Index j = 0; j < 4; ++j) {
            CHECK(out(0, j) == doctest::Approx(0.1));
            CHECK(out(1, j) == doctest::Approx(-0.2));
            CHECK(out(2, j) == doctest::Approx(0.3));
        }
    }
    SUBCASE("a single affine layer is exactly affine") {
        NetParams p({3, 2});
        p.weight(0) << 1.0, 2.0, 3.0, -1.0, 0.5, 0.0;
        p.bias(0) << 0.25, -0.75;
        Eigen::MatrixXd x(3, 1);
        x << 1.0, -2.0, 0.5;
        const Eigen::MatrixXd y = forward(p, x);
        CHECK(y(0, 0) == doctest::Approx(1.0 - 4.0 + 1.5 + 0.25));
        CHECK(y(1, 0) == doctest::Approx(-1.0 - 1.0 - 0.75));
    }
    SUBCASE("batching matches column-wise evaluation") {
        const NetParams p = init_xavier(default_widths(3, 2), 7);
        const Eigen::MatrixXd x = random_matrix(3, 9, 2);
        const Eigen::MatrixXd batch = forward(p, x);
        ForwardCache cache;
        const Eigen::MatrixXd cached = forward(p, x, cache);
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const Eigen::VectorXd ref = reference_forward(p, x.col(j));
            CHECK((batch.col(j) - ref).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((cached.col(j) - ref).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("bad inputs are rejected") {
        const NetParams p = init_xavier({2, 4, 1}, 0);
        CHECK_THROWS_AS(forward(p, Eigen::MatrixXd::Zero(3, 1)), std::invalid_argument);
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
        x(0, 0) = std::nan("");
        CHECK_THROWS_AS(forward(p, x), std::invalid_argument);
    }
}

TEST_CASE("backward pass against central differences") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const std::vector<int> widths{3, 6, 5, 2};
        NetParams p = init_xavier(widths, 100 + trial);
        const Eigen::MatrixXd x = random_matrix(3, 4, 200 + trial);
        const Eigen::MatrixXd c = random_matrix(2, 4, 300 + trial);
        const GradBuffer g = backward(p, x, c);
        REQUIRE(g.congruent_with(p));
        const double h = 1e-5;
        for (Eigen::Index k = 0; k < p.values().size(); ++k) {
            const double saved = p.values()[k];
            p.values()[k] = saved + h;
            const double up = (c.array() * forward(p, x).array()).sum();
            p.values()[k] = saved - h;
            const double down = (c.array() * forward(p, x).array()).sum();
            p.values()[k] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double scale = std::max({std::abs(fd), std::abs(g.values[k]), 1e-6});
            CHECK(std::abs(fd - g.values[k]) / scale < 1e-4);
        }
    }
}

TEST_CASE("backward linearity") {
    const NetParams p = init_xavier(default_widths(2, 2, 3, 8), 5);
    const Eigen::MatrixXd x = random_matrix(2, 6, 8);
    const Eigen::MatrixXd c = random_matrix(2, 6, 9);
    CHECK(backward(p, x, Eigen::MatrixXd::Zero(2, 6)).values.cwiseAbs().maxCoeff() == 0.0);

    GradBuffer sum = GradBuffer::zeros_like(p);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        sum += backward(p, Eigen::MatrixXd(x.col(j)), Eigen::MatrixXd(c.col(j)));
    }
    const GradBuffer batch = backward(p, x, c);
    CHECK((batch.values - sum.values).cwiseAbs().maxCoeff() < 1e-12);

    ForwardCache cache;
    forward(p, x, cache);
    Eigen::VectorXd acc = batch.values;
    backward_accumulate(p, cache, c, acc);
    CHECK((acc - 2.0 * batch.values).cwiseAbs().maxCoeff() < 1e-12);
}
