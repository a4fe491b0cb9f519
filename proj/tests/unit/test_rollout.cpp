#include "skillplan/rollout.hpp"

#include "model_cache.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

using namespace skillplan;
using namespace skillplan::rollout;

namespace {

envs::ActionSeq random_action(const envs::TaskSpec& t, std::mt19937_64& rng) {
    envs::ActionSeq a;
    for (const envs::SubAction& s : t.sub_actions) {
        a.push_back(std::uniform_real_distribution<double>(s.lower, s.upper)(rng));
    }
    return a;
}

}  // namespace

TEST_CASE("event scans on trained networks") {
    const ModelSet& models = testing::cached_library();

    SUBCASE("throw from one metre lands after sqrt(2h/g)") {
        const auto& model = models.at(SkillKind::Throw);
        Eigen::VectorXd prefix(2);
        prefix << 0.0, 0.0;
        const auto hit = scan_event(model, prefix, {dynamics::EventKind::Landing, -1.0}, model.schema.time_horizon());
        REQUIRE(hit);
        CHECK(std::abs(hit->time - 0.4515) < 0.02);
    }

    SUBCASE("slide from 2 m/s at friction 0.5 stops after v^2/(2 mu g)") {
        const auto& model = models.at(SkillKind::Slide);
        REQUIRE(model.schema.generalized());
        Eigen::VectorXd prefix(2);
        prefix << 2.0, 0.5;
        const auto hit = scan_event(model, prefix, {dynamics::EventKind::SlideStop, 0.0}, model.schema.time_horizon());
        REQUIRE(hit);
        CHECK(std::abs(hit->outputs[0] - 4.0 / (2.0 * 0.5 * 9.81)) < 0.02);
    }

    SUBCASE("no crossing in the window") {
        const auto& model = models.at(SkillKind::Throw);
        Eigen::VectorXd prefix(2);
        prefix << 1.0, 3.0;
        CHECK(!scan_event(model, prefix, {dynamics::EventKind::Landing, -5.0}, 0.3));
        const ScanResult r = scan_events(model, prefix, {}, 0.3);
        CHECK(!r.hit);
        CHECK(r.grid_times.size() == 200);
        CHECK(r.last_outputs.size() == 3);
    }

    SUBCASE("bad scans") {
        const auto& model = models.at(SkillKind::Throw);
        Eigen::VectorXd prefix(2);
        prefix << 1.0, 0.0;
        const dynamics::Event land{dynamics::EventKind::Landing, -1.0};
        CHECK_THROWS_AS(scan_event(model, prefix, land, 0.5, 10), std::invalid_argument);
        CHECK_THROWS_AS(scan_event(model, prefix, land, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(scan_event(model, Eigen::VectorXd::Zero(3), land, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(scan_event(model, prefix, {dynamics::EventKind::SlideStop, 0.0}, 0.5),
                        std::invalid_argument);
        CHECK_THROWS_AS(scan_event(models.at(SkillKind::Hit), Eigen::VectorXd::Zero(2), land, 0.5),
                        std::invalid_argument);
    }
}

TEST_CASE("model set") {
    const ModelSet& models = testing::cached_library();
    for (envs::TaskKind kind : envs::all_tasks()) {
        models.require_chain(envs::make_task(kind));
    }
    ModelSet partial;
    partial.put(models.at(SkillKind::Swing));
    CHECK(partial.has(SkillKind::Swing));
    CHECK_THROWS_AS(partial.require_chain(envs::make_task(envs::TaskKind::Launch)), std::invalid_argument);
    CHECK_THROWS_AS(partial.at(SkillKind::Throw), std::invalid_argument);
}

TEST_CASE("predicted rollouts") {
    const ModelSet& models = testing::cached_library();

    SUBCASE("never integrate the dynamics and are deterministic") {
        std::mt19937_64 rng(1);
        for (envs::TaskKind kind : envs::all_tasks()) {
            const envs::TaskSpec t = envs::make_task(kind);
            const envs::ActionSeq a = random_action(t, rng);
            const std::uint64_t before = dynamics::integration_steps();
            const envs::Outcome p = pinn_rollout(t, a, models);
            CHECK(dynamics::integration_steps() == before);
            const envs::Outcome q = pinn_rollout(t, a, models);
            CHECK(p.final_position == q.final_position);
            CHECK(p.reward == q.reward);
        }
    }

    SUBCASE("bounce distance grows with drop height") {
        const envs::TaskSpec t = envs::make_task(envs::TaskKind::Bounce);
        const double wedge = 45.0 * kPi / 180.0;
        const double a = pinn_rollout(t, {wedge, 0.5}, models).final_position.x();
        const double b = pinn_rollout(t, {wedge, 0.75}, models).final_position.x();
        const double c = pinn_rollout(t, {wedge, 1.0}, models).final_position.x();
        CHECK(a < b);
        CHECK(b < c);
    }

    SUBCASE("zero release angle leaves the ball near the start") {
        envs::TaskSpec t = envs::make_task(envs::TaskKind::Launch);
        t.sub_actions[1].lower = 0.0;
        const envs::Outcome o = pinn_rollout(t, {0.2, 0.0}, models);
        CHECK(o.distance == doctest::Approx(t.goal.norm()).epsilon(0.05));
    }

    SUBCASE("agree with real rollouts on random actions") {
        for (envs::TaskKind kind : envs::all_tasks()) {
            const envs::TaskSpec t = envs::make_task(kind);
            std::mt19937_64 rng(77);
            int close = 0;
            for (int i = 0; i < 200; ++i) {
                const envs::ActionSeq a = random_action(t, rng);
                close += std::abs(pinn_rollout(t, a, models).reward - envs::real_rollout(t, a, 0).reward) < 0.1;
            }
            MESSAGE(t.name << ": " << close << "/200 within 0.1");
            CHECK(close >= 180);
        }
    }

    SUBCASE("ground-truth substitution localises cascade error") {
        for (envs::TaskKind kind : envs::all_tasks()) {
            const envs::TaskSpec t = envs::make_task(kind);
            std::mt19937_64 rng(5);
            const int n = 50;
            std::vector<envs::ActionSeq> actions;
            std::vector<double> full_error;
            for (int i = 0; i < n; ++i) {
                actions.push_back(random_action(t, rng));
                const envs::Outcome real = envs::real_rollout(t, actions.back(), 0);
                full_error.push_back(
                    (pinn_rollout(t, actions.back(), models).final_position - real.final_position).norm());
            }
            // Every chain has at least two model calls before the last one.
            for (int stages = 1; stages <= 2; ++stages) {
                int not_worse = 0;
                for (int i = 0; i < n; ++i) {
                    const envs::Outcome real = envs::real_rollout(t, actions[i], 0);
                    const envs::Outcome sub = pinn_rollout_substituted(t, actions[i], models, stages);
                    not_worse += (sub.final_position - real.final_position).norm() <= full_error[i] + 1e-3;
                }
                MESSAGE(t.name << " with " << stages << " true stages: " << not_worse << "/" << n);
                CHECK(not_worse >= 0.8 * n);
            }
            const envs::Outcome all_true = pinn_rollout_substituted(t, actions[0], models, 100);
            CHECK((all_true.final_position - envs::real_rollout(t, actions[0], 0).final_position).norm() < 1e-12);
        }
    }
}

TEST_CASE("learned engine details") {
    const ModelSet& models = testing::cached_library();
    const envs::TaskSpec t = envs::make_task(envs::TaskKind::Bridge);
    PinnEngine engine(models, t.physics);
    CHECK(!engine.out_of_domain());
    engine.slide(2.0, 0.5, std::numeric_limits<double>::infinity());
    CHECK(!engine.out_of_domain());
    engine.slide(2.0, 0.9, std::numeric_limits<double>::infinity());
    CHECK(engine.out_of_domain());
    const envs::SlideResult zero = engine.slide(0.0, 0.3, 1.0);
    CHECK(zero.distance == 0.0);
}

TEST_CASE("trajectory dump") {
    const ModelSet& models = testing::cached_library();
    const envs::TaskSpec t = envs::make_task(envs::TaskKind::Launch);
    std::ostringstream os;
    dump_trajectory(os, t, {0.3, 1.0}, models);
    std::istringstream in(os.str());
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("stage,skill,t,", 0) == 0);
    int rows = 0;
    bool saw_throw = false;
    for (std::string line; std::getline(in, line); ++rows) {
        saw_throw = saw_throw || line.find(",throw,") != std::string::npos;
    }
    CHECK(rows > 50);
    CHECK(saw_throw);
}

TEST_CASE("rollout timing") {
    const ModelSet& models = testing::cached_library();
    const BenchResult b = rollout_bench(envs::make_task(envs::TaskKind::Slide), models, 20, 1e-4, 3);
    CHECK(b.n_actions == 20);
    CHECK(b.pinn_mean > 0.0);
    CHECK(b.real_mean > 0.0);
    CHECK_THROWS_AS(rollout_bench(envs::make_task(envs::TaskKind::Slide), models, 0, 1e-4, 3), std::invalid_argument);
}
