#include "skillplan/envs.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

using namespace skillplan;
using namespace skillplan::envs;

namespace {

// Release angle whose hit sends the ball `range` metres off the pillar,
// from v = range / sqrt(2h/g), the hit impulse and u^2 = 2gl(1 - cos theta).
double release_for_range(const TaskSpec& t, double range) {
    const Geometry& g = t.geometry;
    const double grav = t.physics.gravity;
    const double ball_speed = range / std::sqrt(2.0 * g.pillar_height / grav);
    const double bob_speed = ball_speed * (g.mass_bob + g.mass_ball) / (g.mass_bob * (1.0 + g.hit_restitution));
    return std::acos(1.0 - bob_speed * bob_speed / (2.0 * grav * t.physics.length));
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("reward and regret") {
    CHECK(reward(0.0, 0.5) == 1.0);
    CHECK(reward(0.5, 0.5) == doctest::Approx(0.3679).epsilon(1e-4));
    CHECK(reward(1.0, 0.5) == doctest::Approx(0.1353).epsilon(1e-3));
    CHECK(reward(0.2, 0.5) > reward(0.3, 0.5));
    CHECK_THROWS_AS(reward(-0.1, 0.5), std::invalid_argument);

    CHECK(regret(0.8, 0.8) == 0.0);
    CHECK(regret(0.4, 0.8) == doctest::Approx(0.5));
    CHECK(regret(1e-12, 0.8) == doctest::Approx(1.0));
    CHECK(regret(0.81, 0.8) == 0.0);
    CHECK_THROWS_AS(regret(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("task definitions") {
    for (TaskKind kind : all_tasks()) {
        const TaskSpec t = make_task(kind);
        CAPTURE(t.name);
        t.validate();
        CHECK(task_from_string(to_string(kind)) == kind);
        CHECK(t.action_dim() == (kind == TaskKind::Bridge ? 3u : 2u));
        CHECK(t.fingerprint() == make_task(kind).fingerprint());
        CHECK(!t.chain().empty());
    }
    CHECK_THROWS_AS(task_from_string("juggle"), std::invalid_argument);

    TaskSpec bad = make_task(TaskKind::Launch);
    bad.goal.setZero();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = make_task(TaskKind::Launch);
    bad.sub_actions[0].lower = 1.0;
    bad.sub_actions[0].upper = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    TaskSpec moved = make_task(TaskKind::Launch);
    moved.goal.x() += 0.1;
    CHECK(moved.fingerprint() != make_task(TaskKind::Launch).fingerprint());

    const TaskSpec launch = make_task(TaskKind::Launch);
    CHECK_THROWS_AS(check_action(launch, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(check_action(launch, {0.0, 0.05}), std::invalid_argument);
    CHECK_THROWS_AS(real_rollout(launch, {0.0, 2.0}, 0), std::invalid_argument);
}

TEST_CASE("launch aimed at the goal lands on it") {
    const TaskSpec t = make_task(TaskKind::Launch);
    const double azimuth = std::atan2(t.goal.y(), t.goal.x());
    const double release = release_for_range(t, t.goal.norm());
    const Outcome o = real_rollout(t, {azimuth, release}, 0);
    CHECK(o.distance < 0.05);
    CHECK(!o.dead_end);
    REQUIRE(o.events.size() == 2);
    CHECK(o.events[0].kind == dynamics::EventKind::PendulumBottom);
    CHECK(o.events[1].kind == dynamics::EventKind::Landing);
    CHECK(o.events[1].time == doctest::Approx(std::sqrt(2.0 * t.geometry.pillar_height / t.physics.gravity)).epsilon(1e-3));
}

TEST_CASE("launch range grows with the release angle") {
    const TaskSpec t = make_task(TaskKind::Launch);
    double previous = 0.0;
    for (double theta = 0.1; theta <= kPi / 2.0; theta += 0.05) {
        const double range = real_rollout(t, {0.0, theta}, 0).final_position.norm();
        CHECK(range > previous);
        previous = range;
    }
}

TEST_CASE("slide with the pendulum at rest leaves the puck in place") {
    TaskSpec t = make_task(TaskKind::Slide);
    t.sub_actions[1].lower = 0.0;
    const Outcome o = real_rollout(t, {0.3, 0.0}, 0);
    CHECK(o.final_position.norm() == 0.0);
    CHECK(o.distance == doctest::Approx(t.goal.norm()));
}

TEST_CASE("slide stops where the closed form says") {
    const TaskSpec t = make_task(TaskKind::Slide);
    const Geometry& g = t.geometry;
    const double theta = 0.8;
    const double u = std::sqrt(2.0 * t.physics.gravity * t.physics.length * (1.0 - std::cos(theta)));
    const double v = g.mass_bob * (1.0 + g.hit_restitution) * u / (g.mass_bob + g.mass_ball);
    const double stop = v * v / (2.0 * g.table_friction * t.physics.gravity);
    const Outcome o = real_rollout(t, {-0.4, theta}, 0);
    CHECK(o.final_position.norm() == doctest::Approx(stop).epsilon(1e-3));
    CHECK(std::atan2(o.final_position.y(), o.final_position.x()) == doctest::Approx(-0.4));
}

TEST_CASE("bounce lands further from higher drops") {
    const TaskSpec t = make_task(TaskKind::Bounce);
    const double wedge = 45.0 * kPi / 180.0;
    const double a = real_rollout(t, {wedge, 0.5}, 0).final_position.x();
    const double b = real_rollout(t, {wedge, 0.75}, 0).final_position.x();
    const double c = real_rollout(t, {wedge, 1.0}, 0).final_position.x();
    CHECK(a < b);
    CHECK(b < c);
    CHECK(real_rollout(t, {wedge, 1.0}, 0).final_position.y() == 0.0);
}

TEST_CASE("bridge alignment decides whether the puck crosses") {
    const TaskSpec t = make_task(TaskKind::Bridge);
    const BestAttainable best = best_attainable(t, 50);
    const ActionSeq aligned = best.action;
    ActionSeq skewed = aligned;
    skewed[0] = aligned[1] + (aligned[1] > 0.0 ? -0.5 : 0.5);
    const Outcome ok = real_rollout(t, aligned, 0);
    const Outcome fell = real_rollout(t, skewed, 0);
    CHECK(fell.dead_end);
    CHECK(fell.distance > ok.distance);
    CHECK(fell.final_position.norm() == doctest::Approx(t.geometry.gap_start / std::cos(aligned[1])));
}

TEST_CASE("rollouts are deterministic and stateless") {
    for (TaskKind kind : all_tasks()) {
        TaskSpec t = make_task(kind);
        ActionSeq a;
        for (const SubAction& s : t.sub_actions) {
            a.push_back(0.3 * s.lower + 0.7 * s.upper);
        }
        const Outcome first = real_rollout(t, a, 4);
        const Outcome again = real_rollout(t, a, 4);
        CHECK(first.final_position == again.final_position);
        CHECK(first.reward == again.reward);
        CHECK(first.reward == doctest::Approx(std::exp(-first.distance / t.d_scale)));

        t.landing_noise = 0.05;
        CHECK(real_rollout(t, a, 1).final_position == real_rollout(t, a, 1).final_position);
        CHECK(real_rollout(t, a, 1).final_position != real_rollout(t, a, 2).final_position);
    }
}

TEST_CASE("best attainable reward") {
    SUBCASE("finer nested grids never do worse") {
        const TaskSpec t = make_task(TaskKind::Bounce);
        const double coarse = best_attainable(t, 10).reward;
        const double fine = best_attainable(t, 19).reward;
        CHECK(fine >= coarse);
        CHECK(best_attainable(t, 19).reward == fine);
    }
    SUBCASE("a goal out of reach caps the optimum") {
        TaskSpec t = make_task(TaskKind::Launch);
        t.goal = {10.0, 0.0};
        const BestAttainable b = best_attainable(t, 50);
        CHECK(b.reward < 1.0);
        CHECK(b.action[1] == doctest::Approx(kPi / 2.0));
    }
    SUBCASE("reachable goals are matched closely") {
        for (TaskKind kind : all_tasks()) {
            CHECK(best_attainable(make_task(kind), 50).reward > 0.9);
        }
    }
    CHECK_THROWS_AS(best_attainable(make_task(TaskKind::Launch), 1), std::invalid_argument);
}

TEST_CASE("task files") {
    const auto path = temp_file("skillplan_task_test.json", R"({
        "task": "slide",
        "goal": [0.5, 0.2],
        "d_scale": 0.25,
        "geometry": {"table_friction": 0.4},
        "sub_actions": [{"name": "azimuth", "lower": -1.0, "upper": 1.0, "unit": "rad"},
                        {"name": "release_angle", "lower": 0.2, "upper": 1.0}]
    })");
    const TaskSpec t = load_task_file(path.string());
    CHECK(t.kind == TaskKind::Slide);
    CHECK(t.goal.x() == 0.5);
    CHECK(t.d_scale == 0.25);
    CHECK(t.geometry.table_friction == 0.4);
    CHECK(t.physics.friction == 0.4);
    CHECK(t.sub_actions[1].lower == 0.2);
    CHECK(t.geometry.gap_width == make_task(TaskKind::Slide).geometry.gap_width);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_task_file("/nonexistent/task.json"), std::runtime_error);
    const auto keyless = temp_file("skillplan_task_keyless.json", R"({"goal": [1, 0]})");
    CHECK_THROWS_AS(load_task_file(keyless.string()), std::runtime_error);
    std::filesystem::remove(keyless);
    const auto broken = temp_file("skillplan_task_broken.json", "{ not json");
    CHECK_THROWS_AS(load_task_file(broken.string()), std::runtime_error);
    std::filesystem::remove(broken);
    const auto bad_bounds = temp_file("skillplan_task_bounds.json",
                                      R"({"task": "launch", "sub_actions": [{"name": "a", "lower": 1, "upper": 0},
                                         {"name": "b", "lower": 0, "upper": 1}]})");
    CHECK_THROWS_AS(load_task_file(bad_bounds.string()), std::invalid_argument);
    std::filesystem::remove(bad_bounds);
}
