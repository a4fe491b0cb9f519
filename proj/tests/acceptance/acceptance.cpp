// Acceptance criteria A1-A9. Prints one PASS/FAIL line per criterion and
// exits non-zero if any selected criterion fails.
//
//   acceptance [--only A3] [--jobs N]
#include "model_cache.hpp"

#include "skillplan/dynamics.hpp"
#include "skillplan/envs.hpp"
#include "skillplan/gp.hpp"
#include "skillplan/net.hpp"
#include "skillplan/parallel.hpp"
#include "skillplan/pinn.hpp"
#include "skillplan/planner.hpp"
#include "skillplan/rng.hpp"
#include "skillplan/rollout.hpp"
#include "skillplan/skill_library.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace skillplan;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

int g_jobs = 1;

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

// Closed-form states, written independently of the library.
void projectile(const dynamics::StateVec& s0, double g, double t, double out[4]) {
    out[0] = s0[0] + s0[2] * t;
    out[1] = s0[1] + s0[3] * t - 0.5 * g * t * t;
    out[2] = s0[2];
    out[3] = s0[3] - g * t;
}

void sliding(double x0, double v0, double mu, double g, double t, double out[2]) {
    const double a = mu * g;
    const double ts = std::min(t, v0 / a);
    out[0] = x0 + v0 * ts - 0.5 * a * ts * ts;
    out[1] = v0 - a * ts;
}

Verdict a1_dynamics() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> speed(0.0, 4.0);
    std::uniform_real_distribution<double> mu(0.05, 0.8);
    const double dt = 1e-3;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        dynamics::PhysParams p;
        const dynamics::StateVec throw0{u(rng), u(rng), u(rng), u(rng)};
        p.friction = mu(rng);
        const dynamics::StateVec slide0{u(rng), speed(rng)};
        dynamics::StateVec s = throw0;
        dynamics::StateVec q = slide0;
        for (int step = 1; step <= 1000; ++step) {
            s = dynamics::rk4_step(SkillKind::Throw, s, p, dt);
            q = dynamics::rk4_step(SkillKind::Slide, q, p, dt);
            double a[4];
            double b[2];
            projectile(throw0, p.gravity, step * dt, a);
            sliding(slide0[0], slide0[1], p.friction, p.gravity, step * dt, b);
            for (int i = 0; i < 4; ++i) {
                worst = std::max(worst, std::abs(a[i] - s[static_cast<std::size_t>(i)]));
            }
            for (int i = 0; i < 2; ++i) {
                worst = std::max(worst, std::abs(b[i] - q[static_cast<std::size_t>(i)]));
            }
        }
    }
    double drift = 0.0;
    const dynamics::PhysParams p;
    auto energy = [&](const dynamics::StateVec& s) {
        return 0.5 * p.length * p.length * s[1] * s[1] - p.gravity * p.length * std::cos(s[0]);
    };
    for (double theta0 : {0.2, 0.8, 1.3, 2.8}) {
        dynamics::StateVec s{theta0, 0.0};
        const double e0 = energy(s);
        for (int step = 0; step < 10000; ++step) {
            s = dynamics::rk4_step(SkillKind::Swing, s, p, dt);
            drift = std::max(drift, std::abs(energy(s) - e0) / std::abs(e0));
        }
    }
    return {worst < 1e-6 && drift < 1e-5,
            "max kinematic error " + fmt(worst) + " (< 1e-6), energy drift " + fmt(drift) + " (< 1e-5)"};
}

Verdict a2_data_efficiency() {
    const std::vector<SkillKind> skills{SkillKind::Slide, SkillKind::Throw, SkillKind::Swing};
    const std::vector<int> sizes{50, 100, 200};
    const int seeds = 5;
    std::vector<std::tuple<SkillKind, int, int>> jobs;
    for (SkillKind s : skills) {
        for (int n : sizes) {
            for (int seed = 0; seed < seeds; ++seed) {
                jobs.emplace_back(s, n, seed);
            }
        }
    }
    std::vector<library::EfficiencyRow> rows(jobs.size());
    const library::EfficiencyConfig config;
    parallel_for(jobs.size(), g_jobs, [&](std::size_t i) {
        const auto& [s, n, seed] = jobs[i];
        rows[i] = library::data_efficiency_cell(s, n, static_cast<std::uint64_t>(seed), config);
    });
    bool pass = true;
    std::ostringstream detail;
    for (std::size_t c = 0; c < rows.size(); c += seeds) {
        int wins = 0;
        for (int k = 0; k < seeds; ++k) {
            wins += rows[c + static_cast<std::size_t>(k)].rmse_pinn <= rows[c + static_cast<std::size_t>(k)].rmse_nn;
        }
        pass = pass && wins >= 4;
        detail << to_string(rows[c].skill) << '@' << rows[c].n_u << ' ' << wins << "/5 ";
    }
    return {pass, detail.str() + "(need >= 4/5 per cell)"};
}

Verdict a3_inverse() {
    std::vector<double> estimates(5);
    parallel_for(estimates.size(), g_jobs, [&](std::size_t i) {
        const std::uint64_t seed = i;
        dynamics::PhysParams truth;
        truth.friction = 0.3;
        pinn::DatasetConfig data;
        data.n_rollouts = 32;
        data.samples_per_rollout = 25;
        data.seed = substream_seed(seed, "dataset");
        const pinn::TrainSet set = pinn::generate_dataset(pinn::make_schema(SkillKind::Slide), truth, data);
        dynamics::PhysParams guess = truth;
        guess.friction = 0.5;
        pinn::PinnModel m = pinn::PinnModel::create(pinn::make_schema(SkillKind::Slide), guess,
                                                    substream_seed(seed, "init"));
        m.latent = pinn::LatentParam{"friction", 0.5, 0.0, 1.0};
        pinn::TrainConfig tc;
        tc.max_cycles = 1000;
        tc.optimizer.kind = net::OptimizerKind::Lbfgs;
        tc.optimizer.learning_rate = 0.01;
        estimates[i] = pinn::train_inverse(m, set, tc).estimate;
    });
    int good = 0;
    std::ostringstream detail;
    detail << "mu estimates";
    for (double e : estimates) {
        good += std::abs(e - 0.3) < 0.05;
        detail << ' ' << fmt(e, 5);
    }
    detail << "; " << good << "/5 within 0.05 (need >= 4)";
    return {good >= 4, detail.str()};
}

Verdict a4_gradients() {
    std::mt19937_64 rng(404);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        std::vector<int> widths{std::uniform_int_distribution<int>(1, 4)(rng)};
        const int hidden = std::uniform_int_distribution<int>(1, 4)(rng);
        for (int l = 0; l < hidden; ++l) {
            widths.push_back(std::uniform_int_distribution<int>(2, 12)(rng));
        }
        widths.push_back(std::uniform_int_distribution<int>(1, 3)(rng));
        net::NetParams p = net::init_xavier(widths, rng());
        std::normal_distribution<double> n01(0.0, 0.1);
        for (Eigen::Index i = 0; i < p.values().size(); ++i) {
            p.values()[i] += n01(rng);
        }
        const int batch = 5;
        Eigen::MatrixXd x(widths.front(), batch);
        Eigen::MatrixXd c(widths.back(), batch);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x.data()[i] = u(rng);
        }
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            c.data()[i] = u(rng);
        }
        const net::GradBuffer g = net::backward(p, x, c);
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < p.values().size(); ++i) {
            const double saved = p.values()[i];
            p.values()[i] = saved + h;
            const double up = (c.array() * net::forward(p, x).array()).sum();
            p.values()[i] = saved - h;
            const double down = (c.array() * net::forward(p, x).array()).sum();
            p.values()[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double scale = std::max({std::abs(fd), std::abs(g.values[i]), 1e-6});
            worst = std::max(worst, std::abs(fd - g.values[i]) / scale);
        }
    }
    return {worst < 1e-4, "max relative error " + fmt(worst) + " over 20 networks (< 1e-4)"};
}

Verdict a5_planner() {
    const int d = 20;
    const int k = 5 * d;
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::vector<envs::SubAction> subs{{"a0", 0.0, 1.0, ""}, {"a1", -1.0, 1.0, ""}};
        const planner::SampleGrid grid = planner::gen_action_samples(subs, d, seed);
        std::mt19937_64 crng = substream(seed, "targets");
        const double c0 = std::uniform_real_distribution<double>(0.0, 1.0)(crng);
        const double c1 = std::uniform_real_distribution<double>(-1.0, 1.0)(crng);
        auto f = [c0](double a) { return 1.0 - std::abs(a - c0); };
        auto g = [c1](double a) { return 1.0 - 0.5 * std::abs(a - c1); };
        const planner::LeafEvaluator evaluate = [&](const envs::ActionSeq& a) {
            const double r = 0.5 * (f(a[0]) + g(a[1]));
            return planner::LeafValue{r, r};
        };
        // Brute force over the grid: separable, so per-dimension argmax.
        const double best0 = *std::max_element(grid.samples[0].begin(), grid.samples[0].end(),
                                               [&](double x, double y) { return f(x) < f(y); });
        const double best1 = *std::max_element(grid.samples[1].begin(), grid.samples[1].end(),
                                               [&](double x, double y) { return g(x) < g(y); });
        planner::NodeStats stats(grid);
        std::mt19937_64 rng = substream(seed, "ucb");
        const planner::ActionChoice choice = planner::gen_action(grid, evaluate, stats, k, 1.0, rng);
        hits += choice.action[0] == best0 && choice.action[1] == best1;
    }
    std::ostringstream detail;
    detail << hits << "/50 seeds return the grid argmax (D=" << d << ", K=" << k << ", need 50/50)";
    return {hits == 50, detail.str()};
}

Verdict a6_gp() {
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    gp::Hyperparams h;
    h.noise_var = 1e-10;
    gp::GpDataset data(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3), h);
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (int i = 0; i < 10; ++i) {
        xs.push_back({u(rng), u(rng), u(rng)});
        ys.push_back(0.2 * (u(rng) - 0.5));
        data.add(xs.back(), ys.back());
    }
    double interp = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        interp = std::max(interp, std::abs(data.posterior(xs[i]).mean - ys[i]));
    }
    const double prior = h.signal_sd * h.signal_sd;
    double worst_excess = -prior;
    for (int i = 0; i < 1000; ++i) {
        const double sd = data.posterior({u(rng), u(rng), u(rng)}).sd;
        worst_excess = std::max(worst_excess, sd * sd - prior);
    }
    return {interp < 1e-6 && worst_excess <= 0.0,
            "interpolation error " + fmt(interp) + " (< 1e-6), max variance - prior " + fmt(worst_excess) + " (<= 0)"};
}

struct RegretSummary {
    double mean = 0.0;
    double sd = 0.0;
};

RegretSummary summarise(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return {m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
}

std::vector<double> planner_regrets(const envs::TaskSpec& task, const planner::PlanConfig& config, int seeds) {
    const rollout::ModelSet& models = testing::cached_library();
    envs::best_attainable(task, config.best_resolution);
    std::vector<double> out(static_cast<std::size_t>(seeds));
    parallel_for(out.size(), g_jobs, [&](std::size_t i) {
        out[i] = planner::gen_plan(task, models, config, i).final_regret();
    });
    return out;
}

std::vector<double> random_regrets(const envs::TaskSpec& task, int trials, int seeds) {
    std::vector<double> out(static_cast<std::size_t>(seeds));
    for (int i = 0; i < seeds; ++i) {
        out[static_cast<std::size_t>(i)] =
            planner::random_policy(task, trials, static_cast<std::uint64_t>(i)).final_regret();
    }
    return out;
}

Verdict a7_regret() {
    const planner::PlanConfig config;
    bool bound = true;
    bool beats_random = true;
    std::ostringstream detail;
    for (envs::TaskKind kind : envs::all_tasks()) {
        const envs::TaskSpec task = envs::make_task(kind);
        const RegretSummary plan = summarise(planner_regrets(task, config, 10));
        const RegretSummary rnd = summarise(random_regrets(task, config.trials, 10));
        bound = bound && plan.mean <= 0.20;
        beats_random = beats_random && plan.mean <= rnd.mean;
        detail << task.name << ' ' << fmt(plan.mean, 3) << "+-" << fmt(plan.sd, 2) << " (random " << fmt(rnd.mean, 3)
               << ") ";
    }
    detail << "| bound <= 0.20 on every task: " << (bound ? "yes" : "no")
           << ", <= random on every task: " << (beats_random ? "yes" : "no");
    return {bound && beats_random, detail.str()};
}

Verdict a8_adaptation() {
    const envs::TaskSpec task = envs::make_task(envs::TaskKind::Bounce);
    planner::PlanConfig adapt;
    planner::PlanConfig frozen;
    frozen.adapt = false;
    const RegretSummary a = summarise(planner_regrets(task, adapt, 10));
    const RegretSummary b = summarise(planner_regrets(task, frozen, 10));
    return {a.mean <= b.mean,
            "bounce regret at T=5: adaptive " + fmt(a.mean, 3) + "+-" + fmt(a.sd, 2) + ", no-adapt " + fmt(b.mean, 3) +
                "+-" + fmt(b.sd, 2)};
}

Verdict a9_speedup() {
    const rollout::ModelSet& models = testing::cached_library();
    bool pass = true;
    std::ostringstream detail;
    for (envs::TaskKind kind : envs::all_tasks()) {
        const envs::TaskSpec task = envs::make_task(kind);
        const rollout::BenchResult b = rollout::rollout_bench(task, models, 200, 1e-4, 9);
        pass = pass && b.speedup() >= 10.0;
        detail << task.name << ' ' << fmt(b.speedup(), 3) << "x (" << fmt(b.pinn_mean * 1e3, 3) << " ms vs "
               << fmt(b.real_mean * 1e3, 3) << " ms) ";
    }
    return {pass, detail.str() + "(need >= 10x on every task)"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"A1", a1_dynamics}, {"A2", a2_data_efficiency}, {"A3", a3_inverse},
        {"A4", a4_gradients}, {"A5", a5_planner},        {"A6", a6_gp},
        {"A7", a7_regret},   {"A8", a8_adaptation},      {"A9", a9_speedup},
    };
    std::string only;
    g_jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            only = argv[++i];
        } else if (arg == "--jobs" && i + 1 < argc) {
            g_jobs = std::stoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--only A#] [--jobs N]\n";
            return 2;
        }
    }
    bool all_pass = true;
    bool matched = false;
    for (const auto& [id, run] : criteria) {
        if (!only.empty() && only != id) {
            continue;
        }
        matched = true;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << id << ' ' << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << "  [" << fmt(secs, 3) << " s]"
                  << std::endl;
        all_pass = all_pass && v.pass;
    }
    if (!matched) {
        std::cerr << "unknown criterion '" << only << "'\n";
        return 2;
    }
    return all_pass ? 0 : 1;
}
