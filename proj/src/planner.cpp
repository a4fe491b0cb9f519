#include "skillplan/planner.hpp"

#include "skillplan/rng.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace skillplan::planner {

SampleGrid gen_action_samples(const std::vector<envs::SubAction>& sub_actions, int d, std::uint64_t seed) {
    if (d < 2) {
        throw std::invalid_argument("discretisation factor must be at least 2");
    }
    std::mt19937_64 rng = substream(seed, "grid");
    SampleGrid grid;
    for (const envs::SubAction& s : sub_actions) {
        std::vector<double> values(static_cast<std::size_t>(d));
        if (s.lower == s.upper) {
            std::fill(values.begin(), values.end(), s.lower);
        } else {
            std::uniform_real_distribution<double> u(s.lower, s.upper);
            for (double& v : values) {
                v = u(rng);
            }
        }
        grid.samples.push_back(std::move(values));
    }
    return grid;
}

NodeStats::NodeStats(const SampleGrid& grid) {
    for (const auto& row : grid.samples) {
        v_.emplace_back(row.size(), 0.0);
        n_.emplace_back(row.size(), 0);
    }
}

long NodeStats::total_visits(std::size_t depth) const {
    long total = 0;
    for (long n : n_[depth]) {
        total += n;
    }
    return total;
}

std::size_t NodeStats::select(std::size_t depth, double alpha, std::mt19937_64& rng) const {
    const auto& n = n_[depth];
    const auto& v = v_[depth];
    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < n.size(); ++j) {
        if (n[j] == 0) {
            candidates.push_back(j);
        }
    }
    if (candidates.empty()) {
        const double log_total = std::log(static_cast<double>(total_visits(depth)));
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n.size(); ++j) {
            const double score = v[j] + alpha * std::sqrt(log_total / static_cast<double>(n[j]));
            if (score > best) {
                best = score;
                candidates.assign(1, j);
            } else if (score == best) {
                candidates.push_back(j);
            }
        }
    }
    if (candidates.size() == 1) {
        return candidates.front();
    }
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)];
}

void NodeStats::update(std::size_t depth, std::size_t j, double reward) {
    const long count = ++n_[depth][j];
    v_[depth][j] += (reward - v_[depth][j]) / static_cast<double>(count);
}

void NodeStats::set(std::size_t depth, std::size_t j, double value, long visits) {
    if (visits < 0) {
        throw std::invalid_argument("visit counts are non-negative");
    }
    v_[depth][j] = value;
    n_[depth][j] = visits;
}

double pinn_mcts(const SampleGrid& grid, std::size_t depth, envs::ActionSeq& partial, const LeafEvaluator& evaluate,
                 NodeStats& stats, double alpha, std::mt19937_64& rng, LeafValue* leaf) {
    if (depth > grid.depth()) {
        throw std::invalid_argument("pinn_mcts depth beyond the action tuple");
    }
    if (depth == grid.depth()) {
        const LeafValue value = evaluate(partial);
        if (leaf != nullptr) {
            *leaf = value;
        }
        return value.corrected;
    }
    const std::size_t j = stats.select(depth, alpha, rng);
    partial.push_back(grid.samples[depth][j]);
    const double reward = pinn_mcts(grid, depth + 1, partial, evaluate, stats, alpha, rng, leaf);
    stats.update(depth, j, reward);
    return reward;
}

ActionChoice gen_action(const SampleGrid& grid, const LeafEvaluator& evaluate, NodeStats& stats, int k,
                        double alpha, std::mt19937_64& rng) {
    if (k < 1) {
        throw std::invalid_argument("gen_action needs at least one iteration");
    }
    ActionChoice best;
    best.value.corrected = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < k; ++it) {
        envs::ActionSeq path;
        path.reserve(grid.depth());
        LeafValue leaf;
        const double r = pinn_mcts(grid, 0, path, evaluate, stats, alpha, rng, &leaf);
        if (r > best.value.corrected) {
            best.value = leaf;
            best.action = path;
        }
        best.evaluated.push_back(std::move(path));
    }
    return best;
}

TrialLog gen_plan(const envs::TaskSpec& task, const rollout::ModelSet& models, const PlanConfig& config,
                  std::uint64_t seed) {
    if (config.trials < 1) {
        throw std::invalid_argument("gen_plan needs at least one trial");
    }
    if (!(config.beta >= 0.0)) {
        throw std::invalid_argument("beta must be non-negative");
    }
    task.validate();
    if (config.source == RewardSource::Pinn) {
        models.require_chain(task);
    }
    const std::size_t n = task.action_dim();
    Eigen::VectorXd lower(static_cast<Eigen::Index>(n));
    Eigen::VectorXd upper(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        lower[static_cast<Eigen::Index>(i)] = task.sub_actions[i].lower;
        upper[static_cast<Eigen::Index>(i)] = task.sub_actions[i].upper;
    }
    gp::GpDataset gp(lower, upper, config.gp);

    // Noise-free model reward of an action; memoised because the grid is
    // finite and tuples recur across iterations and trials.
    std::map<envs::ActionSeq, double> cache;
    auto model_reward = [&](const envs::ActionSeq& a) {
        if (auto it = cache.find(a); it != cache.end()) {
            return it->second;
        }
        const double r = config.source == RewardSource::Pinn ? rollout::pinn_rollout(task, a, models, config.scan).reward
                                                             : envs::real_rollout(task, a, 0, config.dt).reward;
        cache.emplace(a, r);
        return r;
    };
    const LeafEvaluator evaluate = [&](const envs::ActionSeq& a) {
        const double raw = model_reward(a);
        const double corrected = config.adapt ? gp::ucb_correct(raw, gp, a, config.beta) : raw;
        return LeafValue{raw, corrected};
    };

    TrialLog log;
    log.task = task.name;
    log.seed = seed;
    log.best_attainable = envs::best_attainable(task, config.best_resolution).reward;
    const SampleGrid grid = gen_action_samples(task.sub_actions, config.discretization, seed);
    NodeStats stats(grid);
    std::mt19937_64 ucb_rng = substream(seed, "ucb");
    std::size_t jitter_notes = 0;
    double best_real = 0.0;
    for (int t = 0; t < config.trials; ++t) {
        const ActionChoice choice = gen_action(grid, evaluate, stats, config.iterations, config.alpha, ucb_rng);
        const envs::Outcome real = envs::real_rollout(task, choice.action, substream_seed(seed, "trial") + t, config.dt);
        TrialRecord rec;
        rec.trial = t + 1;
        rec.action = choice.action;
        rec.r_sim = choice.value.raw;
        rec.r_corrected = choice.value.corrected;
        rec.r_real = real.reward;
        rec.eta = real.reward - choice.value.raw;
        best_real = std::max(best_real, real.reward);
        rec.best_real = best_real;
        rec.regret = envs::regret(best_real, log.best_attainable);
        log.trials.push_back(rec);
        if (config.adapt) {
            gp.add(choice.action, rec.eta);
            for (; jitter_notes < gp.fit_log().size(); ++jitter_notes) {
                log.notes.push_back(gp.fit_log()[jitter_notes]);
            }
        }
    }
    return log;
}

TrialLog random_policy(const envs::TaskSpec& task, int trials, std::uint64_t seed, double dt, int best_resolution) {
    if (trials < 1) {
        throw std::invalid_argument("random_policy needs at least one trial");
    }
    task.validate();
    TrialLog log;
    log.task = task.name;
    log.seed = seed;
    log.best_attainable = envs::best_attainable(task, best_resolution).reward;
    std::mt19937_64 rng = substream(seed, "random_policy");
    double best_real = 0.0;
    for (int t = 0; t < trials; ++t) {
        envs::ActionSeq a;
        for (const envs::SubAction& s : task.sub_actions) {
            a.push_back(s.lower == s.upper ? s.lower : std::uniform_real_distribution<double>(s.lower, s.upper)(rng));
        }
        const envs::Outcome real = envs::real_rollout(task, a, substream_seed(seed, "trial") + t, dt);
        TrialRecord rec;
        rec.trial = t + 1;
        rec.action = a;
        rec.r_real = real.reward;
        best_real = std::max(best_real, real.reward);
        rec.best_real = best_real;
        rec.regret = envs::regret(best_real, log.best_attainable);
        log.trials.push_back(rec);
    }
    return log;
}

void write_trial_log(std::ostream& os, const TrialLog& log) {
    const std::size_t n = log.trials.empty() ? 0 : log.trials.front().action.size();
    os << "trial";
    for (std::size_t i = 0; i < n; ++i) {
        os << ",a" << i;
    }
    os << ",r_sim,r_corrected,r_real,eta,best_real,regret\n";
    os.precision(10);
    for (const TrialRecord& r : log.trials) {
        os << r.trial;
        for (double a : r.action) {
            os << ',' << a;
        }
        os << ',' << r.r_sim << ',' << r.r_corrected << ',' << r.r_real << ',' << r.eta << ',' << r.best_real << ','
           << r.regret << '\n';
    }
}

}  // namespace skillplan::planner
