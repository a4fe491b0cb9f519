#pragma once

#include "skillplan/envs.hpp"
#include "skillplan/gp.hpp"
#include "skillplan/rollout.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <vector>

namespace skillplan::planner {

/// D uniform samples per sub-action, drawn once per planning run.
struct SampleGrid {
    std::vector<std::vector<double>> samples;  // samples[i][j]: j-th value of sub-action i

    std::size_t depth() const { return samples.size(); }
    std::size_t width(std::size_t i) const { return samples[i].size(); }
};

SampleGrid gen_action_samples(const std::vector<envs::SubAction>& sub_actions, int d, std::uint64_t seed);

/// Value and visit tables indexed by (depth, sample), shared by every path
/// through the search.
class NodeStats {
public:
    explicit NodeStats(const SampleGrid& grid);

    /// Unvisited samples first (uniformly among them), then the maximiser of
    /// v + alpha * sqrt(log(sum n) / n_j) with random tie-breaks.
    std::size_t select(std::size_t depth, double alpha, std::mt19937_64& rng) const;
    /// Running-mean update of v[depth][j] with `reward`.
    void update(std::size_t depth, std::size_t j, double reward);

    double value(std::size_t depth, std::size_t j) const { return v_[depth][j]; }
    long visits(std::size_t depth, std::size_t j) const { return n_[depth][j]; }
    long total_visits(std::size_t depth) const;

    /// Direct access for tests and diagnostics.
    void set(std::size_t depth, std::size_t j, double value, long visits);

private:
    std::vector<std::vector<double>> v_;
    std::vector<std::vector<long>> n_;
};

struct LeafValue {
    double raw = 0.0;        // model-predicted reward
    double corrected = 0.0;  // after any discrepancy correction
};

/// Scores a complete action tuple.
using LeafEvaluator = std::function<LeafValue(const envs::ActionSeq&)>;

/// One descent from `depth`: picks a sample per remaining depth by UCB,
/// appending to `partial`, evaluates the leaf, and credits the corrected
/// reward back up the path. Returns the corrected reward; `leaf` receives both
/// values.
double pinn_mcts(const SampleGrid& grid, std::size_t depth, envs::ActionSeq& partial, const LeafEvaluator& evaluate,
                 NodeStats& stats, double alpha, std::mt19937_64& rng, LeafValue* leaf = nullptr);

struct ActionChoice {
    envs::ActionSeq action;
    LeafValue value;
    std::vector<envs::ActionSeq> evaluated;  // every tuple scored, in order
};

/// Runs pinn_mcts `k` times from the root and returns the tuple with the
/// highest corrected reward.
ActionChoice gen_action(const SampleGrid& grid, const LeafEvaluator& evaluate, NodeStats& stats, int k,
                        double alpha, std::mt19937_64& rng);

enum class RewardSource {
    Pinn,    // cascaded skill networks
    Oracle,  // ground-truth rollouts (ablation)
};

struct PlanConfig {
    int trials = 5;           // T
    int discretization = 20;  // D
    int iterations = 200;     // K
    double alpha = 1.0;
    double beta = 0.25;
    bool adapt = true;  // GP correction of the model reward
    RewardSource source = RewardSource::Pinn;
    gp::Hyperparams gp;
    rollout::ScanConfig scan;
    double dt = 1e-3;           // real rollouts
    int best_resolution = 50;   // grid for the attainable optimum
};

struct TrialRecord {
    int trial = 0;
    envs::ActionSeq action;
    double r_sim = 0.0;        // model-predicted reward
    double r_corrected = 0.0;  // what the planner maximised
    double r_real = 0.0;
    double eta = 0.0;          // r_real - r_sim
    double best_real = 0.0;    // running best real reward
    double regret = 0.0;       // of best_real against the attainable optimum
};

struct TrialLog {
    std::string task;
    std::uint64_t seed = 0;
    double best_attainable = 0.0;
    std::vector<TrialRecord> trials;
    std::vector<std::string> notes;  // e.g. GP jitter escalations

    double final_regret() const { return trials.empty() ? 1.0 : trials.back().regret; }
};

/// Planning loop: per trial, choose an action against the (corrected) model
/// reward, execute it for real, and fold the discrepancy into the GP. The
/// sample grid and node statistics persist across trials.
TrialLog gen_plan(const envs::TaskSpec& task, const rollout::ModelSet& models, const PlanConfig& config,
                  std::uint64_t seed);

/// T uniformly random actions executed for real.
TrialLog random_policy(const envs::TaskSpec& task, int trials, std::uint64_t seed, double dt = 1e-3,
                       int best_resolution = 50);

/// CSV: trial,a0..aN-1,r_sim,r_corrected,r_real,eta,best_real,regret
void write_trial_log(std::ostream& os, const TrialLog& log);

}  // namespace skillplan::planner
