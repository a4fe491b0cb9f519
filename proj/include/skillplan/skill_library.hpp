#pragma once

#include "skillplan/pinn.hpp"
#include "skillplan/rollout.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace skillplan::library {

/// How one skill model of the task library is trained.
struct SkillRecipe {
    SkillKind kind = SkillKind::Swing;
    bool generalized = false;  // slide: friction as an input
    double parameter_lower = 0.25;
    double parameter_upper = 0.6;
    pinn::DatasetConfig data;
    pinn::TrainConfig train;
    std::uint64_t init_seed = 0;
    int hidden_layers = 8;
    int hidden_width = 40;
};

struct LibraryConfig {
    std::uint64_t seed = 0;
    double epsilon = 0.1;
    int max_cycles = 3000;
    net::OptimizerKind optimizer = net::OptimizerKind::Lbfgs;
    double learning_rate = 0.01;
    double size_scale = 1.0;  // multiplies every dataset size
    int hidden_layers = 8;
    int hidden_width = 40;
};

/// Physics constants the library models are trained under: those of the
/// default task scene (hit restitution on the hit model).
dynamics::PhysParams library_physics(SkillKind kind);

/// Recipes for every model the four tasks need: swing, hit, throw, bounce and
/// a friction-generalised slide model covering table and bridge.
std::vector<SkillRecipe> standard_recipes(const LibraryConfig& config);

pinn::PinnModel train_recipe(const SkillRecipe& recipe);

/// Trains every standard recipe. `progress` (optional) is told about each
/// finished model.
rollout::ModelSet train_library(const LibraryConfig& config,
                                const std::function<void(const pinn::PinnModel&)>& progress = {});

struct EfficiencyConfig {
    double epsilon = 0.1;
    int max_cycles = 2000;
    net::OptimizerKind optimizer = net::OptimizerKind::Lbfgs;
    double learning_rate = 0.01;
    int samples_per_rollout = 5;
    int validation_rollouts = 40;
    int validation_samples = 25;
    std::uint64_t validation_seed = 7919;
};

struct EfficiencyRow {
    SkillKind skill = SkillKind::Slide;
    int n_u = 0;
    std::uint64_t seed = 0;
    double rmse_pinn = 0.0;  // epsilon > 0
    double rmse_nn = 0.0;    // epsilon = 0, same data and initial weights
};

/// Trains the physics-informed and the purely supervised model on the same
/// N_u samples (N_u / samples_per_rollout rollouts) from the same initial
/// weights and reports held-out RMSE of both, in physical units.
EfficiencyRow data_efficiency_cell(SkillKind skill, int n_u, std::uint64_t seed, const EfficiencyConfig& config);

/// Units of a skill's outputs in schema order, e.g. "m;m/s".
std::string output_units(SkillKind skill);

/// Text digest of a library configuration (for cache keys and manifests).
std::string library_key(const LibraryConfig& config);

}  // namespace skillplan::library
