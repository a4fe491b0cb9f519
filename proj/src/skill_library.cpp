#include "skillplan/skill_library.hpp"

#include "skillplan/envs.hpp"
#include "skillplan/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace skillplan::library {
namespace {

int scaled(int n, double scale) {
    return std::max(1, static_cast<int>(std::lround(n * scale)));
}

}  // namespace

dynamics::PhysParams library_physics(SkillKind kind) {
    const envs::TaskSpec scene = envs::make_task(envs::TaskKind::Launch);
    dynamics::PhysParams p = scene.physics;
    if (kind == SkillKind::Hit) {
        p.restitution = scene.geometry.hit_restitution;
    }
    return p;
}

std::vector<SkillRecipe> standard_recipes(const LibraryConfig& config) {
    struct Size {
        SkillKind kind;
        int rollouts;
        int per_rollout;
    };
    const Size sizes[] = {
        {SkillKind::Swing, 40, 25}, {SkillKind::Hit, 20, 25},   {SkillKind::Throw, 100, 10},
        {SkillKind::Bounce, 40, 25}, {SkillKind::Slide, 100, 10},
    };
    std::vector<SkillRecipe> recipes;
    for (const Size& s : sizes) {
        SkillRecipe r;
        r.kind = s.kind;
        r.generalized = s.kind == SkillKind::Slide;
        const std::string name(to_string(s.kind));
        r.data.n_rollouts = scaled(s.rollouts, config.size_scale);
        r.data.samples_per_rollout = s.per_rollout;
        r.data.seed = substream_seed(config.seed, "dataset:" + name);
        r.train.epsilon = config.epsilon;
        r.train.max_cycles = config.max_cycles;
        r.train.optimizer.kind = config.optimizer;
        r.train.optimizer.learning_rate = config.learning_rate;
        r.init_seed = substream_seed(config.seed, "init:" + name);
        r.hidden_layers = config.hidden_layers;
        r.hidden_width = config.hidden_width;
        recipes.push_back(r);
    }
    return recipes;
}

pinn::PinnModel train_recipe(const SkillRecipe& recipe) {
    const dynamics::PhysParams phys = library_physics(recipe.kind);
    if (recipe.generalized) {
        return pinn::train_generalized(recipe.kind, recipe.parameter_lower, recipe.parameter_upper, phys, recipe.data,
                                       recipe.train, recipe.init_seed, recipe.hidden_layers, recipe.hidden_width);
    }
    const pinn::SkillSchema schema = pinn::make_schema(recipe.kind);
    const pinn::TrainSet set = pinn::generate_dataset(schema, phys, recipe.data);
    pinn::PinnModel model =
        pinn::PinnModel::create(schema, phys, recipe.init_seed, recipe.hidden_layers, recipe.hidden_width);
    pinn::train(model, set, recipe.train);
    return model;
}

rollout::ModelSet train_library(const LibraryConfig& config,
                                const std::function<void(const pinn::PinnModel&)>& progress) {
    rollout::ModelSet set;
    for (const SkillRecipe& r : standard_recipes(config)) {
        pinn::PinnModel m = train_recipe(r);
        if (progress) {
            progress(m);
        }
        set.put(std::move(m));
    }
    return set;
}

EfficiencyRow data_efficiency_cell(SkillKind skill, int n_u, std::uint64_t seed, const EfficiencyConfig& config) {
    if (n_u < config.samples_per_rollout || n_u % config.samples_per_rollout != 0) {
        throw std::invalid_argument("N_u must be a positive multiple of samples_per_rollout");
    }
    const pinn::SkillSchema schema = pinn::make_schema(skill);
    if (!schema.has_ode) {
        throw std::invalid_argument("data-efficiency comparison needs a skill with an ODE");
    }
    const dynamics::PhysParams phys = library_physics(skill);
    pinn::DatasetConfig data;
    data.n_rollouts = n_u / config.samples_per_rollout;
    data.samples_per_rollout = config.samples_per_rollout;
    data.seed = substream_seed(seed, "dataset");
    const pinn::TrainSet set = pinn::generate_dataset(schema, phys, data);

    pinn::DatasetConfig held_out;
    held_out.n_rollouts = config.validation_rollouts;
    held_out.samples_per_rollout = config.validation_samples;
    held_out.seed = config.validation_seed;
    held_out.collocation_ratio = 0.0;
    const pinn::TrainSet val = pinn::generate_dataset(schema, phys, held_out);

    pinn::TrainConfig tc;
    tc.max_cycles = config.max_cycles;
    tc.optimizer.kind = config.optimizer;
    tc.optimizer.learning_rate = config.learning_rate;
    const std::uint64_t init = substream_seed(seed, "init");

    EfficiencyRow row;
    row.skill = skill;
    row.n_u = n_u;
    row.seed = seed;
    pinn::PinnModel physics_informed = pinn::PinnModel::create(schema, phys, init);
    tc.epsilon = config.epsilon;
    pinn::train(physics_informed, set, tc);
    row.rmse_pinn = pinn::validation_rmse(physics_informed, val.inputs, val.targets);
    pinn::PinnModel supervised = pinn::PinnModel::create(schema, phys, init);
    tc.epsilon = 0.0;
    pinn::train(supervised, set, tc);
    row.rmse_nn = pinn::validation_rmse(supervised, val.inputs, val.targets);
    return row;
}

std::string output_units(SkillKind skill) {
    switch (skill) {
        case SkillKind::Swing:
            return "rad;rad/s";
        case SkillKind::Slide:
            return "m;m/s";
        case SkillKind::Throw:
            return "m/s;m;m";
        case SkillKind::Bounce:
            return "m/s;m/s";
        case SkillKind::Hit:
            return "m/s";
    }
    return "";
}

std::string library_key(const LibraryConfig& config) {
    std::ostringstream os;
    os.precision(17);
    os << "seed=" << config.seed << " eps=" << config.epsilon << " cycles=" << config.max_cycles
       << " opt=" << net::to_string(config.optimizer) << " lr=" << config.learning_rate
       << " scale=" << config.size_scale << " net=" << config.hidden_layers << 'x' << config.hidden_width;
    return os.str();
}

}  // namespace skillplan::library
