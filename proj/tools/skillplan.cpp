#include "skillplan/envs.hpp"
#include "skillplan/model_io.hpp"
#include "skillplan/parallel.hpp"
#include "skillplan/pinn.hpp"
#include "skillplan/planner.hpp"
#include "skillplan/rng.hpp"
#include "skillplan/rollout.hpp"
#include "skillplan/skill_library.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef SKILLPLAN_VERSION
#define SKILLPLAN_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace skillplan;

namespace {

const std::vector<std::string> kSkillNames{"swing", "slide", "throw", "bounce", "hit"};
const std::vector<std::string> kTaskNames{"launch", "slide", "bounce", "bridge"};

struct TrainOptions {
    std::string skill;
    int n_rollouts = 20;
    int samples_per_rollout = 25;
    double noise = 0.0;
    double collocation_ratio = 4.0;
    double epsilon = 0.1;
    std::string optimizer = "adam";
    double learning_rate = 0.0;  // 0: optimizer default
    int cycles = 6400;
    int layers = 8;
    int width = 40;
    std::uint64_t seed = 0;
    bool inverse = false;
    double true_mu = 0.3;
    double mu_init = 0.5;
    std::vector<double> mu_bounds{0.0, 1.0};
    bool generalized = false;
    std::vector<double> mu_range{0.25, 0.6};
    double size_scale = 1.0;
    bool dataset = false;
    std::string out = "models";
};

struct EvalOptions {
    std::string model;
    int n_rollouts = 40;
    int samples_per_rollout = 25;
    std::uint64_t seed = 7919;
    std::string out;
};

struct ExperimentOptions {
    std::vector<std::string> tasks{"launch"};
    std::string task_file;
    std::string models;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    int trials = 5;
    int discretization = 20;
    int iterations = 200;
    double alpha = 1.0;
    double beta = 0.25;
    bool no_adapt = false;
    bool random_baseline = false;
    bool oracle_reward = false;
    double dt = 1e-3;
    int best_resolution = 50;
    int scan_points = 200;
    bool trajectories = false;
    int jobs = 1;
    std::string out = "results";
};

struct BenchOptions {
    std::vector<std::string> tasks{"launch", "slide", "bounce", "bridge"};
    std::string models;
    int n_actions = 200;
    double dt = 1e-4;
    std::uint64_t seed = 0;
    int scan_points = 200;
    std::string out = "results";
};

struct EfficiencyOptions {
    std::vector<std::string> skills{"slide", "throw", "swing"};
    std::vector<int> n_u{50, 100, 200};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    double epsilon = 0.1;
    int cycles = 2000;
    std::string optimizer = "lbfgs";
    double learning_rate = 0.01;
    int samples_per_rollout = 5;
    int jobs = 1;
    std::string out = "results";
};

struct BestOptions {
    std::vector<std::string> tasks{"launch", "slide", "bounce", "bridge"};
    int resolution = 50;
    std::string out = "results";
};

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// The run's options as an INI section that `--config` reads back.
std::string command_config(const CLI::App& sub) {
    return "[" + sub.get_name() + "]\n" + sub.config_to_str(true, false);
}

std::string config_hash(const std::string& config_text) {
    return hex(substream_seed(0, config_text));
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    return os;
}

// Writes the effective configuration (reloadable with --config) and a JSON
// manifest next to the outputs.
void write_manifest(const fs::path& dir, const std::string& command, const std::string& config_text,
                    const std::vector<std::uint64_t>& seeds) {
    fs::create_directories(dir);
    open_output(dir / (command + ".ini")) << config_text;
    nlohmann::ordered_json m;
    m["command"] = command;
    m["version"] = SKILLPLAN_VERSION;
    m["model_format"] = model_io::kFormatVersion;
    m["config_hash"] = config_hash(config_text);
    m["config_file"] = command + ".ini";
    m["seeds"] = seeds;
    m["config"] = config_text;
    open_output(dir / (command + "_manifest.json")) << m.dump(2) << '\n';
}

net::OptimizerConfig optimizer_config(const std::string& name, double learning_rate) {
    net::OptimizerConfig c;
    c.kind = net::optimizer_from_string(name);
    if (learning_rate > 0.0) {
        c.learning_rate = learning_rate;
    } else if (c.kind == net::OptimizerKind::Lbfgs) {
        c.learning_rate = 0.01;
    }
    return c;
}

pinn::TrainSet held_out_set(const pinn::PinnModel& model, int rollouts, int samples, std::uint64_t seed) {
    pinn::DatasetConfig c;
    c.n_rollouts = rollouts;
    c.samples_per_rollout = samples;
    c.seed = seed;
    c.collocation_ratio = 0.0;
    return pinn::generate_dataset(model.schema, model.effective_physics(), c);
}

void report_model(const pinn::PinnModel& model) {
    const pinn::TrainSet val = held_out_set(model, 40, 25, 7919);
    const auto& h = model.history;
    std::printf("%-16s cycles %5d  loss %.3e (data %.3e, physics %.3e)  held-out RMSE %.4e%s\n",
                pinn::schema_id(model.schema).c_str(), h.cycles, h.total_loss.empty() ? 0.0 : h.total_loss.back(),
                h.data_loss.empty() ? 0.0 : h.data_loss.back(), h.physics_loss.empty() ? 0.0 : h.physics_loss.back(),
                pinn::validation_rmse(model, val.inputs, val.targets), h.early_stopped ? "  (early stop)" : "");
}

void save_with_history(const fs::path& dir, const pinn::PinnModel& model) {
    const std::string name(to_string(model.schema.kind));
    model_io::save_model((dir / (name + ".model")).string(), model);
    std::ofstream hist = open_output(dir / (name + "_history.csv"));
    model_io::write_history(hist, model.history);
}

void run_train(const TrainOptions& o) {
    const fs::path dir(o.out);
    fs::create_directories(dir);
    const net::OptimizerConfig opt = optimizer_config(o.optimizer, o.learning_rate);

    if (o.skill == "all") {
        library::LibraryConfig lc;
        lc.seed = o.seed;
        lc.epsilon = o.epsilon;
        lc.max_cycles = o.cycles;
        lc.optimizer = opt.kind;
        lc.learning_rate = opt.learning_rate;
        lc.size_scale = o.size_scale;
        lc.hidden_layers = o.layers;
        lc.hidden_width = o.width;
        library::train_library(lc, [&](const pinn::PinnModel& m) {
            save_with_history(dir, m);
            report_model(m);
        });
        return;
    }

    const SkillKind kind = skill_from_string(o.skill);
    dynamics::PhysParams phys = library::library_physics(kind);
    pinn::DatasetConfig data;
    data.n_rollouts = o.n_rollouts;
    data.samples_per_rollout = o.samples_per_rollout;
    data.obs_noise = o.noise;
    data.collocation_ratio = o.collocation_ratio;
    data.seed = substream_seed(o.seed, "dataset");
    pinn::TrainConfig tc;
    tc.epsilon = o.epsilon;
    tc.max_cycles = o.cycles;
    tc.optimizer = opt;
    const std::uint64_t init = substream_seed(o.seed, "init");

    if (o.generalized) {
        const pinn::PinnModel m = pinn::train_generalized(kind, o.mu_range[0], o.mu_range[1], phys, data, tc, init,
                                                          o.layers, o.width);
        save_with_history(dir, m);
        report_model(m);
        return;
    }
    if (kind == SkillKind::Slide) {
        phys.friction = o.true_mu;
    }
    const pinn::SkillSchema schema = pinn::make_schema(kind);
    const pinn::TrainSet set = pinn::generate_dataset(schema, phys, data);
    if (o.dataset) {
        std::ofstream os = open_output(dir / (o.skill + "_dataset.csv"));
        model_io::write_dataset(os, schema, set);
    }
    pinn::PinnModel model = pinn::PinnModel::create(schema, phys, init, o.layers, o.width);
    if (o.inverse) {
        if (kind != SkillKind::Slide) {
            throw std::invalid_argument("--inverse recovers the friction coefficient and needs the slide skill");
        }
        model.latent = pinn::LatentParam{"friction", o.mu_init, o.mu_bounds[0], o.mu_bounds[1]};
        const pinn::InverseResult r = pinn::train_inverse(model, set, tc);
        std::printf("estimated friction %.6f (true %.6f, error %.2e)%s\n", r.estimate, o.true_mu,
                    std::abs(r.estimate - o.true_mu), r.identifiable ? "" : "  [unidentifiable: pinned at a bound]");
    } else {
        pinn::train(model, set, tc);
    }
    save_with_history(dir, model);
    report_model(model);
}

void run_eval(const EvalOptions& o) {
    const pinn::PinnModel model = model_io::load_model(o.model);
    const pinn::TrainSet val = held_out_set(model, o.n_rollouts, o.samples_per_rollout, o.seed);
    const Eigen::MatrixXd pred = model.predict(val.inputs);
    std::ostringstream table;
    table << "output,rmse\n";
    for (int i = 0; i < model.schema.output_width(); ++i) {
        const double rmse = std::sqrt((pred.row(i) - val.targets.row(i)).squaredNorm() / static_cast<double>(pred.cols()));
        table << model.schema.outputs[static_cast<std::size_t>(i)] << ',' << rmse << '\n';
    }
    table << "all," << pinn::validation_rmse(model, val.inputs, val.targets) << '\n';
    std::cout << "units: " << library::output_units(model.schema.kind) << '\n' << table.str();
    if (!o.out.empty()) {
        open_output(o.out) << table.str();
    }
}

std::vector<envs::TaskSpec> resolve_tasks(const std::vector<std::string>& names, const std::string& task_file) {
    if (!task_file.empty()) {
        return {envs::load_task_file(task_file)};
    }
    std::vector<envs::TaskSpec> tasks;
    for (const std::string& n : names) {
        if (n == "all") {
            for (envs::TaskKind k : envs::all_tasks()) {
                tasks.push_back(envs::make_task(k));
            }
        } else {
            tasks.push_back(envs::make_task(envs::task_from_string(n)));
        }
    }
    return tasks;
}

rollout::ModelSet load_models_for(const std::string& dir, const std::vector<envs::TaskSpec>& tasks) {
    if (dir.empty()) {
        throw std::invalid_argument("no --models directory given; train one with `skillplan train-skill all --out DIR`");
    }
    rollout::ModelSet models = model_io::load_model_set(dir);
    for (const envs::TaskSpec& t : tasks) {
        try {
            models.require_chain(t);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string(e.what()) + " in '" + dir +
                                        "'; train it with `skillplan train-skill <skill> --out " + dir + "`");
        }
    }
    return models;
}

struct Variant {
    std::string name;
    bool random = false;
    planner::PlanConfig plan;
};

void write_aggregate(const fs::path& path, const std::vector<planner::TrialLog>& logs) {
    std::ofstream os = open_output(path);
    os << "trial,mean_regret,sd_regret,n_seeds\n";
    os.precision(10);
    const std::size_t trials = logs.front().trials.size();
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<double> r;
        for (const planner::TrialLog& log : logs) {
            r.push_back(log.trials[t].regret);
        }
        const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
        double ss = 0.0;
        for (double x : r) {
            ss += (x - mean) * (x - mean);
        }
        const double sd = r.size() > 1 ? std::sqrt(ss / static_cast<double>(r.size() - 1)) : 0.0;
        os << t + 1 << ',' << mean << ',' << sd << ',' << r.size() << '\n';
    }
}

void run_experiment(const ExperimentOptions& o) {
    if (o.seeds.empty()) {
        throw std::invalid_argument("at least one seed is required");
    }
    const std::vector<envs::TaskSpec> tasks = resolve_tasks(o.tasks, o.task_file);
    rollout::ModelSet models;
    if (!o.oracle_reward) {
        models = load_models_for(o.models, tasks);
    }
    planner::PlanConfig plan;
    plan.trials = o.trials;
    plan.discretization = o.discretization;
    plan.iterations = o.iterations;
    plan.alpha = o.alpha;
    plan.beta = o.beta;
    plan.adapt = !o.no_adapt;
    plan.source = o.oracle_reward ? planner::RewardSource::Oracle : planner::RewardSource::Pinn;
    plan.dt = o.dt;
    plan.best_resolution = o.best_resolution;
    plan.scan.n_t = o.scan_points;

    std::vector<Variant> variants;
    std::string main_name = o.oracle_reward ? "oracle" : "planner";
    if (o.no_adapt) {
        main_name += "_no_adapt";
    }
    variants.push_back({main_name, false, plan});
    if (o.random_baseline) {
        variants.push_back({"random", true, plan});
    }

    const fs::path dir(o.out);
    for (const envs::TaskSpec& task : tasks) {
        for (const Variant& v : variants) {
            std::vector<planner::TrialLog> logs(o.seeds.size());
            parallel_for(o.seeds.size(), o.jobs, [&](std::size_t i) {
                logs[i] = v.random ? planner::random_policy(task, v.plan.trials, o.seeds[i], v.plan.dt,
                                                            v.plan.best_resolution)
                                   : planner::gen_plan(task, models, v.plan, o.seeds[i]);
            });
            const std::string stem = task.name + "_" + v.name;
            double mean_final = 0.0;
            for (std::size_t i = 0; i < logs.size(); ++i) {
                const std::string seed_stem = stem + "_seed" + std::to_string(o.seeds[i]);
                std::ofstream os = open_output(dir / (seed_stem + ".csv"));
                planner::write_trial_log(os, logs[i]);
                for (const std::string& note : logs[i].notes) {
                    std::cerr << seed_stem << ": " << note << '\n';
                }
                if (o.trajectories && !v.random && plan.source == planner::RewardSource::Pinn) {
                    std::ofstream tr = open_output(dir / (seed_stem + "_trajectory.csv"));
                    rollout::dump_trajectory(tr, task, logs[i].trials.back().action, models, plan.scan);
                }
                mean_final += logs[i].final_regret();
            }
            write_aggregate(dir / (stem + "_regret.csv"), logs);
            std::printf("%-8s %-18s mean regret at T=%d over %zu seeds: %.4f\n", task.name.c_str(), v.name.c_str(),
                        v.plan.trials, logs.size(), mean_final / static_cast<double>(logs.size()));
        }
    }
}

void run_bench(const BenchOptions& o, const std::string& hash) {
    if (o.n_actions < 100) {
        throw std::invalid_argument("bench needs at least 100 actions per task");
    }
    const std::vector<envs::TaskSpec> tasks = resolve_tasks(o.tasks, "");
    const rollout::ModelSet models = load_models_for(o.models, tasks);
    std::ofstream os = open_output(fs::path(o.out) / "bench.csv");
    os << "task,n_actions,dt_real,pinn_mean_s,pinn_sd_s,real_mean_s,real_sd_s,speedup,config_hash\n";
    os.precision(8);
    for (const envs::TaskSpec& task : tasks) {
        const rollout::BenchResult b =
            rollout::rollout_bench(task, models, o.n_actions, o.dt, o.seed, rollout::ScanConfig{o.scan_points});
        os << task.name << ',' << b.n_actions << ',' << o.dt << ',' << b.pinn_mean << ',' << b.pinn_stddev << ','
           << b.real_mean << ',' << b.real_stddev << ',' << b.speedup() << ',' << hash << '\n';
        std::printf("%-8s pinn %.3e s  real %.3e s  speedup %.2fx\n", task.name.c_str(), b.pinn_mean, b.real_mean,
                    b.speedup());
    }
}

void run_efficiency(const EfficiencyOptions& o) {
    library::EfficiencyConfig c;
    c.epsilon = o.epsilon;
    c.max_cycles = o.cycles;
    c.optimizer = net::optimizer_from_string(o.optimizer);
    c.learning_rate = o.learning_rate;
    c.samples_per_rollout = o.samples_per_rollout;
    struct Cell {
        SkillKind skill;
        int n_u;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const std::string& s : o.skills) {
        for (int n : o.n_u) {
            for (std::uint64_t seed : o.seeds) {
                cells.push_back({skill_from_string(s), n, seed});
            }
        }
    }
    std::vector<library::EfficiencyRow> rows(cells.size());
    parallel_for(cells.size(), o.jobs, [&](std::size_t i) {
        rows[i] = library::data_efficiency_cell(cells[i].skill, cells[i].n_u, cells[i].seed, c);
    });
    std::ofstream os = open_output(fs::path(o.out) / "data_efficiency.csv");
    os << "skill,n_u,seed,rmse_pinn,rmse_nn,units\n";
    os.precision(10);
    for (const library::EfficiencyRow& r : rows) {
        os << to_string(r.skill) << ',' << r.n_u << ',' << r.seed << ',' << r.rmse_pinn << ',' << r.rmse_nn << ','
           << library::output_units(r.skill) << '\n';
        std::printf("%-6s N_u=%4d seed %llu  pinn %.4e  nn %.4e%s\n", std::string(to_string(r.skill)).c_str(), r.n_u,
                    static_cast<unsigned long long>(r.seed), r.rmse_pinn, r.rmse_nn,
                    r.rmse_pinn <= r.rmse_nn ? "" : "  (nn better)");
    }
}

void run_best(const BestOptions& o) {
    std::ofstream os = open_output(fs::path(o.out) / "best_attainable.csv");
    os << "task,resolution,reward,action\n";
    os.precision(10);
    for (const envs::TaskSpec& task : resolve_tasks(o.tasks, "")) {
        const envs::BestAttainable b = envs::best_attainable(task, o.resolution);
        os << task.name << ',' << o.resolution << ',' << b.reward << ',';
        for (std::size_t i = 0; i < b.action.size(); ++i) {
            os << (i ? ";" : "") << b.action[i];
        }
        os << '\n';
        std::printf("%-8s best reward %.6f\n", task.name.c_str(), b.reward);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-informed skill models and planning for dynamic physical reasoning tasks"};
    app.set_config("--config", "", "Read options from a config file (as written next to every run's outputs)");
    app.require_subcommand(1);
    app.set_version_flag("--version", SKILLPLAN_VERSION);

    TrainOptions train;
    auto* tr = app.add_subcommand("train-skill", "Generate data, train one skill model (or the whole library)");
    tr->add_option("skill", train.skill, "swing|slide|throw|bounce|hit|all")
        ->required()
        ->check(CLI::IsMember([] {
            auto v = kSkillNames;
            v.push_back("all");
            return v;
        }()));
    tr->add_option("--n-rollouts", train.n_rollouts, "Ground-truth rollouts")->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_option("--samples-per-rollout", train.samples_per_rollout)->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_option("--noise", train.noise, "Observation noise sigma")->check(CLI::NonNegativeNumber)->capture_default_str();
    tr->add_option("--collocation-ratio", train.collocation_ratio, "N_p / N_u")->check(CLI::NonNegativeNumber)->capture_default_str();
    tr->add_option("--epsilon", train.epsilon, "Physics loss weight (0: data only)")->check(CLI::NonNegativeNumber)->capture_default_str();
    tr->add_option("--optimizer", train.optimizer)->check(CLI::IsMember({"adam", "lbfgs"}))->capture_default_str();
    tr->add_option("--lr", train.learning_rate, "Learning rate; 0 picks 1e-3 for Adam, 1e-2 for L-BFGS")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    tr->add_option("--cycles", train.cycles)->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_option("--layers", train.layers)->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_option("--width", train.width)->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_option("--seed", train.seed)->capture_default_str();
    tr->add_flag("--inverse", train.inverse, "Learn the friction coefficient jointly (slide)");
    tr->add_option("--true-mu", train.true_mu, "Friction of the data-generating simulator (slide)")->capture_default_str();
    tr->add_option("--mu-init", train.mu_init, "Initial friction estimate for --inverse")->capture_default_str();
    tr->add_option("--mu-bounds", train.mu_bounds, "Projection bounds for --inverse")->expected(2)->capture_default_str();
    tr->add_flag("--generalized", train.generalized, "Friction as a network input (slide)");
    tr->add_option("--mu-range", train.mu_range, "Friction range for --generalized")->expected(2)->capture_default_str();
    tr->add_option("--size-scale", train.size_scale, "Dataset scale for `all`")->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_flag("--dataset", train.dataset, "Also write the training set as CSV");
    tr->add_option("--out", train.out, "Output directory")->capture_default_str();

    EvalOptions eval;
    auto* ev = app.add_subcommand("eval-skill", "Held-out RMSE of a saved model against the simulator");
    ev->add_option("model", eval.model, "Model file")->required()->check(CLI::ExistingFile);
    ev->add_option("--n-rollouts", eval.n_rollouts)->check(CLI::PositiveNumber)->capture_default_str();
    ev->add_option("--samples-per-rollout", eval.samples_per_rollout)->check(CLI::PositiveNumber)->capture_default_str();
    ev->add_option("--seed", eval.seed)->capture_default_str();
    ev->add_option("--out", eval.out, "Write the RMSE table to this CSV file");

    ExperimentOptions exp;
    auto* ex = app.add_subcommand("experiment", "Plan over trials and seeds; write regret logs");
    ex->add_option("--tasks", exp.tasks, "launch|slide|bounce|bridge|all")->delimiter(',')->capture_default_str();
    ex->add_option("--task-file", exp.task_file, "JSON task description (overrides --tasks)")->check(CLI::ExistingFile);
    ex->add_option("--models", exp.models, "Directory of <skill>.model files");
    ex->add_option("--seeds", exp.seeds)->delimiter(',')->capture_default_str();
    ex->add_option("-T,--trials", exp.trials)->check(CLI::PositiveNumber)->capture_default_str();
    ex->add_option("-D,--discretization", exp.discretization)->check(CLI::Range(2, 100000))->capture_default_str();
    ex->add_option("-K,--iterations", exp.iterations)->check(CLI::PositiveNumber)->capture_default_str();
    ex->add_option("--alpha", exp.alpha, "UCB exploration weight")->capture_default_str();
    ex->add_option("--beta", exp.beta, "GP-UCB weight")->check(CLI::NonNegativeNumber)->capture_default_str();
    ex->add_flag("--no-adapt", exp.no_adapt, "Disable the GP correction");
    ex->add_flag("--random-baseline", exp.random_baseline, "Also run uniformly random actions");
    ex->add_flag("--oracle-reward", exp.oracle_reward, "Plan against the simulator instead of the networks");
    ex->add_option("--dt", exp.dt, "Real rollout step")->check(CLI::PositiveNumber)->capture_default_str();
    ex->add_option("--best-resolution", exp.best_resolution)->check(CLI::Range(2, 100000))->capture_default_str();
    ex->add_option("--scan-points", exp.scan_points)->check(CLI::Range(50, 100000))->capture_default_str();
    ex->add_flag("--trajectories", exp.trajectories, "Dump the learned trajectory of each seed's last action");
    ex->add_option("--jobs", exp.jobs)->check(CLI::PositiveNumber)->capture_default_str();
    ex->add_option("--out", exp.out, "Output directory")->capture_default_str();

    BenchOptions bench;
    auto* be = app.add_subcommand("bench", "Wall time of learned vs simulated rollouts");
    be->add_option("--tasks", bench.tasks)->delimiter(',')->capture_default_str();
    be->add_option("--models", bench.models, "Directory of <skill>.model files");
    be->add_option("--n-actions", bench.n_actions)->capture_default_str();
    be->add_option("--dt", bench.dt, "Real rollout step")->check(CLI::PositiveNumber)->capture_default_str();
    be->add_option("--seed", bench.seed)->capture_default_str();
    be->add_option("--scan-points", bench.scan_points)->check(CLI::Range(50, 100000))->capture_default_str();
    be->add_option("--out", bench.out, "Output directory")->capture_default_str();

    EfficiencyOptions eff;
    auto* de = app.add_subcommand("data-efficiency", "Held-out RMSE with and without the physics loss vs N_u");
    de->add_option("--skills", eff.skills)->delimiter(',')->check(CLI::IsMember({"swing", "slide", "throw"}))->capture_default_str();
    de->add_option("--n-u", eff.n_u)->delimiter(',')->capture_default_str();
    de->add_option("--seeds", eff.seeds)->delimiter(',')->capture_default_str();
    de->add_option("--epsilon", eff.epsilon)->check(CLI::PositiveNumber)->capture_default_str();
    de->add_option("--cycles", eff.cycles)->check(CLI::PositiveNumber)->capture_default_str();
    de->add_option("--optimizer", eff.optimizer)->check(CLI::IsMember({"adam", "lbfgs"}))->capture_default_str();
    de->add_option("--lr", eff.learning_rate)->check(CLI::PositiveNumber)->capture_default_str();
    de->add_option("--samples-per-rollout", eff.samples_per_rollout)->check(CLI::PositiveNumber)->capture_default_str();
    de->add_option("--jobs", eff.jobs)->check(CLI::PositiveNumber)->capture_default_str();
    de->add_option("--out", eff.out, "Output directory")->capture_default_str();

    BestOptions best;
    auto* ba = app.add_subcommand("best-attainable", "Grid search of the real reward optimum per task");
    ba->add_option("--tasks", best.tasks)->delimiter(',')->capture_default_str();
    ba->add_option("--resolution", best.resolution)->check(CLI::Range(2, 100000))->capture_default_str();
    ba->add_option("--out", best.out, "Output directory")->capture_default_str();

    for (CLI::App* sub : {tr, ev, ex, be, de, ba}) {
        sub->configurable();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        const std::string command = sub->get_name();
        const std::string config = command_config(*sub);
        const std::string hash = config_hash(config);
        if (sub == tr) {
            write_manifest(train.out, command, config, {train.seed});
            run_train(train);
        } else if (sub == ev) {
            run_eval(eval);
        } else if (sub == ex) {
            write_manifest(exp.out, command, config, exp.seeds);
            run_experiment(exp);
        } else if (sub == be) {
            write_manifest(bench.out, command, config, {bench.seed});
            run_bench(bench, hash);
        } else if (sub == de) {
            write_manifest(eff.out, command, config, eff.seeds);
            run_efficiency(eff);
        } else if (sub == ba) {
            write_manifest(best.out, command, config, {});
            run_best(best);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
