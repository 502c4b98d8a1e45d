// Command-line front end: run a single experiment, reproduce a results grid,
// validate a config, or inspect a dataset.
//
// Exit codes: 0 success, 1 config error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "berlin/harness.hpp"

namespace {

using namespace berlin;

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return j;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> agent;
    std::optional<std::string> scenario;
    std::optional<double> pr;
    std::optional<std::uint64_t> steps;
    std::optional<std::size_t> batch_size;
    std::optional<double> exploration;
    std::optional<std::size_t> pool;
    std::optional<std::string> out;
    std::optional<std::size_t> replicas;
    std::optional<std::size_t> workers;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "Master seed (replica r uses seed+r)");
    cmd->add_option("--agent", ov.agent,
                    "Agent: linucb, berlin_plain, berlin_kmeans, berlin_knn, berlin_gmm");
    cmd->add_option("--scenario", ov.scenario,
                    "Scenario: stationary, cluster_drift, negative_images, "
                    "shuffled_labels, multitask, extendable, stream");
    cmd->add_option("--pr", ov.pr, "Fixed reward-reveal probability");
    cmd->add_option("--steps", ov.steps, "Total steps");
    cmd->add_option("--batch-size", ov.batch_size, "Batch size");
    cmd->add_option("--exploration", ov.exploration, "UCB exploration constant");
    cmd->add_option("--pool", ov.pool, "Average-pooling factor for image datasets");
    cmd->add_option("--out", ov.out, "Output path prefix for trace CSV/JSON");
    cmd->add_option("--replicas", ov.replicas, "Independent replicas");
    cmd->add_option("--workers", ov.workers, "Worker threads (0 = hardware)");
}

harness::RunConfig make_config(const std::string& config_path, const Overrides& ov) {
    harness::RunConfig cfg;
    if (!config_path.empty()) {
        cfg = harness::run_config_from_json(load_json(config_path));
    }
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.agent) harness::apply_agent_name(cfg.agent, *ov.agent);
    if (ov.scenario) cfg.scenario.scenario = harness::scenario_from_string(*ov.scenario);
    if (ov.pr) cfg.reveal = env::RevealSchedule::fixed(*ov.pr);
    if (ov.steps) cfg.scenario.total_steps = *ov.steps;
    if (ov.batch_size) cfg.scenario.batch_size = *ov.batch_size;
    if (ov.exploration) cfg.agent.exploration = *ov.exploration;
    if (ov.pool) cfg.dataset.pool = *ov.pool;
    if (ov.out) cfg.out = *ov.out;
    if (ov.replicas) cfg.replicas = *ov.replicas;
    if (ov.workers) cfg.workers = *ov.workers;
    return cfg;
}

int cmd_run(const std::string& config_path, const Overrides& ov) {
    const auto cfg = make_config(config_path, ov);
    const auto traces = harness::run_experiment(cfg);
    for (const auto& t : traces) {
        std::printf("replica %llu seed %llu: steps=%llu reward=%llu accuracy=%.4f "
                    "revealed=%llu arms=%zu (%.2fs)\n",
                    static_cast<unsigned long long>(t.replica),
                    static_cast<unsigned long long>(t.master_seed),
                    static_cast<unsigned long long>(t.total_steps),
                    static_cast<unsigned long long>(t.final_cumulative_reward),
                    t.final_accuracy,
                    static_cast<unsigned long long>(t.final_revealed_count),
                    t.rows.empty() ? std::size_t{0} : t.rows.back().arm_count,
                    t.wall_seconds);
    }
    return 0;
}

int cmd_grid(const std::string& config_path, const Overrides& ov) {
    auto j = load_json(config_path);
    auto grid = harness::grid_config_from_json(j);
    if (ov.seed) grid.base.seed = *ov.seed;
    if (ov.workers) grid.base.workers = *ov.workers;
    if (ov.out) grid.out = *ov.out;
    const auto result = harness::run_grid(grid);
    std::cout << result.table_csv;
    for (const auto& cell : result.cells) {
        if (!cell.error.empty()) {
            std::cerr << "failed: " << cell.agent << ' ' << cell.scenario
                      << " pr=" << cell.pr << ": " << cell.error << '\n';
        }
    }
    return 0;
}

int cmd_validate(const std::string& config_path, const Overrides& ov) {
    const auto cfg = make_config(config_path, ov);
    cfg.validate();
    std::cout << "config ok\n" << harness::run_config_to_json(cfg).dump(2) << '\n';
    return 0;
}

int cmd_inspect(const std::string& config_path, const Overrides& ov) {
    auto cfg = make_config(config_path, ov);
    const auto inputs = harness::prepare_inputs(cfg);
    if (!inputs.dataset) {
        std::cout << "synthetic dataset: classes=" << cfg.dataset.classes
                  << " dimension=" << cfg.dataset.dimension
                  << " separation=" << cfg.dataset.separation
                  << " sigma=" << cfg.dataset.sigma << '\n';
        return 0;
    }
    const auto& ds = *inputs.dataset;
    std::cout << "name: " << ds.name << "\nsamples: " << ds.size()
              << "\ndimension: " << ds.dim() << "\nclasses: " << ds.class_count
              << '\n';
    std::vector<std::size_t> counts(ds.class_count, 0);
    double lo = ds.features[0][0], hi = lo;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        ++counts[static_cast<std::size_t>(ds.labels[i])];
        for (const double v : ds.features[i]) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    std::cout << "feature range: [" << lo << ", " << hi << "]\nper-class counts:";
    for (const auto c : counts) std::cout << ' ' << c;
    std::cout << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Contextual-bandit benchmark harness (LinUCB / BerlinUCB family) with "
        "episodic reward and nonstationary environment simulators.\n"
        "CSV datasets must have a header row and numeric feature columns; "
        "categorical features must be pre-encoded."};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    auto* run = app.add_subcommand("run", "Run a single experiment config");
    run->add_option("--config", config_path, "JSON config file");
    add_override_flags(run, ov);

    auto* grid = app.add_subcommand("grid", "Run an agents x scenarios x p_r grid");
    grid->add_option("--config", config_path, "JSON grid config file")->required();
    add_override_flags(grid, ov);

    auto* validate = app.add_subcommand("validate", "Validate a config and exit");
    validate->add_option("--config", config_path, "JSON config file");
    add_override_flags(validate, ov);

    auto* inspect = app.add_subcommand("inspect-dataset", "Print dataset statistics");
    inspect->add_option("--config", config_path, "JSON config file");
    add_override_flags(inspect, ov);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, ov);
        if (grid->parsed()) return cmd_grid(config_path, ov);
        if (validate->parsed()) return cmd_validate(config_path, ov);
        if (inspect->parsed()) return cmd_inspect(config_path, ov);
    } catch (const berlin::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
