#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "berlin/bandit.hpp"
#include "berlin/data.hpp"
#include "berlin/env.hpp"
#include "berlin/errors.hpp"

namespace berlin::harness {

enum class Scenario {
    stationary,
    cluster_drift,
    negative_images,
    shuffled_labels,
    multitask,
    extendable,  // stationary stream, extendable arm regime
    stream,
};

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

struct DatasetSpec {
    enum class Kind { idx, csv, synthetic, stream_csv };
    Kind kind = Kind::synthetic;
    // idx
    std::string images_path;
    std::string labels_path;
    // csv / stream_csv
    std::string csv_path;
    std::string label_column = "label";
    // shared
    std::size_t limit = data::kDefaultSampleLimit;
    std::size_t pool = 1;  // average-pooling factor for image data
    // synthetic blobs
    std::size_t classes = 3;
    std::size_t dimension = 20;
    double separation = 10.0;
    double sigma = 1.0;
};

struct ScenarioConfig {
    Scenario scenario = Scenario::stationary;
    std::size_t batch_size = 100;
    std::uint64_t total_steps = 5000;
    // cluster_drift
    std::size_t k = 0;  // 0 = class count
    double concentration = 0.5;
    // negative_images
    double p_min = 0.0;
    double p_max = 1.0;
    // shuffled_labels test hook
    bool identity_permutation = false;
    // multitask
    double domain_a_prob = 0.5;
    // stream
    std::uint64_t segment_min = 50;
    std::uint64_t segment_max = 200;
    std::size_t n_segments = 100;
};

struct RunConfig {
    DatasetSpec dataset;
    std::optional<DatasetSpec> dataset_b;  // multitask second domain
    ScenarioConfig scenario;
    env::RevealSchedule reveal = env::RevealSchedule::fixed(1.0);
    bandit::AgentConfig agent;  // dimension filled from the environment
    bool extendable_arms = false;
    std::uint64_t seed = 0;
    std::size_t replicas = 1;
    std::size_t trace_stride = 10;
    std::size_t workers = 0;  // 0 = hardware concurrency
    std::string out;          // trace CSV path prefix; empty = no files

    void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);

struct TraceRow {
    std::uint64_t step = 0;
    std::uint64_t cumulative_reward = 0;
    std::uint64_t revealed_count = 0;
    double accuracy = 0.0;
    std::uint64_t errors = 0;
    std::size_t arm_count = 0;
};

struct MetricsTrace {
    std::vector<TraceRow> rows;
    std::uint64_t total_steps = 0;
    std::uint64_t final_cumulative_reward = 0;
    std::uint64_t final_revealed_count = 0;
    double final_accuracy = 0.0;
    std::uint64_t replica = 0;
    std::uint64_t master_seed = 0;
    double wall_seconds = 0.0;
    // Chosen arm per step; kept for equivalence and determinism checks.
    std::vector<std::uint32_t> decisions;
};

// Prepared immutable inputs shared across replicas.
struct RunInputs {
    std::optional<data::Dataset> dataset;
    std::optional<data::Dataset> dataset_b;
};

RunInputs prepare_inputs(const RunConfig& cfg);

// Builds the environment for one replica (master seed already derived).
std::unique_ptr<env::Environment> build_environment(const RunConfig& cfg,
                                                    const RunInputs& inputs,
                                                    std::uint64_t master_seed);

// One replica of the interaction loop.
MetricsTrace run_replica(const RunConfig& cfg, const RunInputs& inputs,
                         std::uint64_t replica);

// All replicas (replica r uses master seed cfg.seed + r), optionally in
// parallel; output order is by replica index regardless of execution order.
// Writes trace files when cfg.out is set.
std::vector<MetricsTrace> run_experiment(const RunConfig& cfg);

// Writes the trace CSV plus a sibling "<path minus .csv>.json" summary.
void emit_trace(const MetricsTrace& trace, const RunConfig& cfg,
                const std::string& csv_path);

struct GridConfig {
    RunConfig base;
    std::vector<std::string> agents;     // linucb, berlin_plain, berlin_kmeans, ...
    std::vector<std::string> scenarios;  // scenario names
    std::vector<double> pr_values;
    std::vector<std::uint64_t> seeds;
    std::string out;  // table CSV path
};

GridConfig grid_config_from_json(const nlohmann::json& j);

// Resolves shorthand agent names ("berlin_knn" etc.) onto an AgentConfig.
void apply_agent_name(bandit::AgentConfig& cfg, const std::string& name);

struct GridCell {
    std::string agent;
    std::string scenario;
    double pr = 0.0;
    std::optional<double> mean_accuracy;  // empty on failure
    std::string error;
};

struct GridResult {
    std::vector<GridCell> cells;
    std::string table_csv;
};

GridResult run_grid(const GridConfig& grid);

}  // namespace berlin::harness
