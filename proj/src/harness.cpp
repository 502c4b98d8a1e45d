#include "berlin/harness.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace berlin::harness {

namespace fs = std::filesystem;

Scenario scenario_from_string(const std::string& s) {
    if (s == "stationary") return Scenario::stationary;
    if (s == "cluster_drift") return Scenario::cluster_drift;
    if (s == "negative_images") return Scenario::negative_images;
    if (s == "shuffled_labels") return Scenario::shuffled_labels;
    if (s == "multitask") return Scenario::multitask;
    if (s == "extendable") return Scenario::extendable;
    if (s == "stream") return Scenario::stream;
    throw ConfigError("unknown scenario '" + s + "'");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::stationary: return "stationary";
        case Scenario::cluster_drift: return "cluster_drift";
        case Scenario::negative_images: return "negative_images";
        case Scenario::shuffled_labels: return "shuffled_labels";
        case Scenario::multitask: return "multitask";
        case Scenario::extendable: return "extendable";
        case Scenario::stream: return "stream";
    }
    return "?";
}

void RunConfig::validate() const {
    if (replicas < 1) throw ConfigError("replicas must be >= 1");
    if (trace_stride < 1) throw ConfigError("trace_stride must be >= 1");
    if (agent.exploration <= 0.0) throw ConfigError("exploration must be positive");
    auto check_file = [](const std::string& p) {
        if (!p.empty() && !fs::exists(p)) {
            throw ConfigError("referenced file does not exist: " + p);
        }
    };
    auto check_spec = [&](const DatasetSpec& d) {
        switch (d.kind) {
            case DatasetSpec::Kind::idx:
                if (d.images_path.empty() || d.labels_path.empty()) {
                    throw ConfigError("idx dataset needs images and labels paths");
                }
                check_file(d.images_path);
                check_file(d.labels_path);
                break;
            case DatasetSpec::Kind::csv:
            case DatasetSpec::Kind::stream_csv:
                if (d.csv_path.empty()) throw ConfigError("csv dataset needs a path");
                check_file(d.csv_path);
                break;
            case DatasetSpec::Kind::synthetic:
                if (d.classes < 1 || d.dimension < d.classes) {
                    throw ConfigError("synthetic dataset needs dimension >= classes >= 1");
                }
                break;
        }
    };
    check_spec(dataset);
    if (scenario.scenario == Scenario::multitask) {
        if (!dataset_b) throw ConfigError("multitask needs a second dataset");
        check_spec(*dataset_b);
    }
    if (scenario.scenario == Scenario::stream &&
        dataset.kind != DatasetSpec::Kind::stream_csv &&
        dataset.kind != DatasetSpec::Kind::csv) {
        throw ConfigError("stream scenario needs a feature-stream CSV dataset");
    }
}

namespace {

DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
    DatasetSpec d;
    const std::string kind = j.value("kind", "synthetic");
    if (kind == "idx") d.kind = DatasetSpec::Kind::idx;
    else if (kind == "csv") d.kind = DatasetSpec::Kind::csv;
    else if (kind == "stream_csv") d.kind = DatasetSpec::Kind::stream_csv;
    else if (kind == "synthetic") d.kind = DatasetSpec::Kind::synthetic;
    else throw ConfigError("unknown dataset kind '" + kind + "'");
    d.images_path = j.value("images", "");
    d.labels_path = j.value("labels", "");
    d.csv_path = j.value("path", "");
    d.label_column = j.value("label_column", "label");
    d.limit = j.value("limit", data::kDefaultSampleLimit);
    d.pool = j.value("pool", std::size_t{1});
    d.classes = j.value("classes", std::size_t{3});
    d.dimension = j.value("dimension", std::size_t{20});
    d.separation = j.value("separation", 10.0);
    d.sigma = j.value("sigma", 1.0);
    return d;
}

nlohmann::json dataset_spec_to_json(const DatasetSpec& d) {
    const char* kind = "synthetic";
    switch (d.kind) {
        case DatasetSpec::Kind::idx: kind = "idx"; break;
        case DatasetSpec::Kind::csv: kind = "csv"; break;
        case DatasetSpec::Kind::stream_csv: kind = "stream_csv"; break;
        case DatasetSpec::Kind::synthetic: kind = "synthetic"; break;
    }
    return {{"kind", kind},         {"images", d.images_path},
            {"labels", d.labels_path}, {"path", d.csv_path},
            {"label_column", d.label_column}, {"limit", d.limit},
            {"pool", d.pool},       {"classes", d.classes},
            {"dimension", d.dimension}, {"separation", d.separation},
            {"sigma", d.sigma}};
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    if (j.contains("dataset")) cfg.dataset = dataset_spec_from_json(j.at("dataset"));
    if (j.contains("dataset_b")) {
        cfg.dataset_b = dataset_spec_from_json(j.at("dataset_b"));
    }
    if (j.contains("scenario")) {
        const auto& js = j.at("scenario");
        auto& s = cfg.scenario;
        s.scenario = scenario_from_string(js.value("name", "stationary"));
        s.batch_size = js.value("batch_size", std::size_t{100});
        s.total_steps = js.value("total_steps", std::uint64_t{5000});
        s.k = js.value("k", std::size_t{0});
        s.concentration = js.value("concentration", 0.5);
        s.p_min = js.value("p_min", 0.0);
        s.p_max = js.value("p_max", 1.0);
        s.identity_permutation = js.value("identity_permutation", false);
        s.domain_a_prob = js.value("domain_a_prob", 0.5);
        s.segment_min = js.value("segment_min", std::uint64_t{50});
        s.segment_max = js.value("segment_max", std::uint64_t{200});
        s.n_segments = js.value("n_segments", std::size_t{100});
    }
    if (j.contains("reveal")) {
        const auto& jr = j.at("reveal");
        const std::string kind = jr.value("kind", "fixed");
        if (kind == "fixed") {
            cfg.reveal = env::RevealSchedule::fixed(jr.value("p", 1.0));
        } else if (kind == "per_batch") {
            cfg.reveal = env::RevealSchedule::per_batch(
                jr.at("values").get<std::vector<double>>());
        } else {
            throw ConfigError("unknown reveal kind '" + kind + "'");
        }
    }
    if (j.contains("agent")) {
        const auto& ja = j.at("agent");
        auto& a = cfg.agent;
        a.mode = bandit::mode_from_string(ja.value("mode", "linucb"));
        if (ja.contains("selfsup")) {
            a.selfsup_kind =
                bandit::selfsup_kind_from_string(ja.at("selfsup").get<std::string>());
        }
        a.exploration = ja.value("exploration", 1.0);
        a.skip_all_updates_when_hidden = ja.value("skip_all_updates_when_hidden", false);
        a.knn_k = ja.value("knn_k", std::size_t{5});
        a.knn_capacity = ja.value("knn_capacity", std::size_t{2000});
    }
    cfg.extendable_arms = j.value("extendable_arms", false);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.replicas = j.value("replicas", std::size_t{1});
    cfg.trace_stride = j.value("trace_stride", std::size_t{10});
    cfg.workers = j.value("workers", std::size_t{0});
    cfg.out = j.value("out", "");
    return cfg;
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["dataset"] = dataset_spec_to_json(cfg.dataset);
    if (cfg.dataset_b) j["dataset_b"] = dataset_spec_to_json(*cfg.dataset_b);
    j["scenario"] = {{"name", to_string(cfg.scenario.scenario)},
                     {"batch_size", cfg.scenario.batch_size},
                     {"total_steps", cfg.scenario.total_steps},
                     {"k", cfg.scenario.k},
                     {"concentration", cfg.scenario.concentration},
                     {"p_min", cfg.scenario.p_min},
                     {"p_max", cfg.scenario.p_max},
                     {"identity_permutation", cfg.scenario.identity_permutation},
                     {"domain_a_prob", cfg.scenario.domain_a_prob},
                     {"segment_min", cfg.scenario.segment_min},
                     {"segment_max", cfg.scenario.segment_max},
                     {"n_segments", cfg.scenario.n_segments}};
    if (cfg.reveal.kind == env::RevealSchedule::Kind::fixed) {
        j["reveal"] = {{"kind", "fixed"}, {"p", cfg.reveal.p}};
    } else {
        j["reveal"] = {{"kind", "per_batch"}, {"values", cfg.reveal.values}};
    }
    j["agent"] = {{"mode", bandit::to_string(cfg.agent.mode)},
                  {"selfsup", bandit::to_string(cfg.agent.selfsup_kind)},
                  {"exploration", cfg.agent.exploration},
                  {"skip_all_updates_when_hidden", cfg.agent.skip_all_updates_when_hidden},
                  {"knn_k", cfg.agent.knn_k},
                  {"knn_capacity", cfg.agent.knn_capacity}};
    j["extendable_arms"] = cfg.extendable_arms;
    j["seed"] = cfg.seed;
    j["replicas"] = cfg.replicas;
    j["trace_stride"] = cfg.trace_stride;
    j["workers"] = cfg.workers;
    j["out"] = cfg.out;
    return j;
}

RunInputs prepare_inputs(const RunConfig& cfg) {
    RunInputs in;
    auto load = [](const DatasetSpec& d) -> std::optional<data::Dataset> {
        switch (d.kind) {
            case DatasetSpec::Kind::idx: {
                auto ds = data::load_idx(d.images_path, d.labels_path, d.limit);
                if (d.pool > 1) ds = data::pool_downsample(ds, d.pool);
                return ds;
            }
            case DatasetSpec::Kind::csv:
                return data::load_labelled_csv(d.csv_path, d.label_column, d.limit);
            case DatasetSpec::Kind::stream_csv:
                return data::load_labelled_csv_raw(d.csv_path, d.label_column, d.limit);
            case DatasetSpec::Kind::synthetic:
                return std::nullopt;
        }
        return std::nullopt;
    };
    in.dataset = load(cfg.dataset);
    if (cfg.dataset_b) in.dataset_b = load(*cfg.dataset_b);
    if (cfg.scenario.scenario == Scenario::multitask) {
        if (!in.dataset || !in.dataset_b) {
            throw ConfigError("multitask needs two loaded datasets");
        }
        auto [ea, eb] = data::stretch_concat(*in.dataset, *in.dataset_b);
        in.dataset = std::move(ea);
        in.dataset_b = std::move(eb);
    }
    return in;
}

std::unique_ptr<env::Environment> build_environment(const RunConfig& cfg,
                                                    const RunInputs& inputs,
                                                    std::uint64_t master_seed) {
    const auto& s = cfg.scenario;
    env::EnvConfig ecfg{s.batch_size, s.total_steps};
    if (!inputs.dataset && s.scenario != Scenario::stationary &&
        s.scenario != Scenario::extendable) {
        throw ConfigError(to_string(s.scenario) + " requires a loaded dataset");
    }
    switch (s.scenario) {
        case Scenario::stationary:
        case Scenario::extendable: {
            if (cfg.dataset.kind == DatasetSpec::Kind::synthetic) {
                env::SyntheticEnvConfig synth;
                synth.sigma = cfg.dataset.sigma;
                synth.means = env::blob_means(cfg.dataset.classes, cfg.dataset.dimension,
                                              cfg.dataset.separation, cfg.dataset.sigma);
                return env::make_synthetic(std::move(synth), ecfg, cfg.reveal,
                                           master_seed);
            }
            return env::make_stationary(*inputs.dataset, ecfg, cfg.reveal, master_seed);
        }
        case Scenario::cluster_drift: {
            const std::size_t k = s.k ? s.k : inputs.dataset->class_count;
            return env::make_cluster_drift(*inputs.dataset, k, s.concentration, ecfg,
                                           cfg.reveal, master_seed);
        }
        case Scenario::negative_images:
            return env::make_negative_images(*inputs.dataset, s.p_min, s.p_max, ecfg,
                                             cfg.reveal, master_seed);
        case Scenario::shuffled_labels:
            return env::make_shuffled_labels(*inputs.dataset, ecfg, cfg.reveal,
                                             master_seed, s.identity_permutation);
        case Scenario::multitask:
            return env::make_multitask(*inputs.dataset, *inputs.dataset_b,
                                       s.domain_a_prob, ecfg, cfg.reveal, master_seed);
        case Scenario::stream:
            return env::make_stream(*inputs.dataset, s.segment_min, s.segment_max,
                                    s.n_segments, ecfg, cfg.reveal, master_seed);
    }
    throw ConfigError("unhandled scenario");
}

MetricsTrace run_replica(const RunConfig& cfg, const RunInputs& inputs,
                         std::uint64_t replica) {
    const std::uint64_t seed = cfg.seed + replica;
    auto environment = build_environment(cfg, inputs, seed);
    const bool extendable =
        cfg.extendable_arms || cfg.scenario.scenario == Scenario::extendable;

    bandit::AgentConfig acfg = cfg.agent;
    acfg.dimension = environment->dimension();
    bandit::Agent agent(acfg, extendable ? 1 : environment->class_count());
    RngStream tiebreak(seed, "agent-tiebreak");

    MetricsTrace tr;
    tr.replica = replica;
    tr.master_seed = seed;
    std::uint64_t cum = 0, revealed = 0, steps = 0;
    const auto record = [&] {
        tr.rows.push_back({steps, cum, revealed,
                           steps ? static_cast<double>(cum) / static_cast<double>(steps)
                                 : 0.0,
                           steps - cum, agent.arm_count()});
    };

    const auto t0 = std::chrono::steady_clock::now();
    record();  // step-0 row
    while (auto sample = environment->next_sample()) {
        const auto decision = agent.select(sample->context, tiebreak);
        const bool is_revealed = environment->reveal();
        std::optional<std::size_t> mapped;
        if (extendable) mapped = agent.arm_for_class(sample->true_label);
        const int r = env::true_reward(sample->true_label, decision.chosen_arm, mapped,
                                       extendable);
        const auto fb = is_revealed ? bandit::FeedbackEvent::revealed(r)
                                    : bandit::FeedbackEvent::hidden();
        if (extendable) {
            agent.extendable_step(sample->context, decision.chosen_arm, fb,
                                  sample->true_label);
        } else {
            agent.observe(sample->context, decision.chosen_arm, fb);
        }
        cum += static_cast<std::uint64_t>(r);
        revealed += is_revealed ? 1 : 0;
        ++steps;
        tr.decisions.push_back(static_cast<std::uint32_t>(decision.chosen_arm));
        if (steps % cfg.trace_stride == 0) record();
    }
    if (steps % cfg.trace_stride != 0) record();
    tr.total_steps = steps;
    tr.final_cumulative_reward = cum;
    tr.final_revealed_count = revealed;
    tr.final_accuracy = steps ? static_cast<double>(cum) / static_cast<double>(steps) : 0.0;
    tr.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return tr;
}

void emit_trace(const MetricsTrace& trace, const RunConfig& cfg,
                const std::string& csv_path) {
    {
        std::ofstream out(csv_path);
        if (!out) throw DataError(csv_path + ": cannot open for writing");
        out << "step,cumulative_reward,revealed_count,accuracy,errors,arm_count\n";
        char buf[64];
        for (const auto& r : trace.rows) {
            std::snprintf(buf, sizeof(buf), "%.10g", r.accuracy);
            out << r.step << ',' << r.cumulative_reward << ',' << r.revealed_count
                << ',' << buf << ',' << r.errors << ',' << r.arm_count << '\n';
        }
        if (!out) throw DataError(csv_path + ": write failure");
    }
    std::string json_path = csv_path;
    if (json_path.size() > 4 && json_path.ends_with(".csv")) {
        json_path.resize(json_path.size() - 4);
    }
    json_path += ".json";
    nlohmann::json summary = {
        {"config", run_config_to_json(cfg)},
        {"seed", trace.master_seed},
        {"replica", trace.replica},
        {"total_steps", trace.total_steps},
        {"final_accuracy", trace.final_accuracy},
        {"final_cumulative_reward", trace.final_cumulative_reward},
        {"final_revealed_count", trace.final_revealed_count},
        {"wall_seconds", trace.wall_seconds}};
    std::ofstream js(json_path);
    if (!js) throw DataError(json_path + ": cannot open for writing");
    js << summary.dump(2) << '\n';
}

std::vector<MetricsTrace> run_experiment(const RunConfig& cfg) {
    cfg.validate();
    const RunInputs inputs = prepare_inputs(cfg);
    std::vector<MetricsTrace> traces(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers,
                 [&](std::size_t r) { traces[r] = run_replica(cfg, inputs, r); });
    if (!cfg.out.empty()) {
        std::string stem = cfg.out;
        if (stem.ends_with(".csv")) stem.resize(stem.size() - 4);
        for (std::size_t r = 0; r < traces.size(); ++r) {
            const std::string path = cfg.replicas == 1
                                         ? stem + ".csv"
                                         : stem + "_r" + std::to_string(r) + ".csv";
            emit_trace(traces[r], cfg, path);
        }
    }
    return traces;
}

void apply_agent_name(bandit::AgentConfig& cfg, const std::string& name) {
    if (name == "linucb") {
        cfg.mode = bandit::Mode::linucb;
    } else if (name == "berlin_plain" || name == "berlinucb") {
        cfg.mode = bandit::Mode::berlin_plain;
    } else if (name == "berlin_kmeans" || name == "b-kmeans") {
        cfg.mode = bandit::Mode::berlin_selfsup;
        cfg.selfsup_kind = selfsup::Kind::kmeans;
    } else if (name == "berlin_knn" || name == "b-knn") {
        cfg.mode = bandit::Mode::berlin_selfsup;
        cfg.selfsup_kind = selfsup::Kind::knn;
    } else if (name == "berlin_gmm" || name == "b-gmm") {
        cfg.mode = bandit::Mode::berlin_selfsup;
        cfg.selfsup_kind = selfsup::Kind::gmm;
    } else {
        throw ConfigError("unknown agent name '" + name + "'");
    }
}

GridConfig grid_config_from_json(const nlohmann::json& j) {
    GridConfig g;
    if (j.contains("base")) g.base = run_config_from_json(j.at("base"));
    g.agents = j.at("agents").get<std::vector<std::string>>();
    g.scenarios = j.at("scenarios").get<std::vector<std::string>>();
    g.pr_values = j.at("pr").get<std::vector<double>>();
    g.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    g.out = j.value("out", "");
    if (g.agents.empty() || g.scenarios.empty() || g.pr_values.empty() ||
        g.seeds.empty()) {
        throw ConfigError("grid: agents, scenarios, pr, and seeds must be non-empty");
    }
    return g;
}

GridResult run_grid(const GridConfig& grid) {
    struct Task {
        std::size_t cell;
        std::uint64_t seed;
    };
    GridResult result;
    std::vector<RunConfig> cell_cfgs;
    for (const auto& agent : grid.agents) {
        for (const auto& scen : grid.scenarios) {
            for (const double pr : grid.pr_values) {
                RunConfig cfg = grid.base;
                cfg.out.clear();
                cfg.replicas = 1;
                apply_agent_name(cfg.agent, agent);
                cfg.scenario.scenario = scenario_from_string(scen);
                cfg.reveal = env::RevealSchedule::fixed(pr);
                cell_cfgs.push_back(cfg);
                result.cells.push_back({agent, scen, pr, std::nullopt, ""});
            }
        }
    }
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < cell_cfgs.size(); ++c) {
        for (const auto seed : grid.seeds) tasks.push_back({c, seed});
    }
    std::vector<std::optional<double>> accuracy(tasks.size());
    std::vector<std::string> errors(tasks.size());
    parallel_for(tasks.size(), grid.base.workers, [&](std::size_t i) {
        RunConfig cfg = cell_cfgs[tasks[i].cell];
        cfg.seed = tasks[i].seed;
        try {
            const auto traces = run_experiment(cfg);
            accuracy[i] = traces.front().final_accuracy;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    std::vector<double> sums(cell_cfgs.size(), 0.0);
    std::vector<std::size_t> counts(cell_cfgs.size(), 0);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (accuracy[i]) {
            sums[tasks[i].cell] += *accuracy[i];
            ++counts[tasks[i].cell];
        } else if (result.cells[tasks[i].cell].error.empty()) {
            result.cells[tasks[i].cell].error = errors[i];
        }
    }
    for (std::size_t c = 0; c < cell_cfgs.size(); ++c) {
        if (counts[c] == grid.seeds.size()) {
            result.cells[c].mean_accuracy = sums[c] / static_cast<double>(counts[c]);
        }
    }

    // Table: rows = agents, columns = scenario/pr cells.
    std::string csv = "agent";
    for (const auto& scen : grid.scenarios) {
        for (const double pr : grid.pr_values) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), ",%s/pr=%g", scen.c_str(), pr);
            csv += buf;
        }
    }
    csv += '\n';
    const std::size_t cols = grid.scenarios.size() * grid.pr_values.size();
    for (std::size_t a = 0; a < grid.agents.size(); ++a) {
        csv += grid.agents[a];
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& cell = result.cells[a * cols + c];
            if (cell.mean_accuracy) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), ",%.6f", *cell.mean_accuracy);
                csv += buf;
            } else {
                csv += ',';
            }
        }
        csv += '\n';
    }
    result.table_csv = csv;
    if (!grid.out.empty()) {
        std::ofstream out(grid.out);
        if (!out) throw DataError(grid.out + ": cannot open for writing");
        out << csv;
        bool any_error = false;
        for (const auto& cell : result.cells) any_error |= !cell.error.empty();
        if (any_error) {
            std::ofstream diag(grid.out + ".diagnostics.txt");
            for (const auto& cell : result.cells) {
                if (!cell.error.empty()) {
                    diag << cell.agent << ' ' << cell.scenario << " pr=" << cell.pr
                         << ": " << cell.error << '\n';
                }
            }
        }
    }
    return result;
}

}  // namespace berlin::harness
