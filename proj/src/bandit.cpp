#include "berlin/bandit.hpp"

#include <cmath>

namespace berlin::bandit {

Mode mode_from_string(const std::string& s) {
    if (s == "linucb") return Mode::linucb;
    if (s == "berlin_plain") return Mode::berlin_plain;
    if (s == "berlin_selfsup") return Mode::berlin_selfsup;
    throw ConfigError("unknown agent mode '" + s + "'");
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::linucb: return "linucb";
        case Mode::berlin_plain: return "berlin_plain";
        case Mode::berlin_selfsup: return "berlin_selfsup";
    }
    return "?";
}

selfsup::Kind selfsup_kind_from_string(const std::string& s) {
    if (s == "kmeans") return selfsup::Kind::kmeans;
    if (s == "knn") return selfsup::Kind::knn;
    if (s == "gmm") return selfsup::Kind::gmm;
    throw ConfigError("unknown selfsup kind '" + s + "'");
}

std::string to_string(selfsup::Kind k) {
    switch (k) {
        case selfsup::Kind::kmeans: return "kmeans";
        case selfsup::Kind::knn: return "knn";
        case selfsup::Kind::gmm: return "gmm";
    }
    return "?";
}

void AgentConfig::validate() const {
    if (exploration <= 0.0) throw ConfigError("exploration must be positive");
    if (dimension < 1) throw ConfigError("dimension must be >= 1");
}

FeedbackEvent FeedbackEvent::revealed(int r) {
    if (r != 0 && r != 1) {
        throw DimensionError("revealed reward must be 0 or 1");
    }
    return {true, r};
}

double score_arm(const ArmState& arm, const Vector& x, double c) {
    const Vector theta = linalg::solve_theta(arm.A_inv, arm.b);
    return linalg::dot(theta, x) + c * std::sqrt(linalg::quad_form(arm.A_inv, x));
}

Agent::Agent(AgentConfig cfg, std::size_t initial_arms) : cfg_(cfg) {
    cfg_.validate();
    for (std::size_t i = 0; i < initial_arms; ++i) arms_.emplace_back(cfg_.dimension);
    if (cfg_.mode == Mode::berlin_selfsup) {
        selfsup_ = selfsup::make_module(cfg_.selfsup_kind, cfg_.knn_k,
                                        cfg_.knn_capacity);
    }
}

Decision Agent::select(const Vector& x, RngStream& tiebreak) const {
    if (arms_.empty()) throw InvalidStateError("select: agent has no arms");
    Decision d;
    d.scores.reserve(arms_.size());
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& arm : arms_) {
        const double s = score_arm(arm, x, cfg_.exploration);
        d.scores.push_back(s);
        if (s > best) best = s;
    }
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < d.scores.size(); ++i) {
        if (d.scores[i] >= best - 1e-12) candidates.push_back(i);
    }
    if (candidates.size() == 1) {
        d.chosen_arm = candidates.front();
    } else {
        d.chosen_arm = candidates[tiebreak.uniform_int(candidates.size())];
        d.tie_broken = true;
    }
    return d;
}

void Agent::covariance_update(ArmState& arm, const Vector& x) {
    linalg::rank1_add_inplace(arm.A, x);
    linalg::sherman_morrison_inplace(arm.A_inv, x);
    ++arm.covariance_updates;
}

void Agent::observe(const Vector& x, std::size_t chosen, FeedbackEvent fb) {
    ArmState& arm = arms_.at(chosen);
    if (fb.is_revealed) {
        covariance_update(arm, x);
        if (fb.reward == 1) {
            for (std::size_t i = 0; i < x.size(); ++i) arm.b[i] += x[i];
            if (selfsup_) selfsup_->add_labelled(x, chosen);
        }
        ++arm.reward_updates;
        return;
    }
    if (cfg_.skip_all_updates_when_hidden) return;
    switch (cfg_.mode) {
        case Mode::linucb:        // missing feedback treated as reward 0
        case Mode::berlin_plain:  // covariance-only branch
            covariance_update(arm, x);
            break;
        case Mode::berlin_selfsup: {
            const auto pred = selfsup_->predict(x);
            const auto r = selfsup::pseudo_reward(chosen, pred);
            if (!r) break;  // abstention: no update
            if (*r == 1) {
                for (std::size_t i = 0; i < x.size(); ++i) arm.b[i] += x[i];
            }
            ++arm.reward_updates;
            break;
        }
    }
}

std::size_t Agent::add_arm() {
    arms_.emplace_back(cfg_.dimension);
    return arms_.size() - 1;
}

std::optional<std::size_t> Agent::arm_for_class(std::int64_t label) const {
    const auto it = class_to_arm_.find(label);
    if (it == class_to_arm_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Agent::extendable_step(const Vector& x, std::size_t chosen,
                                                  FeedbackEvent fb,
                                                  std::int64_t env_label) {
    if (chosen == 0 && fb.is_revealed && fb.reward == 1 &&
        !class_to_arm_.contains(env_label)) {
        const std::size_t id = add_arm();
        class_to_arm_.emplace(env_label, id);
        ArmState& arm = arms_.front();
        covariance_update(arm, x);
        for (std::size_t i = 0; i < x.size(); ++i) arm.b[i] += x[i];
        ++arm.reward_updates;
        // Labelled memory points at the dedicated arm, not at NEW.
        if (selfsup_) selfsup_->add_labelled(x, id);
        return id;
    }
    observe(x, chosen, fb);
    return std::nullopt;
}

nlohmann::json Agent::to_json() const {
    nlohmann::json arms = nlohmann::json::array();
    for (const auto& a : arms_) {
        arms.push_back({{"A", a.A.storage()},
                        {"b", a.b},
                        {"covariance_updates", a.covariance_updates},
                        {"reward_updates", a.reward_updates}});
    }
    nlohmann::json mapping = nlohmann::json::array();
    for (const auto& [cls, arm] : class_to_arm_) {
        mapping.push_back({{"class", cls}, {"arm", arm}});
    }
    nlohmann::json j = {
        {"version", 1},
        {"config",
         {{"exploration", cfg_.exploration},
          {"dimension", cfg_.dimension},
          {"mode", to_string(cfg_.mode)},
          {"selfsup_kind", to_string(cfg_.selfsup_kind)},
          {"skip_all_updates_when_hidden", cfg_.skip_all_updates_when_hidden},
          {"knn_k", cfg_.knn_k},
          {"knn_capacity", cfg_.knn_capacity}}},
        {"arms", arms},
        {"class_to_arm", mapping}};
    if (selfsup_) j["selfsup"] = selfsup_->to_json();
    return j;
}

Agent Agent::from_json(const nlohmann::json& j) {
    const int version = j.at("version").get<int>();
    if (version != 1) {
        throw FormatError("agent checkpoint: unsupported version " +
                          std::to_string(version));
    }
    const auto& jc = j.at("config");
    AgentConfig cfg;
    cfg.exploration = jc.at("exploration").get<double>();
    cfg.dimension = jc.at("dimension").get<std::size_t>();
    cfg.mode = mode_from_string(jc.at("mode").get<std::string>());
    cfg.selfsup_kind = selfsup_kind_from_string(jc.at("selfsup_kind").get<std::string>());
    cfg.skip_all_updates_when_hidden =
        jc.at("skip_all_updates_when_hidden").get<bool>();
    cfg.knn_k = jc.at("knn_k").get<std::size_t>();
    cfg.knn_capacity = jc.at("knn_capacity").get<std::size_t>();

    Agent agent(cfg, 0);
    const std::size_t d = cfg.dimension;
    for (const auto& ja : j.at("arms")) {
        ArmState arm(d);
        const auto flat = ja.at("A").get<std::vector<double>>();
        if (flat.size() != d * d) {
            throw FormatError("agent checkpoint: arm matrix size mismatch");
        }
        arm.A.storage() = flat;
        arm.A_inv = linalg::cholesky_inverse(arm.A);
        arm.b = ja.at("b").get<Vector>();
        if (arm.b.size() != d) {
            throw FormatError("agent checkpoint: arm b size mismatch");
        }
        arm.covariance_updates = ja.at("covariance_updates").get<std::uint64_t>();
        arm.reward_updates = ja.at("reward_updates").get<std::uint64_t>();
        agent.arms_.push_back(std::move(arm));
    }
    for (const auto& m : j.at("class_to_arm")) {
        agent.class_to_arm_.emplace(m.at("class").get<std::int64_t>(),
                                    m.at("arm").get<std::size_t>());
    }
    if (j.contains("selfsup")) {
        agent.selfsup_ = selfsup::module_from_json(j.at("selfsup"));
    }
    return agent;
}

}  // namespace berlin::bandit
