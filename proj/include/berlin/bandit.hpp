#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "berlin/errors.hpp"
#include "berlin/linalg.hpp"
#include "berlin/rng.hpp"
#include "berlin/selfsup.hpp"

namespace berlin::bandit {

using linalg::SymMatrix;
using linalg::Vector;

enum class Mode { linucb, berlin_plain, berlin_selfsup };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);
selfsup::Kind selfsup_kind_from_string(const std::string& s);
std::string to_string(selfsup::Kind k);

struct AgentConfig {
    double exploration = 1.0;  // c_t, constant per run
    std::size_t dimension = 0;
    Mode mode = Mode::linucb;
    selfsup::Kind selfsup_kind = selfsup::Kind::knn;
    bool skip_all_updates_when_hidden = false;  // ablation
    std::size_t knn_k = 5;
    std::size_t knn_capacity = 2000;

    void validate() const;
};

// Per-arm ridge state. A = I + sum over applied contexts of x x^T; A_inv is
// maintained incrementally and must stay consistent with A.
struct ArmState {
    SymMatrix A;
    SymMatrix A_inv;
    Vector b;
    std::uint64_t covariance_updates = 0;
    std::uint64_t reward_updates = 0;

    explicit ArmState(std::size_t d)
        : A(SymMatrix::identity(d)), A_inv(SymMatrix::identity(d)), b(d, 0.0) {}

    bool operator==(const ArmState& o) const = default;
};

struct FeedbackEvent {
    bool is_revealed = false;
    int reward = 0;  // valid only when revealed; always 0 or 1

    static FeedbackEvent revealed(int r);
    static FeedbackEvent hidden() { return {}; }
};

struct Decision {
    std::size_t chosen_arm = 0;
    std::vector<double> scores;
    bool tie_broken = false;
};

// UCB score theta^T x + c * sqrt(x^T A^{-1} x) of a single arm.
double score_arm(const ArmState& arm, const Vector& x, double c);

class Agent {
public:
    Agent(AgentConfig cfg, std::size_t initial_arms);

    const AgentConfig& config() const { return cfg_; }
    std::size_t arm_count() const { return arms_.size(); }
    const ArmState& arm(std::size_t i) const { return arms_.at(i); }
    const std::vector<ArmState>& arms() const { return arms_; }
    const selfsup::Module* selfsup_module() const { return selfsup_.get(); }

    // Scores every arm and picks the argmax; scores within 1e-12 of the max
    // tie-break uniformly from the dedicated stream.
    Decision select(const Vector& x, RngStream& tiebreak) const;

    // Applies the mode's update branch for the chosen arm.
    void observe(const Vector& x, std::size_t chosen, FeedbackEvent fb);

    // Appends a fresh arm (A = I, b = 0) and returns its index.
    std::size_t add_arm();

    // Extendable-arm regime: arm 0 is the designated NEW arm. A confirmed
    // novelty (agent chose NEW, oracle revealed reward 1) spawns a dedicated
    // arm for env_label and applies the rewarded update to the NEW arm.
    // Returns the spawned arm id, if any.
    std::optional<std::size_t> extendable_step(const Vector& x, std::size_t chosen,
                                               FeedbackEvent fb,
                                               std::int64_t env_label);

    // Class -> dedicated arm mapping built up in extendable mode.
    std::optional<std::size_t> arm_for_class(std::int64_t label) const;
    const std::map<std::int64_t, std::size_t>& class_to_arm() const {
        return class_to_arm_;
    }

    nlohmann::json to_json() const;
    static Agent from_json(const nlohmann::json& j);

private:
    void covariance_update(ArmState& arm, const Vector& x);

    AgentConfig cfg_;
    std::vector<ArmState> arms_;
    std::unique_ptr<selfsup::Module> selfsup_;
    std::map<std::int64_t, std::size_t> class_to_arm_;
};

}  // namespace berlin::bandit
