#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "berlin/errors.hpp"
#include "berlin/linalg.hpp"

namespace berlin::selfsup {

using linalg::Vector;

enum class Kind { kmeans, knn, gmm };

struct LabelledPoint {
    Vector context;
    std::size_t arm;
};

// Pseudo-reward r' = [chosen == prediction]; abstention carries no signal.
inline std::optional<int> pseudo_reward(std::size_t chosen,
                                        std::optional<std::size_t> prediction) {
    if (!prediction) return std::nullopt;
    return *prediction == chosen ? 1 : 0;
}

// Online clustering self-supervision: absorbs (context, arm) pairs from
// positively rewarded rounds and predicts an arm for unlabelled contexts.
// All implementations are deterministic given insertion order; all ties break
// toward the lowest arm index; predict abstains while no labelled data exists.
class Module {
public:
    virtual ~Module() = default;
    virtual void add_labelled(const Vector& x, std::size_t arm) = 0;
    virtual std::optional<std::size_t> predict(const Vector& x) const = 0;
    virtual Kind kind() const = 0;
    virtual nlohmann::json to_json() const = 0;
};

std::unique_ptr<Module> make_module(Kind kind, std::size_t knn_k = 5,
                                    std::size_t knn_capacity = 2000);
std::unique_ptr<Module> module_from_json(const nlohmann::json& j);

// One running-mean centroid per arm.
class KmeansModule final : public Module {
public:
    struct Centroid {
        Vector mean;
        std::uint64_t count = 0;
    };

    void add_labelled(const Vector& x, std::size_t arm) override;
    std::optional<std::size_t> predict(const Vector& x) const override;
    Kind kind() const override { return Kind::kmeans; }
    nlohmann::json to_json() const override;

    const std::vector<Centroid>& centroids() const { return centroids_; }
    std::vector<Centroid>& centroids() { return centroids_; }

private:
    std::vector<Centroid> centroids_;
};

// FIFO-capped memory, majority vote over the k nearest stored points.
class KnnModule final : public Module {
public:
    explicit KnnModule(std::size_t k = 5, std::size_t capacity = 2000)
        : k_(k), capacity_(capacity) {}

    void add_labelled(const Vector& x, std::size_t arm) override;
    std::optional<std::size_t> predict(const Vector& x) const override;
    Kind kind() const override { return Kind::knn; }
    nlohmann::json to_json() const override;

    std::size_t k() const { return k_; }
    std::size_t capacity() const { return capacity_; }
    const std::deque<LabelledPoint>& memory() const { return memory_; }
    std::deque<LabelledPoint>& memory() { return memory_; }

private:
    std::size_t k_;
    std::size_t capacity_;
    std::deque<LabelledPoint> memory_;
};

// Diagonal-covariance Gaussian per arm, Welford running moments, class priors
// proportional to counts. Variance entries are floored at kVarianceFloor.
class GmmModule final : public Module {
public:
    static constexpr double kVarianceFloor = 1e-6;

    struct Component {
        Vector mean;
        Vector m2;  // sum of squared deviations
        std::uint64_t count = 0;
    };

    void add_labelled(const Vector& x, std::size_t arm) override;
    std::optional<std::size_t> predict(const Vector& x) const override;
    Kind kind() const override { return Kind::gmm; }
    nlohmann::json to_json() const override;

    const std::vector<Component>& components() const { return components_; }
    std::vector<Component>& components() { return components_; }
    std::uint64_t total_count() const { return total_; }
    void set_total_count(std::uint64_t t) { total_ = t; }

    // Sample variance with the floor applied; defined as the floor for count < 2.
    static double variance(const Component& c, std::size_t i);

private:
    std::vector<Component> components_;
    std::uint64_t total_ = 0;
};

}  // namespace berlin::selfsup
