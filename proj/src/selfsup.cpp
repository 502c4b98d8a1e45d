#include "berlin/selfsup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace berlin::selfsup {

namespace {

double sq_dist(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw DimensionError("selfsup: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Kmeans

void KmeansModule::add_labelled(const Vector& x, std::size_t arm) {
    if (arm >= centroids_.size()) centroids_.resize(arm + 1);
    Centroid& c = centroids_[arm];
    if (c.count == 0) {
        c.mean = x;
        c.count = 1;
        return;
    }
    if (c.mean.size() != x.size()) throw DimensionError("kmeans: dimension mismatch");
    ++c.count;
    const double inv = 1.0 / static_cast<double>(c.count);
    for (std::size_t i = 0; i < x.size(); ++i) {
        c.mean[i] += (x[i] - c.mean[i]) * inv;
    }
}

std::optional<std::size_t> KmeansModule::predict(const Vector& x) const {
    std::optional<std::size_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < centroids_.size(); ++a) {
        if (centroids_[a].count == 0) continue;
        const double d = sq_dist(centroids_[a].mean, x);
        if (d < best_d) {
            best_d = d;
            best = a;
        }
    }
    return best;
}

nlohmann::json KmeansModule::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : centroids_) {
        arr.push_back({{"mean", c.mean}, {"count", c.count}});
    }
    return {{"kind", "kmeans"}, {"centroids", arr}};
}

// ---------------------------------------------------------------------------
// KNN

void KnnModule::add_labelled(const Vector& x, std::size_t arm) {
    if (!memory_.empty() && memory_.front().context.size() != x.size()) {
        throw DimensionError("knn: dimension mismatch");
    }
    memory_.push_back({x, arm});
    while (memory_.size() > capacity_) memory_.pop_front();
}

std::optional<std::size_t> KnnModule::predict(const Vector& x) const {
    if (memory_.empty()) return std::nullopt;
    // Neighbor rank: squared distance, then insertion order (older wins ties).
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(memory_.size());
    for (std::size_t i = 0; i < memory_.size(); ++i) {
        order.emplace_back(sq_dist(memory_[i].context, x), i);
    }
    const std::size_t k = std::min(k_, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                      order.end());
    std::map<std::size_t, std::size_t> votes;
    for (std::size_t i = 0; i < k; ++i) votes[memory_[order[i].second].arm]++;
    std::size_t best_arm = 0, best_votes = 0;
    for (const auto& [arm, n] : votes) {
        if (n > best_votes) {  // map iteration is ascending, ties keep lowest arm
            best_votes = n;
            best_arm = arm;
        }
    }
    return best_arm;
}

nlohmann::json KnnModule::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : memory_) {
        arr.push_back({{"context", p.context}, {"arm", p.arm}});
    }
    return {{"kind", "knn"}, {"k", k_}, {"capacity", capacity_}, {"memory", arr}};
}

// ---------------------------------------------------------------------------
// GMM

double GmmModule::variance(const Component& c, std::size_t i) {
    if (c.count < 2) return kVarianceFloor;
    return std::max(kVarianceFloor, c.m2[i] / static_cast<double>(c.count - 1));
}

void GmmModule::add_labelled(const Vector& x, std::size_t arm) {
    if (arm >= components_.size()) components_.resize(arm + 1);
    Component& c = components_[arm];
    if (c.count == 0) {
        c.mean = x;
        c.m2.assign(x.size(), 0.0);
        c.count = 1;
    } else {
        if (c.mean.size() != x.size()) throw DimensionError("gmm: dimension mismatch");
        ++c.count;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double delta = x[i] - c.mean[i];
            c.mean[i] += delta / static_cast<double>(c.count);
            c.m2[i] += delta * (x[i] - c.mean[i]);
        }
    }
    ++total_;
}

std::optional<std::size_t> GmmModule::predict(const Vector& x) const {
    std::optional<std::size_t> best;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < components_.size(); ++a) {
        const Component& c = components_[a];
        if (c.count == 0) continue;
        if (c.mean.size() != x.size()) throw DimensionError("gmm: dimension mismatch");
        double lp = std::log(static_cast<double>(c.count) /
                             static_cast<double>(total_));
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double var = variance(c, i);
            const double delta = x[i] - c.mean[i];
            lp += -0.5 * std::log(2.0 * std::numbers::pi * var) -
                  delta * delta / (2.0 * var);
        }
        if (lp > best_lp) {
            best_lp = lp;
            best = a;
        }
    }
    return best;
}

nlohmann::json GmmModule::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : components_) {
        arr.push_back({{"mean", c.mean}, {"m2", c.m2}, {"count", c.count}});
    }
    return {{"kind", "gmm"}, {"total", total_}, {"components", arr}};
}

// ---------------------------------------------------------------------------
// Factory / deserialization

std::unique_ptr<Module> make_module(Kind kind, std::size_t knn_k,
                                    std::size_t knn_capacity) {
    switch (kind) {
        case Kind::kmeans: return std::make_unique<KmeansModule>();
        case Kind::knn: return std::make_unique<KnnModule>(knn_k, knn_capacity);
        case Kind::gmm: return std::make_unique<GmmModule>();
    }
    throw InvalidStateError("make_module: unknown kind");
}

std::unique_ptr<Module> module_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "kmeans") {
        auto m = std::make_unique<KmeansModule>();
        for (const auto& c : j.at("centroids")) {
            KmeansModule::Centroid entry;
            entry.mean = c.at("mean").get<Vector>();
            entry.count = c.at("count").get<std::uint64_t>();
            m->centroids().push_back(std::move(entry));
        }
        return m;
    }
    if (kind == "knn") {
        auto m = std::make_unique<KnnModule>(j.at("k").get<std::size_t>(),
                                             j.at("capacity").get<std::size_t>());
        for (const auto& p : j.at("memory")) {
            m->memory().push_back(
                {p.at("context").get<Vector>(), p.at("arm").get<std::size_t>()});
        }
        return m;
    }
    if (kind == "gmm") {
        auto m = std::make_unique<GmmModule>();
        for (const auto& c : j.at("components")) {
            GmmModule::Component entry;
            entry.mean = c.at("mean").get<Vector>();
            entry.m2 = c.at("m2").get<Vector>();
            entry.count = c.at("count").get<std::uint64_t>();
            m->components().push_back(std::move(entry));
        }
        m->set_total_count(j.at("total").get<std::uint64_t>());
        return m;
    }
    throw FormatError("selfsup: unknown module kind '" + kind + "'");
}

}  // namespace berlin::selfsup
