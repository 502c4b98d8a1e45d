#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "berlin/rng.hpp"
#include "berlin/selfsup.hpp"

using namespace berlin;
using namespace berlin::selfsup;
using linalg::Vector;

namespace {

Vector rand_vec(RngStream& rng, std::size_t d, double lo = -1.0, double hi = 1.0) {
    Vector x(d);
    for (auto& v : x) v = rng.uniform(lo, hi);
    return x;
}

// Independent 5-NN oracle: full scan, exact sort by (squared distance,
// insertion index), majority with lowest-arm tie rule.
std::size_t brute_force_knn(const std::vector<LabelledPoint>& mem, const Vector& q,
                            std::size_t k) {
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < mem.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double d = mem[i].context[j] - q[j];
            d2 += d * d;
        }
        order.emplace_back(d2, i);
    }
    std::sort(order.begin(), order.end());
    std::map<std::size_t, std::size_t> votes;
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
        votes[mem[order[i].second].arm]++;
    }
    std::size_t best_arm = 0, best = 0;
    for (const auto& [arm, n] : votes) {
        if (n > best) {
            best = n;
            best_arm = arm;
        }
    }
    return best_arm;
}

}  // namespace

TEST_CASE("pseudo_reward Iverson bracket") {
    CHECK(pseudo_reward(2, 2) == 1);
    CHECK(pseudo_reward(2, 0) == 0);
    CHECK_FALSE(pseudo_reward(2, std::nullopt).has_value());
}

TEST_CASE("empty modules abstain") {
    for (const auto kind : {Kind::kmeans, Kind::knn, Kind::gmm}) {
        const auto m = make_module(kind);
        CHECK_FALSE(m->predict({1.0, 2.0}).has_value());
    }
}

TEST_CASE("kmeans running centroid") {
    KmeansModule m;
    m.add_labelled({0, 0}, 0);
    m.add_labelled({2, 0}, 0);
    REQUIRE(m.centroids().size() == 1);
    CHECK(m.centroids()[0].mean == Vector{1, 0});
    CHECK(m.centroids()[0].count == 2);

    m.add_labelled({10, 10}, 1);
    CHECK(m.predict({1, 1}) == 0);
    CHECK(m.predict({9, 9}) == 1);
}

TEST_CASE("kmeans centroid equals the arithmetic mean after any insertion order") {
    RngStream rng(11, "kmeans-prop");
    KmeansModule m;
    std::vector<std::vector<Vector>> inserted(4);
    for (int i = 0; i < 500; ++i) {
        const std::size_t arm = rng.uniform_int(4);
        const auto x = rand_vec(rng, 6, -10, 10);
        inserted[arm].push_back(x);
        m.add_labelled(x, arm);
    }
    for (std::size_t arm = 0; arm < 4; ++arm) {
        if (inserted[arm].empty()) continue;
        Vector mean(6, 0.0);
        for (const auto& x : inserted[arm]) {
            for (std::size_t j = 0; j < 6; ++j) mean[j] += x[j];
        }
        for (auto& v : mean) v /= static_cast<double>(inserted[arm].size());
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(m.centroids()[arm].mean[j] ==
                  doctest::Approx(mean[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("kmeans tie breaks to the lowest arm index") {
    KmeansModule m;
    m.add_labelled({1, 0}, 2);
    m.add_labelled({-1, 0}, 0);
    CHECK(m.predict({0, 0}) == 0);  // equidistant
}

TEST_CASE("knn FIFO capacity") {
    KnnModule m(5, 3);
    for (int i = 0; i < 4; ++i) {
        m.add_labelled({double(i)}, static_cast<std::size_t>(i));
    }
    REQUIRE(m.memory().size() == 3);
    CHECK(m.memory().front().arm == 1);  // oldest evicted
    CHECK(m.memory().back().arm == 3);
}

TEST_CASE("knn worked example") {
    KnnModule m(5, 100);
    m.add_labelled({0, 0}, 0);
    m.add_labelled({0, 0.1}, 0);
    m.add_labelled({1, 1}, 1);
    CHECK(m.predict({0.05, 0}) == 0);
}

TEST_CASE("knn matches the brute-force oracle") {
    RngStream rng(23, "knn-oracle");
    KnnModule m(5, 500);
    std::vector<LabelledPoint> shadow;
    for (int i = 0; i < 500; ++i) {
        const auto x = rand_vec(rng, 8);
        const std::size_t arm = rng.uniform_int(7);
        m.add_labelled(x, arm);
        shadow.push_back({x, arm});
    }
    for (int q = 0; q < 1000; ++q) {
        const auto query = rand_vec(rng, 8);
        CHECK(m.predict(query) == brute_force_knn(shadow, query, 5));
    }
}

TEST_CASE("knn uses all points when fewer than k are stored") {
    KnnModule m(5, 100);
    m.add_labelled({0, 0}, 3);
    CHECK(m.predict({5, 5}) == 3);
}

TEST_CASE("gmm single point: mean exact, variance floored") {
    GmmModule m;
    m.add_labelled({1, 1}, 0);
    REQUIRE(m.components().size() == 1);
    CHECK(m.components()[0].mean == Vector{1, 1});
    CHECK(GmmModule::variance(m.components()[0], 0) == GmmModule::kVarianceFloor);
    CHECK(m.predict({0.9, 1.1}) == 0);
}

TEST_CASE("gmm welford moments match the two-pass computation") {
    RngStream rng(5, "gmm-prop");
    GmmModule m;
    std::vector<Vector> xs;
    for (int i = 0; i < 200; ++i) {
        xs.push_back(rand_vec(rng, 3, -4, 4));
        m.add_labelled(xs.back(), 0);
    }
    Vector mean(3, 0.0);
    for (const auto& x : xs) {
        for (int j = 0; j < 3; ++j) mean[j] += x[j];
    }
    for (auto& v : mean) v /= 200.0;
    Vector var(3, 0.0);
    for (const auto& x : xs) {
        for (int j = 0; j < 3; ++j) var[j] += (x[j] - mean[j]) * (x[j] - mean[j]);
    }
    for (auto& v : var) v /= 199.0;
    for (int j = 0; j < 3; ++j) {
        CHECK(m.components()[0].mean[j] == doctest::Approx(mean[j]).epsilon(1e-10));
        CHECK(GmmModule::variance(m.components()[0], j) ==
              doctest::Approx(var[j]).epsilon(1e-10));
    }
}

TEST_CASE("gmm separates well-spaced blobs") {
    RngStream rng(77, "gmm-blobs");
    const double sigma = 1.0;
    const std::vector<Vector> means = {{0, 0, 0}, {10, 0, 0}, {0, 10, 10}};
    GmmModule m;
    for (int i = 0; i < 150; ++i) {
        const std::size_t k = i % 3;
        Vector x = means[k];
        for (auto& v : x) v += sigma * rng.gaussian();
        m.add_labelled(x, k);
    }
    int correct = 0;
    for (int i = 0; i < 300; ++i) {
        const std::size_t k = i % 3;
        Vector x = means[k];
        for (auto& v : x) v += sigma * rng.gaussian();
        if (m.predict(x) == k) ++correct;
    }
    CHECK(correct >= 297);  // >= 99%
}

TEST_CASE("predict never returns an arm without labelled points") {
    RngStream rng(9, "holes");
    KmeansModule km;
    GmmModule gm;
    KnnModule kn(5, 100);
    // only arms 1 and 4 receive data
    for (int i = 0; i < 40; ++i) {
        const std::size_t arm = (i % 2) ? 1 : 4;
        const auto x = rand_vec(rng, 4);
        km.add_labelled(x, arm);
        gm.add_labelled(x, arm);
        kn.add_labelled(x, arm);
    }
    for (int q = 0; q < 50; ++q) {
        const auto query = rand_vec(rng, 4);
        for (const Module* m : {static_cast<Module*>(&km), static_cast<Module*>(&gm),
                                static_cast<Module*>(&kn)}) {
            const auto p = m->predict(query);
            REQUIRE(p.has_value());
            CHECK((*p == 1 || *p == 4));
        }
    }
}

TEST_CASE("serialization round-trip preserves predictions") {
    RngStream rng(31, "ser");
    for (const auto kind : {Kind::kmeans, Kind::knn, Kind::gmm}) {
        auto m = make_module(kind, 5, 50);
        for (int i = 0; i < 80; ++i) {
            m->add_labelled(rand_vec(rng, 5), rng.uniform_int(3));
        }
        const auto restored = module_from_json(m->to_json());
        for (int q = 0; q < 50; ++q) {
            const auto query = rand_vec(rng, 5);
            CHECK(m->predict(query) == restored->predict(query));
        }
    }
}
