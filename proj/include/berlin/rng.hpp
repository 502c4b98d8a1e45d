#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include "berlin/errors.hpp"

namespace berlin {

// Named, independently seeded random stream. All experiment randomness flows
// through four such streams per replica ("sample-order", "reveal",
// "batch-parameters", "agent-tiebreak"), derived from the master seed by
// hashing the stream name. The generator is splitmix64 with hand-rolled
// distributions so that output is identical across platforms and standard
// library versions.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::string_view name)
        : state_(mix(master_seed ^ fnv1a(name))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw DimensionError("uniform_int: empty range");
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal, Box-Muller with one cached variate.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return mag * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Gamma(alpha, 1) by Marsaglia-Tsang, with the alpha < 1 boost.
    double gamma(double alpha) {
        if (alpha <= 0.0) throw DimensionError("gamma: alpha must be positive");
        if (alpha < 1.0) {
            const double u = uniform();
            return gamma(alpha + 1.0) * std::pow(u > 0.0 ? u : 1e-300, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = gaussian();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
                return d * v;
            }
        }
    }

    // Symmetric Dirichlet(concentration) over k categories.
    std::vector<double> dirichlet(double concentration, std::size_t k) {
        std::vector<double> w(k);
        double sum = 0.0;
        for (auto& wi : w) {
            wi = gamma(concentration);
            sum += wi;
        }
        if (sum <= 0.0) {
            for (auto& wi : w) wi = 1.0 / static_cast<double>(k);
        } else {
            for (auto& wi : w) wi /= sum;
        }
        return w;
    }

    // Index drawn according to the given (normalized) weights.
    std::size_t categorical(const std::vector<double>& weights) {
        const double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

private:
    static constexpr std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace berlin
