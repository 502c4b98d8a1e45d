#include "support/fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "berlin/rng.hpp"

namespace fixtures {

using berlin::RngStream;
using berlin::data::Dataset;

Dataset blob_images(std::size_t classes, std::size_t samples, std::size_t side,
                    double noise_sigma, std::uint64_t seed, std::size_t modes) {
    RngStream rng(seed, "fixture-images");
    const std::size_t d = side * side;
    // Sparse stroke-style prototypes: each class mode lights up a small random
    // subset of pixels, like digit images, so patterns are nearly orthogonal.
    // With modes > 1 a class is a union of distinct patterns, which keeps it
    // easy for exemplar methods and hard for a single linear discriminant.
    std::vector<std::vector<berlin::linalg::Vector>> prototypes(classes);
    for (auto& class_modes : prototypes) {
        class_modes.resize(modes);
        for (auto& p : class_modes) {
            p.assign(d, 0.0);
            for (auto& v : p) {
                if (rng.uniform() < 0.10) v = rng.uniform(0.6, 1.0);
            }
        }
    }
    Dataset ds;
    ds.name = "blob-images";
    ds.class_count = classes;
    ds.rows = side;
    ds.cols = side;
    ds.features.reserve(samples);
    ds.labels.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const std::size_t k = i % classes;
        auto x = prototypes[k][rng.uniform_int(modes)];
        for (auto& v : x) {
            v = std::clamp(v + noise_sigma * rng.gaussian(), 0.0, 1.0);
        }
        ds.features.push_back(std::move(x));
        ds.labels.push_back(static_cast<std::int64_t>(k));
    }
    return ds;
}

Dataset blob_vectors(std::size_t classes, std::size_t samples, std::size_t dimension,
                     double separation, double sigma, std::uint64_t seed) {
    RngStream rng(seed, "fixture-vectors");
    const double scale = separation * sigma / std::sqrt(2.0);
    Dataset ds;
    ds.name = "blob-vectors";
    ds.class_count = classes;
    ds.features.reserve(samples);
    ds.labels.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const std::size_t k = i % classes;
        berlin::linalg::Vector x(dimension, 0.0);
        x[k % dimension] = scale;
        for (auto& v : x) v += sigma * rng.gaussian();
        ds.features.push_back(std::move(x));
        ds.labels.push_back(static_cast<std::int64_t>(k));
    }
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    for (std::size_t j = 0; j < ds.dim(); ++j) out << 'f' << j << ',';
    out << "label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        char buf[32];
        for (const double v : ds.features[i]) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << buf << ',';
        }
        out << ds.labels[i] << '\n';
    }
}

std::string temp_dir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("berlin_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace fixtures
