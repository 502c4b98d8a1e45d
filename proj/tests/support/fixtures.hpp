#pragma once

#include <cstdint>
#include <string>

#include "berlin/data.hpp"

namespace fixtures {

// Image-shaped labelled dataset: one random [0,1] prototype per class plus
// Gaussian pixel noise, clipped to [0,1]. Stands in for a digit-style corpus
// wherever a real one is not on disk.
berlin::data::Dataset blob_images(std::size_t classes, std::size_t samples,
                                  std::size_t side, double noise_sigma,
                                  std::uint64_t seed, std::size_t modes = 1);

// Low-dimensional Gaussian-blob dataset with pairwise mean distance
// separation * sigma.
berlin::data::Dataset blob_vectors(std::size_t classes, std::size_t samples,
                                   std::size_t dimension, double separation,
                                   double sigma, std::uint64_t seed);

// Writes the dataset as a labelled CSV (header f0..f{d-1},label).
void write_csv(const berlin::data::Dataset& ds, const std::string& path);

// Fresh directory under the system temp root; unique per (tag, seed).
std::string temp_dir(const std::string& tag);

}  // namespace fixtures
