#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "berlin/errors.hpp"
#include "berlin/linalg.hpp"

namespace berlin::data {

using linalg::Vector;

// Immutable labelled dataset. Labels are contiguous class ids in [0, class_count).
struct Dataset {
    std::vector<Vector> features;
    std::vector<std::int64_t> labels;
    std::size_t class_count = 0;
    std::string name;
    // Image geometry when loaded from IDX (0 otherwise); kept for pooling and
    // round-trip serialization.
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t size() const { return features.size(); }
    std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }

    // Checks the structural invariants; throws DataError on violation.
    void validate(bool features_in_unit_range = false) const;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
inline constexpr std::size_t kDefaultSampleLimit = 5000;

// Parses the big-endian IDX pair (u8 pixels scaled to [0,1] by /255,
// flattened row-major). Keeps the first `limit` samples.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t limit = kDefaultSampleLimit);

// Writes a dataset back to an IDX pair (pixels as round(v*255)); lossless for
// datasets that came from u8 sources. Requires rows*cols == dim.
void save_idx(const Dataset& ds, const std::string& images_path,
              const std::string& labels_path);

// Comma-separated file with a header row; every non-label column must be
// numeric. Features are min-max scaled to [0,1] per column (constant columns
// map to 0); labels become contiguous ids by first-appearance order.
Dataset load_labelled_csv(const std::string& path, const std::string& label_column,
                          std::size_t limit = kDefaultSampleLimit);

// As load_labelled_csv but without per-column scaling. Used for feature-stream
// files where rows are time-ordered frames.
Dataset load_labelled_csv_raw(const std::string& path, const std::string& label_column,
                              std::size_t limit = 0);

// Non-overlapping factor x factor average pooling of square-image features.
Dataset pool_downsample(const Dataset& ds, std::size_t factor);

// Re-embeds both datasets in dimension dim_a + dim_b (a occupies the leading
// coordinates, b the trailing ones, labels of b offset by a.class_count).
std::pair<Dataset, Dataset> stretch_concat(const Dataset& a, const Dataset& b);

}  // namespace berlin::data
