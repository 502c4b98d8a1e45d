#include "berlin/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace berlin::data {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) {
        throw FormatError(path + ": truncated header at offset " +
                          std::to_string(static_cast<long long>(in.tellg())));
    }
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char buf[4] = {
        static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::string hex_magic(std::uint32_t m) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", m);
    return buf;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

Dataset load_csv_impl(const std::string& path, const std::string& label_column,
                      std::size_t limit, bool scale) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open");

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);

    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) label_idx = i;
    }
    if (label_idx == header.size()) {
        throw ConfigError(path + ": label column '" + label_column + "' not found");
    }

    Dataset ds;
    ds.name = path;
    std::map<std::string, std::int64_t> label_ids;  // first-appearance order kept separately
    std::size_t row_no = 1;
    while (std::getline(in, line) && (limit == 0 || ds.size() < limit)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DataError(path + ": row " + std::to_string(row_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        }
        Vector x;
        x.reserve(header.size() - 1);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i == label_idx) continue;
            double v;
            if (!parse_double(cells[i], v)) {
                throw DataError(path + ": row " + std::to_string(row_no) +
                                ": non-numeric feature cell '" + cells[i] +
                                "' in column '" + header[i] + "'");
            }
            x.push_back(v);
        }
        const std::string& lab = cells[label_idx];
        auto it = label_ids.find(lab);
        if (it == label_ids.end()) {
            it = label_ids.emplace(lab, static_cast<std::int64_t>(label_ids.size())).first;
        }
        ds.features.push_back(std::move(x));
        ds.labels.push_back(it->second);
    }
    if (ds.features.empty()) throw DataError(path + ": no data rows");
    ds.class_count = label_ids.size();

    if (scale) {
        const std::size_t d = ds.dim();
        Vector lo(d, std::numeric_limits<double>::infinity());
        Vector hi(d, -std::numeric_limits<double>::infinity());
        for (const auto& x : ds.features) {
            for (std::size_t j = 0; j < d; ++j) {
                lo[j] = std::min(lo[j], x[j]);
                hi[j] = std::max(hi[j], x[j]);
            }
        }
        for (auto& x : ds.features) {
            for (std::size_t j = 0; j < d; ++j) {
                const double range = hi[j] - lo[j];
                x[j] = range > 0.0 ? (x[j] - lo[j]) / range : 0.0;
            }
        }
    }
    ds.validate(scale);
    return ds;
}

}  // namespace

void Dataset::validate(bool features_in_unit_range) const {
    if (features.size() != labels.size()) {
        throw DataError(name + ": " + std::to_string(features.size()) +
                        " features vs " + std::to_string(labels.size()) + " labels");
    }
    if (features.empty()) throw DataError(name + ": empty dataset");
    const std::size_t d = features.front().size();
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != d) {
            throw DataError(name + ": sample " + std::to_string(i) +
                            " has dimension " + std::to_string(features[i].size()) +
                            ", expected " + std::to_string(d));
        }
        for (const double v : features[i]) {
            if (!std::isfinite(v)) {
                throw DataError(name + ": non-finite feature in sample " +
                                std::to_string(i));
            }
            if (features_in_unit_range && (v < 0.0 || v > 1.0)) {
                throw DataError(name + ": feature outside [0,1] in sample " +
                                std::to_string(i));
            }
        }
        if (labels[i] < 0 || labels[i] >= static_cast<std::int64_t>(class_count)) {
            throw DataError(name + ": label " + std::to_string(labels[i]) +
                            " out of range at sample " + std::to_string(i));
        }
    }
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t limit) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError(images_path + ": cannot open");
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError(labels_path + ": cannot open");

    const std::uint32_t img_magic = read_be32(img, images_path);
    if (img_magic != kIdxImagesMagic) {
        throw FormatError(images_path + ": magic " + hex_magic(img_magic) +
                          " at offset 0, expected " + hex_magic(kIdxImagesMagic));
    }
    const std::uint32_t n_img = read_be32(img, images_path);
    const std::uint32_t rows = read_be32(img, images_path);
    const std::uint32_t cols = read_be32(img, images_path);

    const std::uint32_t lab_magic = read_be32(lab, labels_path);
    if (lab_magic != kIdxLabelsMagic) {
        throw FormatError(labels_path + ": magic " + hex_magic(lab_magic) +
                          " at offset 0, expected " + hex_magic(kIdxLabelsMagic));
    }
    const std::uint32_t n_lab = read_be32(lab, labels_path);
    if (n_img != n_lab) {
        throw DataError("IDX count mismatch: " + std::to_string(n_img) +
                        " images vs " + std::to_string(n_lab) + " labels");
    }

    const std::size_t n = limit > 0 ? std::min<std::size_t>(limit, n_img) : n_img;
    const std::size_t d = static_cast<std::size_t>(rows) * cols;

    Dataset ds;
    ds.name = images_path;
    ds.rows = rows;
    ds.cols = cols;
    ds.features.reserve(n);
    ds.labels.reserve(n);
    std::vector<unsigned char> buf(d);
    std::int64_t max_label = -1;
    for (std::size_t i = 0; i < n; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(d));
        if (!img) {
            throw FormatError(images_path + ": truncated at sample " + std::to_string(i));
        }
        Vector x(d);
        for (std::size_t j = 0; j < d; ++j) x[j] = buf[j] / 255.0;
        ds.features.push_back(std::move(x));

        unsigned char l = 0;
        lab.read(reinterpret_cast<char*>(&l), 1);
        if (!lab) {
            throw FormatError(labels_path + ": truncated at sample " + std::to_string(i));
        }
        ds.labels.push_back(l);
        max_label = std::max<std::int64_t>(max_label, l);
    }
    ds.class_count = static_cast<std::size_t>(max_label + 1);
    ds.validate(true);
    return ds;
}

void save_idx(const Dataset& ds, const std::string& images_path,
              const std::string& labels_path) {
    if (ds.rows * ds.cols != ds.dim()) {
        throw DimensionError("save_idx: rows*cols != feature dimension");
    }
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw DataError(images_path + ": cannot open for writing");
    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw DataError(labels_path + ": cannot open for writing");

    write_be32(img, kIdxImagesMagic);
    write_be32(img, static_cast<std::uint32_t>(ds.size()));
    write_be32(img, static_cast<std::uint32_t>(ds.rows));
    write_be32(img, static_cast<std::uint32_t>(ds.cols));
    write_be32(lab, kIdxLabelsMagic);
    write_be32(lab, static_cast<std::uint32_t>(ds.size()));

    std::vector<unsigned char> buf(ds.dim());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            buf[j] = static_cast<unsigned char>(
                std::lround(std::clamp(ds.features[i][j], 0.0, 1.0) * 255.0));
        }
        img.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
        const unsigned char l = static_cast<unsigned char>(ds.labels[i]);
        lab.write(reinterpret_cast<const char*>(&l), 1);
    }
}

Dataset load_labelled_csv(const std::string& path, const std::string& label_column,
                          std::size_t limit) {
    return load_csv_impl(path, label_column, limit, true);
}

Dataset load_labelled_csv_raw(const std::string& path, const std::string& label_column,
                              std::size_t limit) {
    return load_csv_impl(path, label_column, limit, false);
}

Dataset pool_downsample(const Dataset& ds, std::size_t factor) {
    if (factor == 0) throw DimensionError("pool_downsample: factor must be positive");
    if (factor == 1) return ds;
    const std::size_t d = ds.dim();
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(double(d))));
    if (side * side != d) {
        throw DimensionError("pool_downsample: dimension " + std::to_string(d) +
                             " is not a perfect square");
    }
    if (side % factor != 0) {
        throw DimensionError("pool_downsample: side " + std::to_string(side) +
                             " not divisible by factor " + std::to_string(factor));
    }
    const std::size_t out_side = side / factor;
    Dataset out;
    out.name = ds.name + " (pooled x" + std::to_string(factor) + ")";
    out.class_count = ds.class_count;
    out.labels = ds.labels;
    out.rows = out_side;
    out.cols = out_side;
    out.features.reserve(ds.size());
    const double inv = 1.0 / static_cast<double>(factor * factor);
    for (const auto& x : ds.features) {
        Vector y(out_side * out_side, 0.0);
        for (std::size_t r = 0; r < side; ++r) {
            for (std::size_t c = 0; c < side; ++c) {
                y[(r / factor) * out_side + (c / factor)] += x[r * side + c];
            }
        }
        for (auto& v : y) v *= inv;
        out.features.push_back(std::move(y));
    }
    return out;
}

std::pair<Dataset, Dataset> stretch_concat(const Dataset& a, const Dataset& b) {
    const std::size_t da = a.dim();
    const std::size_t db = b.dim();
    const std::size_t d = da + db;

    Dataset ea;
    ea.name = a.name + "+" + b.name + " (domain A)";
    ea.class_count = a.class_count + b.class_count;
    ea.labels = a.labels;
    ea.features.reserve(a.size());
    for (const auto& x : a.features) {
        Vector y(d, 0.0);
        std::copy(x.begin(), x.end(), y.begin());
        ea.features.push_back(std::move(y));
    }

    Dataset eb;
    eb.name = a.name + "+" + b.name + " (domain B)";
    eb.class_count = a.class_count + b.class_count;
    eb.labels.reserve(b.size());
    for (const auto l : b.labels) {
        eb.labels.push_back(l + static_cast<std::int64_t>(a.class_count));
    }
    eb.features.reserve(b.size());
    for (const auto& x : b.features) {
        Vector y(d, 0.0);
        std::copy(x.begin(), x.end(), y.begin() + static_cast<std::ptrdiff_t>(da));
        eb.features.push_back(std::move(y));
    }
    return {std::move(ea), std::move(eb)};
}

}  // namespace berlin::data
