#include "berlin/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace berlin::env {

RevealSchedule RevealSchedule::fixed(double p_r) {
    if (p_r < 0.0 || p_r > 1.0) throw ConfigError("reveal probability outside [0,1]");
    RevealSchedule s;
    s.kind = Kind::fixed;
    s.p = p_r;
    return s;
}

RevealSchedule RevealSchedule::per_batch(std::vector<double> values) {
    if (values.empty()) throw ConfigError("per-batch reveal schedule is empty");
    for (const double v : values) {
        if (v < 0.0 || v > 1.0) throw ConfigError("reveal probability outside [0,1]");
    }
    RevealSchedule s;
    s.kind = Kind::per_batch;
    s.values = std::move(values);
    return s;
}

double RevealSchedule::p_for_batch(std::uint64_t batch) const {
    if (kind == Kind::fixed) return p;
    return values[batch % values.size()];
}

Environment::Environment(EnvConfig cfg, RevealSchedule schedule,
                         std::uint64_t master_seed)
    : sample_rng_(master_seed, "sample-order"),
      batch_rng_(master_seed, "batch-parameters"),
      cfg_(cfg),
      schedule_(std::move(schedule)),
      reveal_rng_(master_seed, "reveal") {
    if (cfg_.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg_.total_steps < 1) throw ConfigError("total_steps must be >= 1");
}

std::optional<StreamSample> Environment::next_sample() {
    if (step_ >= cfg_.total_steps) return std::nullopt;
    const std::uint64_t batch = step_ / cfg_.batch_size;
    if (step_ % cfg_.batch_size == 0) on_batch_start(batch);
    StreamSample s;
    s.step = step_;
    s.batch_index = batch;
    draw(s.context, s.true_label);
    ++step_;
    return s;
}

bool Environment::reveal() {
    const std::uint64_t batch = reveal_step_ / cfg_.batch_size;
    ++reveal_step_;
    return reveal_rng_.uniform() < schedule_.p_for_batch(batch);
}

int true_reward(std::int64_t label, std::size_t chosen,
                const std::optional<std::size_t>& mapped_arm, bool extendable) {
    if (!extendable) return chosen == static_cast<std::size_t>(label) ? 1 : 0;
    if (mapped_arm) return chosen == *mapped_arm ? 1 : 0;
    return chosen == 0 ? 1 : 0;  // unmapped class: NEW is the correct action
}

namespace {

// ---------------------------------------------------------------------------

class StationaryEnv : public Environment {
public:
    StationaryEnv(Dataset ds, EnvConfig cfg, RevealSchedule sched, std::uint64_t seed)
        : Environment(cfg, std::move(sched), seed), ds_(std::move(ds)) {
        ds_.validate();
    }

    std::size_t dimension() const override { return ds_.dim(); }
    std::size_t class_count() const override { return ds_.class_count; }

protected:
    void draw(Vector& context, std::int64_t& label) override {
        context = ds_.features[cursor_];
        label = ds_.labels[cursor_];
        cursor_ = (cursor_ + 1) % ds_.size();
    }

    Dataset ds_;

private:
    std::size_t cursor_ = 0;
};

// ---------------------------------------------------------------------------

class ClusterDriftEnv : public Environment {
public:
    ClusterDriftEnv(Dataset ds, std::size_t k, double concentration, EnvConfig cfg,
                    RevealSchedule sched, std::uint64_t seed)
        : Environment(cfg, std::move(sched), seed),
          ds_(std::move(ds)),
          concentration_(concentration) {
        ds_.validate();
        if (k < 1) throw ConfigError("cluster_drift: k must be >= 1");
        if (k > ds_.size()) throw ConfigError("cluster_drift: k exceeds dataset size");
        build_clusters(k);
        cursors_.assign(clusters_.size(), 0);
    }

    std::size_t dimension() const override { return ds_.dim(); }
    std::size_t class_count() const override { return ds_.class_count; }

protected:
    void on_batch_start(std::uint64_t) override {
        weights_ = batch_rng_.dirichlet(concentration_, clusters_.size());
    }

    void draw(Vector& context, std::int64_t& label) override {
        const std::size_t c = sample_rng_.categorical(weights_);
        const auto& members = clusters_[c];
        const std::size_t idx = members[cursors_[c] % members.size()];
        ++cursors_[c];
        context = ds_.features[idx];
        label = ds_.labels[idx];
    }

private:
    static double sq_dist(const Vector& a, const Vector& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            s += d * d;
        }
        return s;
    }

    // Lloyd, 20 iterations, farthest-point init seeded from batch_rng_.
    // Member lists preserve dataset order, so k=1 degenerates to the
    // stationary sequential stream.
    void build_clusters(std::size_t k) {
        const std::size_t n = ds_.size();
        if (k == 1) {
            clusters_.emplace_back(n);
            std::iota(clusters_.front().begin(), clusters_.front().end(), 0u);
            return;
        }
        std::vector<Vector> centroids;
        centroids.push_back(ds_.features[batch_rng_.uniform_int(n)]);
        std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
        while (centroids.size() < k) {
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                nearest[i] = std::min(nearest[i], sq_dist(ds_.features[i], centroids.back()));
                if (nearest[i] > far_d) {
                    far_d = nearest[i];
                    far = i;
                }
            }
            centroids.push_back(ds_.features[far]);
        }
        std::vector<std::size_t> assign(n, 0);
        for (int iter = 0; iter < 20; ++iter) {
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t best = 0;
                double best_d = std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < k; ++c) {
                    const double d = sq_dist(ds_.features[i], centroids[c]);
                    if (d < best_d) {
                        best_d = d;
                        best = c;
                    }
                }
                assign[i] = best;
            }
            std::vector<std::size_t> counts(k, 0);
            std::vector<Vector> sums(k, Vector(ds_.dim(), 0.0));
            for (std::size_t i = 0; i < n; ++i) {
                ++counts[assign[i]];
                for (std::size_t j = 0; j < ds_.dim(); ++j) {
                    sums[assign[i]][j] += ds_.features[i][j];
                }
            }
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] == 0) {
                    // empty-cluster repair: reseed from the farthest point
                    std::size_t far = 0;
                    double far_d = -1.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const double d = sq_dist(ds_.features[i], centroids[assign[i]]);
                        if (d > far_d) {
                            far_d = d;
                            far = i;
                        }
                    }
                    centroids[c] = ds_.features[far];
                    continue;
                }
                for (std::size_t j = 0; j < ds_.dim(); ++j) {
                    centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
                }
            }
        }
        clusters_.assign(k, {});
        for (std::size_t i = 0; i < n; ++i) clusters_[assign[i]].push_back(i);
        for (std::size_t c = 0; c < k; ++c) {
            if (clusters_[c].empty()) {
                // a cluster can still end up empty after the last iteration;
                // fold it away so categorical draws always land on members
                clusters_.erase(clusters_.begin() + static_cast<std::ptrdiff_t>(c));
                --c;
            }
        }
    }

    Dataset ds_;
    double concentration_;
    std::vector<std::vector<std::size_t>> clusters_;
    std::vector<std::size_t> cursors_;
    std::vector<double> weights_;
};

// ---------------------------------------------------------------------------

class NegativeImagesEnv : public StationaryEnv {
public:
    NegativeImagesEnv(Dataset ds, double p_min, double p_max, EnvConfig cfg,
                      RevealSchedule sched, std::uint64_t seed)
        : StationaryEnv(std::move(ds), cfg, std::move(sched), seed),
          p_min_(p_min),
          p_max_(p_max) {
        if (p_min_ < 0.0 || p_max_ > 1.0 || p_min_ > p_max_) {
            throw ConfigError("negative_images: invalid probability range");
        }
        ds_.validate(true);  // negation requires features in [0,1]
    }

protected:
    void on_batch_start(std::uint64_t) override {
        p_ = batch_rng_.uniform(p_min_, p_max_);
    }

    void draw(Vector& context, std::int64_t& label) override {
        StationaryEnv::draw(context, label);
        if (sample_rng_.uniform() < p_) {
            for (auto& v : context) v = 1.0 - v;
        }
    }

private:
    double p_min_, p_max_, p_ = 0.0;
};

// ---------------------------------------------------------------------------

class ShuffledLabelsEnv : public StationaryEnv {
public:
    ShuffledLabelsEnv(Dataset ds, EnvConfig cfg, RevealSchedule sched,
                      std::uint64_t seed, bool identity_hook)
        : StationaryEnv(std::move(ds), cfg, std::move(sched), seed),
          identity_(identity_hook) {
        if (ds_.class_count < 2) {
            throw ConfigError("shuffled_labels: needs at least 2 classes");
        }
        perm_.resize(ds_.class_count);
        std::iota(perm_.begin(), perm_.end(), std::int64_t{0});
    }

    const std::vector<std::int64_t>& current_permutation() const { return perm_; }

protected:
    void on_batch_start(std::uint64_t) override {
        std::iota(perm_.begin(), perm_.end(), std::int64_t{0});
        // Fisher-Yates on the batch-parameters stream; the hook still draws so
        // stream alignment is identical with and without it.
        for (std::size_t i = perm_.size() - 1; i > 0; --i) {
            const std::size_t j = batch_rng_.uniform_int(i + 1);
            if (!identity_) std::swap(perm_[i], perm_[j]);
        }
    }

    void draw(Vector& context, std::int64_t& label) override {
        StationaryEnv::draw(context, label);
        label = perm_[static_cast<std::size_t>(label)];
    }

private:
    std::vector<std::int64_t> perm_;
    bool identity_;
};

// ---------------------------------------------------------------------------

class MultitaskEnv : public Environment {
public:
    MultitaskEnv(Dataset a, Dataset b, double domain_a_prob, EnvConfig cfg,
                 RevealSchedule sched, std::uint64_t seed)
        : Environment(cfg, std::move(sched), seed),
          domains_{std::move(a), std::move(b)},
          domain_a_prob_(domain_a_prob) {
        domains_[0].validate();
        domains_[1].validate();
        if (domains_[0].dim() != domains_[1].dim()) {
            throw ConfigError("multitask: domains must share the embedded dimension");
        }
        if (domains_[0].class_count != domains_[1].class_count) {
            throw ConfigError("multitask: domains must share the combined class count");
        }
    }

    std::size_t dimension() const override { return domains_[0].dim(); }
    std::size_t class_count() const override { return domains_[0].class_count; }

protected:
    void on_batch_start(std::uint64_t) override {
        active_ = batch_rng_.uniform() < domain_a_prob_ ? 0 : 1;
    }

    void draw(Vector& context, std::int64_t& label) override {
        const Dataset& ds = domains_[active_];
        std::size_t& cur = cursors_[active_];
        context = ds.features[cur];
        label = ds.labels[cur];
        cur = (cur + 1) % ds.size();
    }

private:
    Dataset domains_[2];
    double domain_a_prob_;
    std::size_t cursors_[2] = {0, 0};
    std::size_t active_ = 0;
};

// ---------------------------------------------------------------------------

class SyntheticEnv : public Environment {
public:
    SyntheticEnv(SyntheticEnvConfig synth, EnvConfig cfg, RevealSchedule sched,
                 std::uint64_t seed)
        : Environment(cfg, std::move(sched), seed), synth_(std::move(synth)) {
        if (synth_.means.empty()) throw ConfigError("synthetic: no class means");
        const std::size_t d = synth_.means.front().size();
        for (const auto& m : synth_.means) {
            if (m.size() != d) throw ConfigError("synthetic: mean dimension mismatch");
            for (const double v : m) {
                if (!std::isfinite(v)) throw ConfigError("synthetic: non-finite mean");
            }
        }
    }

    std::size_t dimension() const override { return synth_.means.front().size(); }
    std::size_t class_count() const override { return synth_.means.size(); }

protected:
    void draw(Vector& context, std::int64_t& label) override {
        const std::size_t k = next_class_;
        next_class_ = (next_class_ + 1) % synth_.means.size();
        label = static_cast<std::int64_t>(k);
        context = synth_.means[k];
        if (synth_.sigma > 0.0) {
            for (auto& v : context) v += synth_.sigma * sample_rng_.gaussian();
        }
    }

private:
    SyntheticEnvConfig synth_;
    std::size_t next_class_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------

StreamEnvironment::StreamEnvironment(Dataset frames, std::uint64_t seg_min,
                                     std::uint64_t seg_max, std::size_t n_segments,
                                     EnvConfig cfg, RevealSchedule schedule,
                                     std::uint64_t seed)
    : Environment(cfg, std::move(schedule), seed), frames_(std::move(frames)) {
    if (seg_min < 1 || seg_max < seg_min) {
        throw ConfigError("stream: invalid segment length range");
    }
    if (n_segments < 1) throw ConfigError("stream: needs >= 1 segment");
    frames_.validate();
    pools_.assign(frames_.class_count, {});
    for (std::size_t i = 0; i < frames_.size(); ++i) {
        pools_[static_cast<std::size_t>(frames_.labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < pools_.size(); ++c) {
        if (pools_[c].empty()) {
            throw DataError("stream: class " + std::to_string(c) +
                            " has an empty frame pool");
        }
    }
    cursors_.assign(frames_.class_count, 0);
    emitted_.assign(frames_.class_count, {});
    segments_.reserve(n_segments);
    for (std::size_t s = 0; s < n_segments; ++s) {
        StreamSegment seg;
        seg.label = static_cast<std::int64_t>(sample_rng_.uniform_int(frames_.class_count));
        seg.length = seg_min + sample_rng_.uniform_int(seg_max - seg_min + 1);
        segments_.push_back(seg);
    }
    std::uint64_t total = 0;
    for (const auto& s : segments_) total += s.length;
    set_total_steps(total);
}

void StreamEnvironment::draw(Vector& context, std::int64_t& label) {
    while (seg_idx_ < segments_.size() && seg_pos_ >= segments_[seg_idx_].length) {
        ++seg_idx_;
        seg_pos_ = 0;
    }
    if (seg_idx_ >= segments_.size()) {
        throw InvalidStateError("stream: drawn past the final segment");
    }
    const StreamSegment& seg = segments_[seg_idx_];
    const auto cls = static_cast<std::size_t>(seg.label);
    const auto& pool = pools_[cls];
    const std::size_t frame = cursors_[cls] % pool.size();
    ++cursors_[cls];
    ++seg_pos_;
    emitted_[cls].push_back(frame);
    context = frames_.features[pool[frame]];
    label = seg.label;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Environment> make_stationary(Dataset dataset, EnvConfig cfg,
                                             RevealSchedule schedule,
                                             std::uint64_t seed) {
    return std::make_unique<StationaryEnv>(std::move(dataset), cfg,
                                           std::move(schedule), seed);
}

std::unique_ptr<Environment> make_cluster_drift(Dataset dataset, std::size_t k,
                                                double concentration, EnvConfig cfg,
                                                RevealSchedule schedule,
                                                std::uint64_t seed) {
    return std::make_unique<ClusterDriftEnv>(std::move(dataset), k, concentration,
                                             cfg, std::move(schedule), seed);
}

std::unique_ptr<Environment> make_negative_images(Dataset dataset, double p_min,
                                                  double p_max, EnvConfig cfg,
                                                  RevealSchedule schedule,
                                                  std::uint64_t seed) {
    return std::make_unique<NegativeImagesEnv>(std::move(dataset), p_min, p_max, cfg,
                                               std::move(schedule), seed);
}

std::unique_ptr<Environment> make_shuffled_labels(Dataset dataset, EnvConfig cfg,
                                                  RevealSchedule schedule,
                                                  std::uint64_t seed,
                                                  bool identity_hook) {
    return std::make_unique<ShuffledLabelsEnv>(std::move(dataset), cfg,
                                               std::move(schedule), seed,
                                               identity_hook);
}

std::unique_ptr<Environment> make_multitask(Dataset domain_a, Dataset domain_b,
                                            double domain_a_prob, EnvConfig cfg,
                                            RevealSchedule schedule,
                                            std::uint64_t seed) {
    return std::make_unique<MultitaskEnv>(std::move(domain_a), std::move(domain_b),
                                          domain_a_prob, cfg, std::move(schedule),
                                          seed);
}

std::unique_ptr<Environment> make_stream(Dataset frames, std::uint64_t seg_min,
                                         std::uint64_t seg_max,
                                         std::size_t n_segments, EnvConfig cfg,
                                         RevealSchedule schedule,
                                         std::uint64_t seed) {
    return std::make_unique<StreamEnvironment>(std::move(frames), seg_min, seg_max,
                                               n_segments, cfg, std::move(schedule),
                                               seed);
}

std::vector<Vector> blob_means(std::size_t classes, std::size_t dimension,
                               double separation, double sigma) {
    if (dimension < classes) {
        throw ConfigError("blob_means: dimension must be >= class count");
    }
    const double scale = separation * sigma / std::sqrt(2.0);
    std::vector<Vector> means(classes, Vector(dimension, 0.0));
    for (std::size_t k = 0; k < classes; ++k) means[k][k] = scale;
    return means;
}

std::unique_ptr<Environment> make_synthetic(SyntheticEnvConfig synth, EnvConfig cfg,
                                            RevealSchedule schedule,
                                            std::uint64_t seed) {
    return std::make_unique<SyntheticEnv>(std::move(synth), std::move(cfg),
                                          std::move(schedule), seed);
}

}  // namespace berlin::env
