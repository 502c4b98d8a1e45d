#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "berlin/data.hpp"
#include "berlin/errors.hpp"
#include "berlin/linalg.hpp"
#include "berlin/rng.hpp"

namespace berlin::env {

using data::Dataset;
using linalg::Vector;

struct StreamSample {
    Vector context;
    std::int64_t true_label = 0;  // effective label (post reward-nonstationarity)
    std::uint64_t batch_index = 0;
    std::uint64_t step = 0;
};

// Per-round reward-reveal probability: fixed, or an explicit list cycled over
// batches.
struct RevealSchedule {
    enum class Kind { fixed, per_batch };
    Kind kind = Kind::fixed;
    double p = 1.0;
    std::vector<double> values;

    static RevealSchedule fixed(double p_r);
    static RevealSchedule per_batch(std::vector<double> values);
    double p_for_batch(std::uint64_t batch) const;
};

struct EnvConfig {
    std::size_t batch_size = 100;
    std::uint64_t total_steps = 5000;
};

// Deterministic seedable sample stream. Subclasses draw contexts/labels;
// the base owns the step/batch bookkeeping and the three environment RNG
// streams ("sample-order", "reveal", "batch-parameters"), so the reveal bit
// sequence is independent of contexts and labels by construction.
class Environment {
public:
    Environment(EnvConfig cfg, RevealSchedule schedule, std::uint64_t master_seed);
    virtual ~Environment() = default;

    // Next (context, label); empty when the run is exhausted. All per-batch
    // parameter redraws happen exactly at steps == 0 mod batch_size.
    std::optional<StreamSample> next_sample();

    // Bernoulli reveal draw for the next step, from the dedicated stream.
    bool reveal();

    std::uint64_t total_steps() const { return cfg_.total_steps; }
    std::size_t batch_size() const { return cfg_.batch_size; }
    virtual std::size_t dimension() const = 0;
    virtual std::size_t class_count() const = 0;

protected:
    virtual void on_batch_start(std::uint64_t batch) {}
    virtual void draw(Vector& context, std::int64_t& label) = 0;
    void set_total_steps(std::uint64_t t) { cfg_.total_steps = t; }

    RngStream sample_rng_;
    RngStream batch_rng_;

private:
    EnvConfig cfg_;
    RevealSchedule schedule_;
    RngStream reveal_rng_;
    std::uint64_t step_ = 0;
    std::uint64_t reveal_step_ = 0;
};

// Reward oracle: 1 iff the chosen arm corresponds to the sample's effective
// label. In the fixed-arm regime arm ids equal class ids; in the extendable
// regime the mapping is the agent's class->arm table and an unmapped label
// rewards the designated NEW arm (index 0).
int true_reward(std::int64_t label, std::size_t chosen,
                const std::optional<std::size_t>& mapped_arm, bool extendable);

// Samples drawn sequentially from the dataset, wrapping at the end.
std::unique_ptr<Environment> make_stationary(Dataset dataset, EnvConfig cfg,
                                             RevealSchedule schedule,
                                             std::uint64_t seed);

// Offline Lloyd k-means over the dataset; per batch, cluster weights are drawn
// from a symmetric Dirichlet and samples follow per-cluster cursors.
std::unique_ptr<Environment> make_cluster_drift(Dataset dataset, std::size_t k,
                                                double concentration, EnvConfig cfg,
                                                RevealSchedule schedule,
                                                std::uint64_t seed);

// Per batch, a negation probability p ~ U(p_range); each sample is replaced by
// 1 - x elementwise with probability p. Features must lie in [0,1].
std::unique_ptr<Environment> make_negative_images(Dataset dataset, double p_min,
                                                  double p_max, EnvConfig cfg,
                                                  RevealSchedule schedule,
                                                  std::uint64_t seed);

// Per batch, a uniform random permutation of the class labels; rewards use the
// permuted label, contexts are unchanged. identity_hook forces the identity
// permutation (test hook).
std::unique_ptr<Environment> make_shuffled_labels(Dataset dataset, EnvConfig cfg,
                                                  RevealSchedule schedule,
                                                  std::uint64_t seed,
                                                  bool identity_hook = false);

// Each batch is drawn wholly from one of two stretched domains; the domain is
// a seeded coin with P(domain A) = domain_a_prob. Inputs must already be
// embedded in the combined dimension (see data::stretch_concat).
std::unique_ptr<Environment> make_multitask(Dataset domain_a, Dataset domain_b,
                                            double domain_a_prob, EnvConfig cfg,
                                            RevealSchedule schedule,
                                            std::uint64_t seed);

// Segmented labelled stream: each segment picks a class uniformly and a length
// uniformly in [seg_min, seg_max]; frames come sequentially from that class's
// pool, wrapping. Total steps = sum of segment lengths.
struct StreamSegment {
    std::int64_t label;
    std::uint64_t length;
};

class StreamEnvironment;  // exposes segments() for bookkeeping tests

std::unique_ptr<Environment> make_stream(Dataset frames, std::uint64_t seg_min,
                                         std::uint64_t seg_max,
                                         std::size_t n_segments, EnvConfig cfg,
                                         RevealSchedule schedule,
                                         std::uint64_t seed);

// Gaussian blobs: class k = step mod K, x ~ N(mean_k, sigma^2 I).
struct SyntheticEnvConfig {
    std::vector<Vector> means;
    double sigma = 1.0;
};

// Axis-aligned means with pairwise distance separation * sigma (needs d >= K).
std::vector<Vector> blob_means(std::size_t classes, std::size_t dimension,
                               double separation, double sigma);

std::unique_ptr<Environment> make_synthetic(SyntheticEnvConfig synth, EnvConfig cfg,
                                            RevealSchedule schedule,
                                            std::uint64_t seed);

class StreamEnvironment : public Environment {
public:
    StreamEnvironment(Dataset frames, std::uint64_t seg_min, std::uint64_t seg_max,
                      std::size_t n_segments, EnvConfig cfg, RevealSchedule schedule,
                      std::uint64_t seed);

    std::size_t dimension() const override { return frames_.dim(); }
    std::size_t class_count() const override { return frames_.class_count; }
    const std::vector<StreamSegment>& segments() const { return segments_; }
    // Frame indices (into the class pool) emitted so far, per class.
    const std::vector<std::vector<std::size_t>>& emitted_frames() const {
        return emitted_;
    }

protected:
    void draw(Vector& context, std::int64_t& label) override;

private:
    Dataset frames_;
    std::vector<std::vector<std::size_t>> pools_;  // dataset indices per class
    std::vector<std::size_t> cursors_;
    std::vector<StreamSegment> segments_;
    std::vector<std::vector<std::size_t>> emitted_;
    std::size_t seg_idx_ = 0;
    std::uint64_t seg_pos_ = 0;
};

}  // namespace berlin::env
