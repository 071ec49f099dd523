#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gait/model.hpp"
#include "gait/rng.hpp"
#include "gait/sequence.hpp"

namespace gait {

/// P identities x K sequences, each cropped to `crop` frames.
struct BatchSpec {
    std::size_t identities = 8;  // P
    std::size_t per_identity = 8;  // K
    std::size_t crop = 30;

    std::size_t size() const { return identities * per_identity; }
    void validate(std::size_t clip_length) const;
};

struct TripletConfig {
    double margin = 0.2;
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct BatchItem {
    GaitSample sample;  // cropped window
    int identity = 0;
};

/// Draws P distinct identities, then K distinct sequences of each, and a
/// uniformly placed crop window per sequence (looping short sequences).
std::vector<BatchItem> sample_batch(const std::vector<const GaitSample*>& pool, const BatchSpec& spec, Rng& rng);

struct TripletResult {
    Tensor loss;                        // scalar
    double active_fraction = 0.0;       // share of (head, anchor) pairs with a positive hinge
    std::size_t empty_positive_sets = 0;  // anchors with no positive, counted per head
};

/// Mean over heads and anchors of [margin + mean_p D(a,p) - mean_n D(a,n)]_+
/// with Euclidean D. embeddings[i] holds the C head outputs of item i.
TripletResult triplet_loss(const std::vector<EmbeddingSet>& embeddings, const std::vector<int>& identities,
                           const TripletConfig& cfg);

struct TrainState {
    ModelParams params;
    std::vector<Tensor> adam_m;  // aligned with params.trainable()
    std::vector<Tensor> adam_v;
    std::uint64_t step = 0;
    Rng rng;  // sampling stream
};

TrainState init_train_state(const ModelConfig& cfg, std::uint64_t seed);

struct StepMetrics {
    std::uint64_t step = 0;
    double loss = 0.0;
    double active_fraction = 0.0;
    double grad_norm = 0.0;
    double seconds = 0.0;
};

struct TrainConfig {
    ModelConfig model;
    BatchSpec batch;
    TripletConfig triplet;
    AdamConfig adam;
};

/// Forward every item, triplet loss, backward, one Adam update. Throws
/// std::runtime_error naming the step and parameter block on a non-finite value.
StepMetrics train_step(TrainState& state, const std::vector<BatchItem>& batch, const TrainConfig& cfg);

}  // namespace gait
