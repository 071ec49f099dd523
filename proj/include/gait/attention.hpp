#pragma once

#include <cstddef>

#include "gait/layers.hpp"
#include "gait/tensor.hpp"

namespace gait {

/// S clips of L consecutive frames cut from a T x D sequence.
struct ClipBatch {
    Tensor clips;             // S x L x D
    std::size_t dropped = 0;  // trailing frames that did not fill a clip

    std::size_t count() const { return clips.dim(0); }
    std::size_t length() const { return clips.dim(1); }
    std::size_t width() const { return clips.dim(2); }
};

/// Per-frame scoring: D -> hidden (kernel-1 conv, i.e. per-frame affine),
/// leaky ReLU, hidden -> 1; softmax over the clip gives the attention vector.
struct TAParams {
    LinearParams score1;
    LinearParams score2;
};

/// Hidden scoring width for a feature width: D / 16, at least 8.
std::size_t ta_hidden_width(std::size_t feature_dim);
/// Second layer zero-initialized, so attention starts uniform.
TAParams init_ta(std::size_t feature_dim, std::size_t hidden, Rng& rng);

ClipBatch clip_split(const Tensor& x, std::size_t clip_length);
/// clip: L x D -> 1 x L attention weights.
Tensor ta_weights(const Tensor& clip, const TAParams& params);
/// clip: L x D, weights: 1 x L -> 1 x D.
Tensor ta_apply(const Tensor& clip, const Tensor& weights);
/// All clips at once: S x L attention weights.
Tensor ta_weights(const ClipBatch& clips, const TAParams& params);
/// S x D clip features.
Tensor ta_aggregate(const ClipBatch& clips, const TAParams& params);

}  // namespace gait
