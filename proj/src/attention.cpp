#include "gait/attention.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "gait/ops.hpp"

namespace gait {

namespace {
constexpr double kScoreSlope = 0.01;
}

std::size_t ta_hidden_width(std::size_t feature_dim) { return std::max<std::size_t>(8, feature_dim / 16); }

TAParams init_ta(std::size_t feature_dim, std::size_t hidden, Rng& rng) {
    return {init_linear(feature_dim, hidden, rng), zero_linear(hidden, 1)};
}

ClipBatch clip_split(const Tensor& x, std::size_t clip_length) {
    if (x.rank() != 2) throw std::invalid_argument("clip_split: expected T x D, got " + shape_str(x.shape()));
    const std::size_t t = x.dim(0), d = x.dim(1);
    if (clip_length == 0 || t < clip_length) {
        throw std::invalid_argument("clip_split: sequence of T=" + std::to_string(t) +
                                    " frames is shorter than clip length L=" + std::to_string(clip_length));
    }
    const std::size_t s = t / clip_length;
    Tensor kept = s * clip_length == t ? x : slice(x, 0, 0, s * clip_length);
    return {reshape(kept, {s, clip_length, d}), t - s * clip_length};
}

Tensor ta_weights(const ClipBatch& clips, const TAParams& params) {
    const std::size_t s = clips.count(), l = clips.length(), d = clips.width();
    Tensor frames = reshape(clips.clips, {s * l, d});
    Tensor hidden = leaky_relu(apply(params.score1, frames), kScoreSlope);
    Tensor scores = reshape(apply(params.score2, hidden), {s, l});
    return softmax(scores, 1);
}

Tensor ta_weights(const Tensor& clip, const TAParams& params) {
    if (clip.rank() != 2) throw std::invalid_argument("ta_weights: expected L x D clip, got " + shape_str(clip.shape()));
    ClipBatch one{reshape(clip, {1, clip.dim(0), clip.dim(1)}), 0};
    return ta_weights(one, params);
}

Tensor ta_apply(const Tensor& clip, const Tensor& weights) {
    if (clip.rank() != 2 || weights.numel() != clip.dim(0)) {
        throw std::invalid_argument("ta_apply: weights " + shape_str(weights.shape()) + " do not match clip " +
                                    shape_str(clip.shape()));
    }
    const std::size_t l = clip.dim(0), d = clip.dim(1);
    return weighted_sum(reshape(clip, {1, l, d}), reshape(weights, {1, l}));
}

Tensor ta_aggregate(const ClipBatch& clips, const TAParams& params) {
    return weighted_sum(clips.clips, ta_weights(clips, params));
}

}  // namespace gait
