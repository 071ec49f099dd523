#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gait/attention.hpp"
#include "gait/backbone.hpp"
#include "gait/fusion.hpp"
#include "gait/pose.hpp"
#include "gait/sequence.hpp"

namespace gait {

struct ModelConfig {
    BackboneConfig backbone;
    std::size_t clip_length = 10;  // L
    std::size_t ta_hidden = 0;     // 0 = derived from the branch width
    std::size_t pose_dim = 64;     // d_p
    std::size_t heads = 8;         // C
    std::size_t embed_dim = 64;    // d_e
    double p_c = 1.0;
    bool learn_p_c = false;
    /// When false the pose clip features are replaced by zeros (ablation).
    bool pose_branch = true;

    std::size_t appearance_dim() const { return backbone.feature_dim(); }
    std::size_t fused_dim() const { return appearance_dim() + pose_dim; }
    std::size_t ta_hidden_for(std::size_t width) const { return ta_hidden ? ta_hidden : ta_hidden_width(width); }
    void validate() const;
};

using NamedTensor = std::pair<std::string, Tensor>;

struct ModelParams {
    BackboneParams backbone;
    TAParams ta_appearance;
    PoseParams pose;
    HeadParams head;

    /// Every tensor under a stable dotted name, in a fixed order.
    std::vector<NamedTensor> named() const;
    /// The subset that requires grad.
    std::vector<NamedTensor> trainable() const;
};

ModelParams init_model(const ModelConfig& cfg, Rng& rng);

/// Full forward for one sequence. frames: 1 x T x h x w; normalized keypoints: T x 51.
EmbeddingSet model_forward(const Tensor& frames, const Tensor& keypoints, const ModelParams& params,
                           const ModelConfig& cfg);
EmbeddingSet model_forward(const GaitSample& sample, const ModelParams& params, const ModelConfig& cfg);

}  // namespace gait
