#include "gait/model.hpp"

#include <stdexcept>

#include "gait/ops.hpp"

namespace gait {

void ModelConfig::validate() const {
    backbone.validate();
    if (clip_length == 0) throw std::invalid_argument("model: clip length must be positive");
    if (pose_dim == 0) throw std::invalid_argument("model: pose feature width must be positive");
    if (heads == 0) throw std::invalid_argument("model: need at least one head");
    if (embed_dim == 0) throw std::invalid_argument("model: embedding width must be positive");
    if (!(p_c >= 1.0)) throw std::invalid_argument("model: clip GeM exponent must be >= 1");
}

namespace {

void push_linear(std::vector<NamedTensor>& out, const std::string& prefix, const LinearParams& p) {
    out.emplace_back(prefix + ".weight", p.weight);
    out.emplace_back(prefix + ".bias", p.bias);
}

void push_conv(std::vector<NamedTensor>& out, const std::string& prefix, const ConvParams& p) {
    out.emplace_back(prefix + ".weight", p.weight);
    out.emplace_back(prefix + ".bias", p.bias);
}

}  // namespace

std::vector<NamedTensor> ModelParams::named() const {
    std::vector<NamedTensor> out;
    push_conv(out, "backbone.stem", backbone.stem);
    for (std::size_t b = 0; b < backbone.blocks.size(); ++b) {
        const std::string prefix = "backbone.block" + std::to_string(b);
        push_conv(out, prefix + ".global", backbone.blocks[b].global);
        push_conv(out, prefix + ".local", backbone.blocks[b].local);
    }
    out.emplace_back("backbone.p_s", backbone.p_s);
    push_linear(out, "ta_appearance.score1", ta_appearance.score1);
    push_linear(out, "ta_appearance.score2", ta_appearance.score2);
    push_linear(out, "pose.fc1", pose.fc1);
    push_linear(out, "pose.fc2", pose.fc2);
    push_linear(out, "pose.ta.score1", pose.ta.score1);
    push_linear(out, "pose.ta.score2", pose.ta.score2);
    out.emplace_back("head.p_c", head.p_c);
    for (std::size_t c = 0; c < head.heads.size(); ++c) push_linear(out, "head." + std::to_string(c), head.heads[c]);
    return out;
}

std::vector<NamedTensor> ModelParams::trainable() const {
    std::vector<NamedTensor> out;
    for (auto& nt : named())
        if (nt.second.requires_grad()) out.push_back(nt);
    return out;
}

ModelParams init_model(const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    ModelParams p;
    p.backbone = init_backbone(cfg.backbone, rng);
    p.ta_appearance = init_ta(cfg.appearance_dim(), cfg.ta_hidden_for(cfg.appearance_dim()), rng);
    p.pose = init_pose(cfg.pose_dim, cfg.ta_hidden_for(cfg.pose_dim), rng);
    p.head = init_heads(cfg.fused_dim(), cfg.heads, cfg.embed_dim, cfg.p_c, cfg.learn_p_c, rng);
    return p;
}

EmbeddingSet model_forward(const Tensor& frames, const Tensor& keypoints, const ModelParams& params,
                           const ModelConfig& cfg) {
    const std::size_t t = frames.dim(1);
    if (keypoints.rank() != 2 || keypoints.dim(0) != t || keypoints.dim(1) != kKeypointValues) {
        throw std::invalid_argument("model_forward: keypoints " + shape_str(keypoints.shape()) +
                                    " do not align with " + std::to_string(t) + " frames");
    }
    if (t < cfg.clip_length) {
        throw std::invalid_argument("model_forward: T=" + std::to_string(t) + " is shorter than clip length L=" +
                                    std::to_string(cfg.clip_length));
    }
    Tensor appearance = ta_aggregate(clip_split(backbone_forward(frames, params.backbone, cfg.backbone), cfg.clip_length),
                                     params.ta_appearance);
    Tensor pose = cfg.pose_branch
                      ? ta_aggregate(clip_split(pose_encode(keypoints, params.pose), cfg.clip_length), params.pose.ta)
                      : Tensor::zeros({appearance.dim(0), cfg.pose_dim});
    Tensor fused = softplus(fuse_clips(appearance, pose));
    return heads_forward(clip_gem(fused, params.head.p_c), params.head);
}

EmbeddingSet model_forward(const GaitSample& sample, const ModelParams& params, const ModelConfig& cfg) {
    if (sample.silhouettes.frames < cfg.clip_length) {
        throw std::invalid_argument("model_forward: sequence " + sample.info().id() + " has T=" +
                                    std::to_string(sample.silhouettes.frames) + " < L=" +
                                    std::to_string(cfg.clip_length));
    }
    return model_forward(sample.silhouettes.to_tensor(), normalize_keypoints(sample.keypoints), params, cfg);
}

}  // namespace gait
