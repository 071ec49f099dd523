#include "gait/backbone.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "gait/ops.hpp"

namespace gait {

namespace {

std::size_t conv_extent(std::size_t n, std::size_t k, std::size_t pad, std::size_t stride, const char* axis) {
    const std::size_t padded = n + 2 * pad;
    if (k > padded || stride == 0 || (padded - k) % stride != 0) {
        throw std::invalid_argument(std::string("backbone: stem does not tile the ") + axis + " axis (extent " +
                                    std::to_string(n) + ")");
    }
    return (padded - k) / stride + 1;
}

bool pools_after(const BackboneConfig& cfg, std::size_t block) {
    return std::find(cfg.pool_after.begin(), cfg.pool_after.end(), block) != cfg.pool_after.end();
}

}  // namespace

std::vector<std::array<std::size_t, 2>> BackboneConfig::stage_extents() const {
    std::size_t h = conv_extent(in_height, stem_kernel[1], stem_pad[1], stem_stride[1], "height");
    std::size_t w = conv_extent(in_width, stem_kernel[2], stem_pad[2], stem_stride[2], "width");
    if (stem_pool > 1) h /= stem_pool, w /= stem_pool;
    std::vector<std::array<std::size_t, 2>> out;
    for (std::size_t b = 0; b < blocks(); ++b) {
        out.push_back({h, w});
        if (b + 1 == blocks()) {
            h *= 2;
        } else if (pools_after(*this, b)) {
            h /= 2, w /= 2;
        }
    }
    out.push_back({h, w});
    return out;
}

std::size_t BackboneConfig::final_height() const { return stage_extents()[blocks() - 1][0]; }

std::size_t BackboneConfig::feature_dim() const { return channels.back() * 2 * final_height(); }

void BackboneConfig::validate() const {
    if (channels.size() < 2) {
        throw std::invalid_argument("backbone: need at least 2 GLConv blocks (GLConvA then GLConvB), got " +
                                    std::to_string(channels.size()));
    }
    if (stem_channels == 0 || std::find(channels.begin(), channels.end(), 0u) != channels.end()) {
        throw std::invalid_argument("backbone: channel counts must be positive");
    }
    if (partitions == 0) throw std::invalid_argument("backbone: partition count must be positive");
    if (!(p_s >= 1.0)) throw std::invalid_argument("backbone: spatial GeM exponent must be >= 1");
    if (stem_stride[0] != 1 || stem_kernel[0] % 2 == 0 || stem_pad[0] != stem_kernel[0] / 2) {
        throw std::invalid_argument("backbone: the stem must preserve T (odd temporal kernel, pad k/2, stride 1)");
    }
    for (auto b : pool_after) {
        if (b + 1 >= blocks()) throw std::invalid_argument("backbone: pooling is only allowed between blocks");
    }
    const auto stages = stage_extents();
    for (std::size_t b = 0; b < blocks(); ++b) {
        const auto [h, w] = stages[b];
        if (h == 0 || w == 0) throw std::invalid_argument("backbone: feature map vanishes before block " + std::to_string(b));
        if (h % partitions != 0) {
            throw std::invalid_argument("backbone: height " + std::to_string(h) + " entering block " +
                                        std::to_string(b) + " is not divisible by " + std::to_string(partitions) +
                                        " partitions");
        }
    }
}

BackboneParams init_backbone(const BackboneConfig& cfg, Rng& rng) {
    cfg.validate();
    BackboneParams p;
    p.stem = init_conv(cfg.stem_channels, 1, cfg.stem_kernel[0], cfg.stem_kernel[1], cfg.stem_kernel[2], rng);
    std::size_t c_in = cfg.stem_channels;
    for (std::size_t c_out : cfg.channels) {
        GLConvParams block;
        block.global = init_conv(c_out, c_in, 3, 3, 3, rng);
        block.local = init_conv(c_out, c_in, 3, 3, 3, rng);
        p.blocks.push_back(std::move(block));
        c_in = c_out;
    }
    p.p_s = Tensor::scalar(cfg.p_s, cfg.learn_p_s);
    return p;
}

Tensor global_branch(const Tensor& x, const ConvParams& p) {
    return conv3d(x, p.weight, p.bias, Conv3dOptions{{1, 1, 1}, {1, 1, 1}});
}

Tensor local_branch(const Tensor& x, const ConvParams& p, std::size_t partitions) {
    if (x.rank() != 4) throw std::invalid_argument("local_branch: expected c x T x h x w, got " + shape_str(x.shape()));
    const std::size_t h = x.dim(2);
    if (partitions == 0 || h % partitions != 0) {
        throw std::invalid_argument("local_branch: height " + std::to_string(h) + " not divisible into " +
                                    std::to_string(partitions) + " partitions");
    }
    if (partitions == 1) return global_branch(x, p);
    const std::size_t strip = h / partitions;
    std::vector<Tensor> parts;
    parts.reserve(partitions);
    for (std::size_t i = 0; i < partitions; ++i) parts.push_back(global_branch(slice(x, 2, i * strip, (i + 1) * strip), p));
    return concat(parts, 2);
}

Tensor glconv_a(const Tensor& x, const GLConvParams& p, std::size_t partitions) {
    return add(global_branch(x, p.global), local_branch(x, p.local, partitions));
}

Tensor glconv_b(const Tensor& x, const GLConvParams& p, std::size_t partitions) {
    return concat({global_branch(x, p.global), local_branch(x, p.local, partitions)}, 2);
}

Tensor spatial_gem(const Tensor& x, const Tensor& p_s) {
    if (x.rank() != 4) throw std::invalid_argument("spatial_gem: expected c x T x h x w, got " + shape_str(x.shape()));
    return gem(x, p_s, 3);
}

Tensor backbone_forward(const Tensor& frames, const BackboneParams& params, const BackboneConfig& cfg) {
    if (frames.rank() != 4 || frames.dim(0) != 1 || frames.dim(2) != cfg.in_height || frames.dim(3) != cfg.in_width) {
        throw std::invalid_argument("backbone_forward: expected 1 x T x " + std::to_string(cfg.in_height) + " x " +
                                    std::to_string(cfg.in_width) + " frames, got " + shape_str(frames.shape()));
    }
    if (params.blocks.size() != cfg.blocks()) throw std::invalid_argument("backbone_forward: block count mismatch");
    Conv3dOptions stem{cfg.stem_pad, cfg.stem_stride};
    Tensor x = leaky_relu(conv3d(frames, params.stem.weight, params.stem.bias, stem), cfg.leaky_slope);
    if (cfg.stem_pool > 1) x = max_pool2d(x, cfg.stem_pool, cfg.stem_pool);
    for (std::size_t b = 0; b < cfg.blocks(); ++b) {
        const bool last = b + 1 == cfg.blocks();
        x = last ? glconv_b(x, params.blocks[b], cfg.partitions) : glconv_a(x, params.blocks[b], cfg.partitions);
        x = leaky_relu(x, cfg.leaky_slope);
        if (!last && pools_after(cfg, b)) x = max_pool2d(x, 2, 2);
    }
    // c x T x h -> T x (c * h)
    Tensor pooled = spatial_gem(x, params.p_s);
    const std::size_t c = pooled.dim(0), t = pooled.dim(1), h = pooled.dim(2);
    return reshape(permute(pooled, {1, 0, 2}), {t, c * h});
}

Tensor backbone_forward(const SilhouetteSequence& seq, const BackboneParams& params, const BackboneConfig& cfg) {
    return backbone_forward(seq.to_tensor(), params, cfg);
}

}  // namespace gait
