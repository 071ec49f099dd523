#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "gait/layers.hpp"
#include "gait/sequence.hpp"
#include "gait/tensor.hpp"

namespace gait {

/// Global-and-local 3D-conv backbone layout.
///
/// The stem is one conv3d followed by an optional spatial max-pool. Then come
/// `channels.size()` GLConv blocks: all but the last add the global and the
/// partition-wise local branch (GLConvA), the last concatenates them along
/// height (GLConvB). A leaky ReLU follows the stem and every block.
struct BackboneConfig {
    std::size_t in_height = 64;
    std::size_t in_width = 44;
    std::size_t stem_channels = 32;
    std::array<std::size_t, 3> stem_kernel{1, 3, 3};
    std::array<std::size_t, 3> stem_stride{1, 1, 1};
    std::array<std::size_t, 3> stem_pad{0, 1, 1};
    std::size_t stem_pool = 2;  // window of the post-stem max-pool, 1 = none
    std::vector<std::size_t> channels{64, 128, 128};
    std::vector<std::size_t> pool_after{0};  // 2x2 max-pool after these blocks
    std::size_t partitions = 4;              // m
    double p_s = 3.0;
    bool learn_p_s = false;
    double leaky_slope = 0.01;

    std::size_t blocks() const { return channels.size(); }
    /// Height and width entering each block, then after the last block.
    std::vector<std::array<std::size_t, 2>> stage_extents() const;
    std::size_t final_height() const;  // height entering GLConvB
    /// Per-frame feature width D_GL = c_final * 2 * h_final.
    std::size_t feature_dim() const;
    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;
};

struct GLConvParams {
    ConvParams global;
    ConvParams local;
};

struct BackboneParams {
    ConvParams stem;
    std::vector<GLConvParams> blocks;
    Tensor p_s;  // scalar GeM exponent over width
};

BackboneParams init_backbone(const BackboneConfig& cfg, Rng& rng);

/// 3x3x3 conv with unit padding over the whole map.
Tensor global_branch(const Tensor& x, const ConvParams& p);
/// The same 3x3x3 kernel applied separately to each of m height strips (each
/// strip zero-padded at its own borders), re-assembled along height.
Tensor local_branch(const Tensor& x, const ConvParams& p, std::size_t partitions);
/// global + local, shape preserved.
Tensor glconv_a(const Tensor& x, const GLConvParams& p, std::size_t partitions);
/// global stacked over local along height: c x T x 2h x w.
Tensor glconv_b(const Tensor& x, const GLConvParams& p, std::size_t partitions);
/// c x T x h x w -> c x T x h, generalized mean over width.
Tensor spatial_gem(const Tensor& x, const Tensor& p_s);

/// frames: 1 x T x h x w. Returns T x D_GL.
Tensor backbone_forward(const Tensor& frames, const BackboneParams& params, const BackboneConfig& cfg);
Tensor backbone_forward(const SilhouetteSequence& seq, const BackboneParams& params, const BackboneConfig& cfg);

}  // namespace gait
