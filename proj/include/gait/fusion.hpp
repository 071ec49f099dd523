#pragma once

#include <cstddef>
#include <vector>

#include "gait/layers.hpp"
#include "gait/tensor.hpp"

namespace gait {

/// C embeddings (each 1 x d_e) ordered by head index.
using EmbeddingSet = std::vector<Tensor>;

struct HeadParams {
    Tensor p_c;                      // scalar clip-GeM exponent
    std::vector<LinearParams> heads;  // C maps (D_GL + d_p) -> d_e
};

HeadParams init_heads(std::size_t in_dim, std::size_t count, std::size_t embed_dim, double p_c, bool learn_p_c,
                      Rng& rng);

/// Row-wise concatenation of appearance (S x D_GL) and pose (S x d_p) clip features.
Tensor fuse_clips(const Tensor& appearance, const Tensor& pose);
/// S x D -> 1 x D generalized mean over clips.
Tensor clip_gem(const Tensor& fused, const Tensor& p_c);
/// C independent affine maps of the same 1 x D vector.
EmbeddingSet heads_forward(const Tensor& pooled, const HeadParams& params);

}  // namespace gait
