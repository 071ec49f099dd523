#include "gait/fusion.hpp"

#include <stdexcept>

#include "gait/ops.hpp"

namespace gait {

HeadParams init_heads(std::size_t in_dim, std::size_t count, std::size_t embed_dim, double p_c, bool learn_p_c,
                      Rng& rng) {
    if (count == 0) throw std::invalid_argument("fusion head: need at least one head");
    if (!(p_c >= 1.0)) throw std::invalid_argument("fusion head: clip GeM exponent must be >= 1");
    HeadParams h;
    h.p_c = Tensor::scalar(p_c, learn_p_c);
    for (std::size_t c = 0; c < count; ++c) h.heads.push_back(init_linear(in_dim, embed_dim, rng));
    return h;
}

Tensor fuse_clips(const Tensor& appearance, const Tensor& pose) {
    if (appearance.rank() != 2 || pose.rank() != 2 || appearance.dim(0) != pose.dim(0)) {
        throw std::invalid_argument("fuse_clips: clip counts differ between appearance " +
                                    shape_str(appearance.shape()) + " and pose " + shape_str(pose.shape()));
    }
    return concat({appearance, pose}, 1);
}

Tensor clip_gem(const Tensor& fused, const Tensor& p_c) {
    if (fused.rank() != 2) throw std::invalid_argument("clip_gem: expected S x D, got " + shape_str(fused.shape()));
    return reshape(gem(fused, p_c, 0), {1, fused.dim(1)});
}

EmbeddingSet heads_forward(const Tensor& pooled, const HeadParams& params) {
    EmbeddingSet out;
    out.reserve(params.heads.size());
    for (const auto& h : params.heads) out.push_back(apply(h, pooled));
    return out;
}

}  // namespace gait
