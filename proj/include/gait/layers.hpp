#pragma once

#include <cstddef>

#include "gait/rng.hpp"
#include "gait/tensor.hpp"

namespace gait {

struct LinearParams {
    Tensor weight;  // d_in x d_out
    Tensor bias;    // d_out
};

struct ConvParams {
    Tensor weight;  // c_out x c_in x k_t x k_h x k_w
    Tensor bias;    // c_out
};

// Uniform(-b, b) weights with b = sqrt(3 / fan_in), zero bias.
LinearParams init_linear(std::size_t d_in, std::size_t d_out, Rng& rng);
LinearParams zero_linear(std::size_t d_in, std::size_t d_out);
ConvParams init_conv(std::size_t c_out, std::size_t c_in, std::size_t k_t, std::size_t k_h, std::size_t k_w, Rng& rng);

Tensor apply(const LinearParams& p, const Tensor& x);

}  // namespace gait
