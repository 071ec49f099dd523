#include "gait/layers.hpp"

#include <cmath>

#include "gait/ops.hpp"

namespace gait {

namespace {
Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
    std::vector<double> v(numel(shape));
    for (auto& x : v) x = rng.uniform(-bound, bound);
    return Tensor::from(std::move(shape), std::move(v), true);
}
}  // namespace

LinearParams init_linear(std::size_t d_in, std::size_t d_out, Rng& rng) {
    const double bound = std::sqrt(3.0 / static_cast<double>(d_in));
    return {uniform_tensor({d_in, d_out}, bound, rng), Tensor::zeros({d_out}, true)};
}

LinearParams zero_linear(std::size_t d_in, std::size_t d_out) {
    return {Tensor::zeros({d_in, d_out}, true), Tensor::zeros({d_out}, true)};
}

ConvParams init_conv(std::size_t c_out, std::size_t c_in, std::size_t k_t, std::size_t k_h, std::size_t k_w,
                     Rng& rng) {
    const double bound = std::sqrt(3.0 / static_cast<double>(c_in * k_t * k_h * k_w));
    return {uniform_tensor({c_out, c_in, k_t, k_h, k_w}, bound, rng), Tensor::zeros({c_out}, true)};
}

Tensor apply(const LinearParams& p, const Tensor& x) { return linear(x, p.weight, p.bias); }

}  // namespace gait
