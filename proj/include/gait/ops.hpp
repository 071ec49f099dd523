#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "gait/tensor.hpp"

namespace gait {

// Elementwise. Binary ops require identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& x, double s);
Tensor scale(const Tensor& x, double s);
/// x^exponent. Non-integer exponents need positive x.
Tensor pow(const Tensor& x, double exponent);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope = 0.01);
/// log(1 + e^x), evaluated stably.
Tensor softplus(const Tensor& x);

// Shape manipulation.
Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& order);
/// Rows [begin, end) along axis.
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor concat(const std::vector<Tensor>& xs, std::size_t axis);

// Reductions drop the reduced axis.
enum class Reduce { Sum, Mean, Max };
Tensor reduce(const Tensor& x, std::size_t axis, Reduce kind);
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x, std::size_t axis);
Tensor max(const Tensor& x, std::size_t axis);
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

Tensor softmax(const Tensor& x, std::size_t axis);

struct Conv3dOptions {
    std::array<std::size_t, 3> pad{0, 0, 0};
    std::array<std::size_t, 3> stride{1, 1, 1};
};

/// Cross-correlation (no kernel flip) of a c_in x T x h x w map with a
/// c_out x c_in x k_t x k_h x k_w kernel, zero padding, plus per-channel bias.
/// An undefined bias means none.
Tensor conv3d(const Tensor& input, const Tensor& kernel, const Tensor& bias, const Conv3dOptions& opts = {});

/// Non-overlapping max pooling over the last two axes; trailing rows/cols that
/// do not fill a window are dropped.
Tensor max_pool2d(const Tensor& x, std::size_t kh, std::size_t kw);

/// x (n x d_in) * weight (d_in x d_out) + bias (d_out).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Generalized mean over one axis: (mean(max(x, 1e-6)^p))^(1/p). The exponent
/// is a scalar tensor so it can be learned.
Tensor gem(const Tensor& x, const Tensor& p, std::size_t axis);
inline constexpr double kGemClamp = 1e-6;

/// x (S x L x D), w (S x L) -> S x D with out[s] = sum_l w[s,l] * x[s,l].
Tensor weighted_sum(const Tensor& x, const Tensor& w);

/// Row-wise Euclidean distance matrix of x (n x d). The gradient at a zero
/// distance is taken as zero.
Tensor pairwise_euclidean(const Tensor& x);

}  // namespace gait
