#pragma once

// Raw numeric kernels behind the differentiable ops.
//
// Every kernel exists twice: an OpenMP version used by the library and a plain
// serial version under kernels::serial kept as the reference for tests and
// benchmarks. Parallel kernels partition work so that each output element is
// written by exactly one thread with a fixed accumulation order, which keeps
// results bit-identical for any thread count.

#include <array>
#include <cstddef>
#include <span>

namespace gait::kernels {

struct Conv3dGeometry {
    std::size_t c_in = 0, t_in = 0, h_in = 0, w_in = 0;
    std::size_t c_out = 0, k_t = 0, k_h = 0, k_w = 0;
    std::array<std::size_t, 3> pad{0, 0, 0};
    std::array<std::size_t, 3> stride{1, 1, 1};

    std::size_t t_out() const { return (t_in + 2 * pad[0] - k_t) / stride[0] + 1; }
    std::size_t h_out() const { return (h_in + 2 * pad[1] - k_h) / stride[1] + 1; }
    std::size_t w_out() const { return (w_in + 2 * pad[2] - k_w) / stride[2] + 1; }
    std::size_t out_size() const { return c_out * t_out() * h_out() * w_out(); }
};

void conv3d_forward(const Conv3dGeometry& g, std::span<const double> input, std::span<const double> kernel,
                    std::span<const double> bias, std::span<double> out);
/// Accumulates into grad_input.
void conv3d_backward_input(const Conv3dGeometry& g, std::span<const double> grad_out, std::span<const double> kernel,
                           std::span<double> grad_input);
/// Accumulates into grad_kernel and grad_bias.
void conv3d_backward_kernel(const Conv3dGeometry& g, std::span<const double> grad_out, std::span<const double> input,
                            std::span<double> grad_kernel, std::span<double> grad_bias);

// out[n x d_out] = x[n x d_in] * w[d_in x d_out] + b
void linear_forward(std::size_t n, std::size_t d_in, std::size_t d_out, std::span<const double> x,
                    std::span<const double> w, std::span<const double> b, std::span<double> out);
void linear_backward(std::size_t n, std::size_t d_in, std::size_t d_out, std::span<const double> grad_out,
                     std::span<const double> x, std::span<const double> w, std::span<double> grad_x,
                     std::span<double> grad_w, std::span<double> grad_b);

/// Caps the OpenMP team size; 1 selects the fully serial path.
void set_workers(int workers);
int workers();

namespace serial {

void conv3d_forward(const Conv3dGeometry& g, std::span<const double> input, std::span<const double> kernel,
                    std::span<const double> bias, std::span<double> out);
void conv3d_backward_input(const Conv3dGeometry& g, std::span<const double> grad_out, std::span<const double> kernel,
                           std::span<double> grad_input);
void conv3d_backward_kernel(const Conv3dGeometry& g, std::span<const double> grad_out, std::span<const double> input,
                            std::span<double> grad_kernel, std::span<double> grad_bias);
void linear_forward(std::size_t n, std::size_t d_in, std::size_t d_out, std::span<const double> x,
                    std::span<const double> w, std::span<const double> b, std::span<double> out);
void linear_backward(std::size_t n, std::size_t d_in, std::size_t d_out, std::span<const double> grad_out,
                     std::span<const double> x, std::span<const double> w, std::span<double> grad_x,
                     std::span<double> grad_w, std::span<double> grad_b);

}  // namespace serial

}  // namespace gait::kernels
