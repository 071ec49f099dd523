#include "gait/kernels.hpp"

#include <cstdint>

namespace gait::kernels::serial {

namespace {

struct Index {
    const Conv3dGeometry& g;
    std::size_t in(std::size_t c, std::size_t t, std::size_t h, std::size_t w) const {
        return ((c * g.t_in + t) * g.h_in + h) * g.w_in + w;
    }
    std::size_t out(std::size_t c, std::size_t t, std::size_t h, std::size_t w) const {
        return ((c * g.t_out() + t) * g.h_out() + h) * g.w_out() + w;
    }
    std::size_t ker(std::size_t co, std::size_t ci, std::size_t a, std::size_t b, std::size_t c) const {
        return (((co * g.c_in + ci) * g.k_t + a) * g.k_h + b) * g.k_w + c;
    }
};

// Maps an output coordinate plus kernel tap to an input coordinate; false when
// the tap lands in the zero padding.
bool tap(std::size_t o, std::size_t k, std::size_t pad, std::size_t stride, std::size_t n, std::size_t& i) {
    auto pos = static_cast<std::int64_t>(o * stride + k) - static_cast<std::int64_t>(pad);
    if (pos < 0 || pos >= static_cast<std::int64_t>(n)) return false;
    i = static_cast<std::size_t>(pos);
    return true;
}

template <class Fn>
void for_each_tap(const Conv3dGeometry& g, Fn&& fn) {
    for (std::size_t co = 0; co < g.c_out; ++co)
        for (std::size_t to = 0; to < g.t_out(); ++to)
            for (std::size_t ho = 0; ho < g.h_out(); ++ho)
                for (std::size_t wo = 0; wo < g.w_out(); ++wo)
                    for (std::size_t ci = 0; ci < g.c_in; ++ci)
                        for (std::size_t a = 0; a < g.k_t; ++a)
                            for (std::size_t b = 0; b < g.k_h; ++b)
                                for (std::size_t c = 0; c < g.k_w; ++c) {
                                    std::size_t ti, hi, wi;
                                    if (!tap(to, a, g.pad[0], g.stride[0], g.t_in, ti)) continue;
                                    if (!tap(ho, b, g.pad[1], g.stride[1], g.h_in, hi)) continue;
                                    if (!tap(wo, c, g.pad[2], g.stride[2], g.w_in, wi)) continue;
                                    fn(co, to, ho, wo, ci, ti, hi, wi, a, b, c);
                                }
}

}  // namespace

void conv3d_forward(const Conv3dGeometry& g, std::span<const double> input, std::span<const double> kernel,
                    std::span<const double> bias, std::span<double> out) {
    Index ix{g};
    for (std::size_t co = 0; co < g.c_out; ++co)
        for (std::size_t to = 0; to < g.t_out(); ++to)
            for (std::size_t ho = 0; ho < g.h_out(); ++ho)
                for (std::size_t wo = 0; wo < g.w_out(); ++wo)
                    out[ix.out(co, to, ho, wo)] = bias.empty() ? 0.0 : bias[co];
    for_each_tap(g, [&](auto co, auto to, auto ho, auto wo, auto ci, auto ti, auto hi, auto wi, auto a, auto b,
                        auto c) {
        out[ix.out(co, to, ho, wo)] += kernel[ix.ker(co, ci, a, b, c)] * input[ix.in(ci, ti, hi, wi)];
    });
}

void conv3d_backward_input(const Conv3dGeometry& g, std::span<const double> grad_out, std::span<const double> kernel,
                           std::span<double> grad_input) {
    Index ix{g};
    for_each_tap(g, [&](auto co, auto to, auto ho, auto wo, auto ci, auto ti, auto hi, auto wi, auto a, auto b,
                        auto c) {
        grad_input[ix.in(ci, ti, hi, wi)] += kernel[ix.ker(co, ci, a, b, c)] * grad_out[ix.out(co, to, ho, wo)];
    });
}

void conv3d_backward_kernel(const Conv3dGeometry& g, std::span<const double> grad_out, std::span<const double> input,
                            std::span<double> grad_kernel, std::span<double> grad_bias) {
    Index ix{g};
    if (!grad_bias.empty()) {
        for (std::size_t co = 0; co < g.c_out; ++co)
            for (std::size_t to = 0; to < g.t_out(); ++to)
                for (std::size_t ho = 0; ho < g.h_out(); ++ho)
                    for (std::size_t wo = 0; wo < g.w_out(); ++wo) grad_bias[co] += grad_out[ix.out(co, to, ho, wo)];
    }
    if (grad_kernel.empty()) return;
    for_each_tap(g, [&](auto co, auto to, auto ho, auto wo, auto ci, auto ti, auto hi, auto wi, auto a, auto b,
                        auto c) {
        grad_kernel[ix.ker(co, ci, a, b, c)] += input[ix.in(ci, ti, hi, wi)] * grad_out[ix.out(co, to, ho, wo)];
    });
}

void linear_forward(std::size_t n, std::size_t d_in, std::size_t d_out, std::span<const double> x,
                    std::span<const double> w, std::span<const double> b, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d_out; ++j) {
            double s = b.empty() ? 0.0 : b[j];
            for (std::size_t k = 0; k < d_in; ++k) s += x[i * d_in + k] * w[k * d_out + j];
            out[i * d_out + j] = s;
        }
}

void linear_backward(std::size_t n, std::size_t d_in, std::size_t d_out, std::span<const double> grad_out,
                     std::span<const double> x, std::span<const double> w, std::span<double> grad_x,
                     std::span<double> grad_w, std::span<double> grad_b) {
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d_out; ++j) {
            const double g = grad_out[i * d_out + j];
            for (std::size_t k = 0; k < d_in; ++k) {
                if (!grad_x.empty()) grad_x[i * d_in + k] += g * w[k * d_out + j];
                if (!grad_w.empty()) grad_w[k * d_out + j] += g * x[i * d_in + k];
            }
            if (!grad_b.empty()) grad_b[j] += g;
        }
}

}  // namespace gait::kernels::serial
