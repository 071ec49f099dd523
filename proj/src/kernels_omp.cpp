#include "gait/kernels.hpp"

#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gait::kernels {

namespace {

int g_workers = 1;

// Output positions o with 0 <= o*stride + k - pad < n, clipped to [0, n_out).
struct Range {
    std::int64_t lo, hi;  // half-open
};

inline Range valid_range(std::int64_t n, std::int64_t n_out, std::int64_t k, std::int64_t pad, std::int64_t stride) {
    std::int64_t off = k - pad;
    std::int64_t lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
    std::int64_t last = n - 1 - off;
    if (last < 0) return {0, 0};
    std::int64_t hi = std::min(n_out, last / stride + 1);
    return {lo, std::max(lo, hi)};
}

// Below this many output elements the team start-up costs more than it saves.
constexpr std::size_t kParallelThreshold = 4096;

}  // namespace

void set_workers(int workers) {
    g_workers = std::max(1, workers);
#ifdef _OPENMP
    omp_set_num_threads(g_workers);
#endif
}

int workers() { return g_workers; }

void conv3d_forward(const Conv3dGeometry& g, std::span<const double> input, std::span<const double> kernel,
                    std::span<const double> bias, std::span<double> out) {
    const auto T = static_cast<std::int64_t>(g.t_in), H = static_cast<std::int64_t>(g.h_in),
               W = static_cast<std::int64_t>(g.w_in);
    const auto To = static_cast<std::int64_t>(g.t_out()), Ho = static_cast<std::int64_t>(g.h_out()),
               Wo = static_cast<std::int64_t>(g.w_out());
    const auto Co = static_cast<std::int64_t>(g.c_out), Ci = static_cast<std::int64_t>(g.c_in);
    const auto kt = static_cast<std::int64_t>(g.k_t), kh = static_cast<std::int64_t>(g.k_h),
               kw = static_cast<std::int64_t>(g.k_w);
    const auto pt = static_cast<std::int64_t>(g.pad[0]), ph = static_cast<std::int64_t>(g.pad[1]),
               pw = static_cast<std::int64_t>(g.pad[2]);
    const auto st = static_cast<std::int64_t>(g.stride[0]), sh = static_cast<std::int64_t>(g.stride[1]),
               sw = static_cast<std::int64_t>(g.stride[2]);
    const double* in = input.data();
    const double* k = kernel.data();
    double* o = out.data();

#pragma omp parallel for collapse(2) schedule(static) if (out.size() >= kParallelThreshold)
    for (std::int64_t co = 0; co < Co; ++co) {
        for (std::int64_t to = 0; to < To; ++to) {
            double* plane = o + (co * To + to) * Ho * Wo;
            const double b = bias.empty() ? 0.0 : bias[co];
            std::fill(plane, plane + Ho * Wo, b);
            for (std::int64_t ci = 0; ci < Ci; ++ci) {
                for (std::int64_t a = 0; a < kt; ++a) {
                    const std::int64_t ti = to * st + a - pt;
                    if (ti < 0 || ti >= T) continue;
                    const double* in_plane = in + (ci * T + ti) * H * W;
                    const double* k_slab = k + ((co * Ci + ci) * kt + a) * kh * kw;
                    for (std::int64_t b_ = 0; b_ < kh; ++b_) {
                        const Range hr = valid_range(H, Ho, b_, ph, sh);
                        for (std::int64_t c = 0; c < kw; ++c) {
                            const Range wr = valid_range(W, Wo, c, pw, sw);
                            const double wv = k_slab[b_ * kw + c];
                            for (std::int64_t ho = hr.lo; ho < hr.hi; ++ho) {
                                const double* row = in_plane + (ho * sh + b_ - ph) * W + (c - pw);
                                double* dst = plane + ho * Wo;
                                if (sw == 1) {
                                    for (std::int64_t wo = wr.lo; wo < wr.hi; ++wo) dst[wo] += wv * row[wo];
                                } else {
                                    for (std::int64_t wo = wr.lo; wo < wr.hi; ++wo) dst[wo] += wv * row[wo * sw];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv3d_backward_input(const Conv3dGeometry& g, std::span<const double> grad_out, std::span<const double> kernel,
                           std::span<double> grad_input) {
    const auto T = static_cast<std::int64_t>(g.t_in), H = static_cast<std::int64_t>(g.h_in),
               W = static_cast<std::int64_t>(g.w_in);
    const auto To = static_cast<std::int64_t>(g.t_out()), Ho = static_cast<std::int64_t>(g.h_out()),
               Wo = static_cast<std::int64_t>(g.w_out());
    const auto Co = static_cast<std::int64_t>(g.c_out), Ci = static_cast<std::int64_t>(g.c_in);
    const auto kt = static_cast<std::int64_t>(g.k_t), kh = static_cast<std::int64_t>(g.k_h),
               kw = static_cast<std::int64_t>(g.k_w);
    const auto pt = static_cast<std::int64_t>(g.pad[0]), ph = static_cast<std::int64_t>(g.pad[1]),
               pw = static_cast<std::int64_t>(g.pad[2]);
    const auto st = static_cast<std::int64_t>(g.stride[0]), sh = static_cast<std::int64_t>(g.stride[1]),
               sw = static_cast<std::int64_t>(g.stride[2]);
    const double* go = grad_out.data();
    const double* k = kernel.data();
    double* gi = grad_input.data();

#pragma omp parallel for schedule(static) if (grad_input.size() >= kParallelThreshold)
    for (std::int64_t ci = 0; ci < Ci; ++ci) {
        for (std::int64_t co = 0; co < Co; ++co) {
            for (std::int64_t to = 0; to < To; ++to) {
                const double* g_plane = go + (co * To + to) * Ho * Wo;
                for (std::int64_t a = 0; a < kt; ++a) {
                    const std::int64_t ti = to * st + a - pt;
                    if (ti < 0 || ti >= T) continue;
                    double* gi_plane = gi + (ci * T + ti) * H * W;
                    const double* k_slab = k + ((co * Ci + ci) * kt + a) * kh * kw;
                    for (std::int64_t b_ = 0; b_ < kh; ++b_) {
                        const Range hr = valid_range(H, Ho, b_, ph, sh);
                        for (std::int64_t c = 0; c < kw; ++c) {
                            const Range wr = valid_range(W, Wo, c, pw, sw);
                            const double wv = k_slab[b_ * kw + c];
                            for (std::int64_t ho = hr.lo; ho < hr.hi; ++ho) {
                                double* row = gi_plane + (ho * sh + b_ - ph) * W + (c - pw);
                                const double* src = g_plane + ho * Wo;
                                if (sw == 1) {
                                    for (std::int64_t wo = wr.lo; wo < wr.hi; ++wo) row[wo] += wv * src[wo];
                                } else {
                                    for (std::int64_t wo = wr.lo; wo < wr.hi; ++wo) row[wo * sw] += wv * src[wo];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv3d_backward_kernel(const Conv3dGeometry& g, std::span<const double> grad_out, std::span<const double> input,
                            std::span<double> grad_kernel, std::span<double> grad_bias) {
    const auto T = static_cast<std::int64_t>(g.t_in), H = static_cast<std::int64_t>(g.h_in),
               W = static_cast<std::int64_t>(g.w_in);
    const auto To = static_cast<std::int64_t>(g.t_out()), Ho = static_cast<std::int64_t>(g.h_out()),
               Wo = static_cast<std::int64_t>(g.w_out());
    const auto Co = static_cast<std::int64_t>(g.c_out), Ci = static_cast<std::int64_t>(g.c_in);
    const auto kt = static_cast<std::int64_t>(g.k_t), kh = static_cast<std::int64_t>(g.k_h),
               kw = static_cast<std::int64_t>(g.k_w);
    const auto pt = static_cast<std::int64_t>(g.pad[0]), ph = static_cast<std::int64_t>(g.pad[1]),
               pw = static_cast<std::int64_t>(g.pad[2]);
    const auto st = static_cast<std::int64_t>(g.stride[0]), sh = static_cast<std::int64_t>(g.stride[1]),
               sw = static_cast<std::int64_t>(g.stride[2]);
    const double* go = grad_out.data();
    const double* in = input.data();
    double* gk = grad_kernel.data();

#pragma omp parallel for schedule(static) if (grad_kernel.size() * Ho * Wo >= kParallelThreshold)
    for (std::int64_t co = 0; co < Co; ++co) {
        if (!grad_bias.empty()) {
            double s = 0.0;
            const double* g_co = go + co * To * Ho * Wo;
            for (std::int64_t i = 0; i < To * Ho * Wo; ++i) s += g_co[i];
            grad_bias[co] += s;
        }
        if (grad_kernel.empty()) continue;
        for (std::int64_t ci = 0; ci < Ci; ++ci) {
            for (std::int64_t a = 0; a < kt; ++a) {
                double* gk_slab = gk + ((co * Ci + ci) * kt + a) * kh * kw;
                for (std::int64_t b_ = 0; b_ < kh; ++b_) {
                    const Range hr = valid_range(H, Ho, b_, ph, sh);
                    for (std::int64_t c = 0; c < kw; ++c) {
                        const Range wr = valid_range(W, Wo, c, pw, sw);
                        double s = 0.0;
                        for (std::int64_t to = 0; to < To; ++to) {
                            const std::int64_t ti = to * st + a - pt;
                            if (ti < 0 || ti >= T) continue;
                            const double* in_plane = in + (ci * T + ti) * H * W;
                            const double* g_plane = go + (co * To + to) * Ho * Wo;
                            for (std::int64_t ho = hr.lo; ho < hr.hi; ++ho) {
                                const double* row = in_plane + (ho * sh + b_ - ph) * W + (c - pw);
                                const double* src = g_plane + ho * Wo;
                                if (sw == 1) {
                                    for (std::int64_t wo = wr.lo; wo < wr.hi; ++wo) s += src[wo] * row[wo];
                                } else {
                                    for (std::int64_t wo = wr.lo; wo < wr.hi; ++wo) s += src[wo] * row[wo * sw];
                                }
                            }
                        }
                        gk_slab[b_ * kw + c] += s;
                    }
                }
            }
        }
    }
}

void linear_forward(std::size_t n, std::size_t d_in, std::size_t d_out, std::span<const double> x,
                    std::span<const double> w, std::span<const double> b, std::span<double> out) {
    const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n * d_in * d_out >= 64 * kParallelThreshold)
    for (std::int64_t i = 0; i < rows; ++i) {
        double* dst = out.data() + i * d_out;
        for (std::size_t j = 0; j < d_out; ++j) dst[j] = b.empty() ? 0.0 : b[j];
        const double* xr = x.data() + i * d_in;
        for (std::size_t k = 0; k < d_in; ++k) {
            const double xv = xr[k];
            const double* wr = w.data() + k * d_out;
            for (std::size_t j = 0; j < d_out; ++j) dst[j] += xv * wr[j];
        }
    }
}

void linear_backward(std::size_t n, std::size_t d_in, std::size_t d_out, std::span<const double> grad_out,
                     std::span<const double> x, std::span<const double> w, std::span<double> grad_x,
                     std::span<double> grad_w, std::span<double> grad_b) {
    const bool big = n * d_in * d_out >= 64 * kParallelThreshold;
    if (!grad_x.empty()) {
        const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (big)
        for (std::int64_t i = 0; i < rows; ++i) {
            const double* g = grad_out.data() + i * d_out;
            double* gx = grad_x.data() + i * d_in;
            for (std::size_t k = 0; k < d_in; ++k) {
                const double* wr = w.data() + k * d_out;
                double s = 0.0;
                for (std::size_t j = 0; j < d_out; ++j) s += g[j] * wr[j];
                gx[k] += s;
            }
        }
    }
    if (!grad_w.empty()) {
        const auto cols = static_cast<std::int64_t>(d_in);
#pragma omp parallel for schedule(static) if (big)
        for (std::int64_t k = 0; k < cols; ++k) {
            double* gw = grad_w.data() + k * d_out;
            for (std::size_t i = 0; i < n; ++i) {
                const double xv = x[i * d_in + k];
                const double* g = grad_out.data() + i * d_out;
                for (std::size_t j = 0; j < d_out; ++j) gw[j] += xv * g[j];
            }
        }
    }
    if (!grad_b.empty()) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d_out; ++j) grad_b[j] += grad_out[i * d_out + j];
    }
}

}  // namespace gait::kernels
