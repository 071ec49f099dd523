#include "gait/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gait/kernels.hpp"

namespace gait {

namespace {

using detail::Node;

// Gradient buffer of parent i, or nullptr when that parent is a constant.
double* parent_grad(Node& self, std::size_t i) {
    auto& p = *self.parents[i];
    return p.requires_grad ? p.grad_buffer().data() : nullptr;
}

const std::vector<double>& parent_value(Node& self, std::size_t i) { return self.parents[i]->value; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));
    }
}

void require_axis(const Tensor& x, std::size_t axis, const char* op) {
    if (axis >= x.rank()) {
        throw std::invalid_argument(std::string(op) + ": axis " + std::to_string(axis) + " invalid for " +
                                    shape_str(x.shape()));
    }
}

struct AxisSplit {
    std::size_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
    AxisSplit r;
    for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
    r.n = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
    return r;
}

Shape drop_axis(const Shape& s, std::size_t axis) {
    Shape r = s;
    r.erase(r.begin() + static_cast<std::ptrdiff_t>(axis));
    return r;
}

template <class Fwd, class Deriv>
Tensor unary(const Tensor& x, const char* op, Fwd fwd, Deriv deriv) {
    const auto& xv = x.data();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xv[i]);
    return Tensor::make_result(
        x.shape(), std::move(out), {x},
        [deriv](Node& self) {
            double* gx = parent_grad(self, 0);
            if (!gx) return;
            const auto& in = parent_value(self, 0);
            for (std::size_t i = 0; i < in.size(); ++i) gx[i] += self.grad[i] * deriv(in[i], self.value[i]);
        },
        op);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return Tensor::make_result(
        a.shape(), std::move(out), {a, b},
        [](Node& self) {
            for (std::size_t k = 0; k < 2; ++k)
                if (double* g = parent_grad(self, k))
                    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
        },
        "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    return Tensor::make_result(
        a.shape(), std::move(out), {a, b},
        [](Node& self) {
            if (double* g = parent_grad(self, 0))
                for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
            if (double* g = parent_grad(self, 1))
                for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
        },
        "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
    return Tensor::make_result(
        a.shape(), std::move(out), {a, b},
        [](Node& self) {
            const auto& av = parent_value(self, 0);
            const auto& bv = parent_value(self, 1);
            if (double* g = parent_grad(self, 0))
                for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * bv[i];
            if (double* g = parent_grad(self, 1))
                for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * av[i];
        },
        "mul");
}

Tensor add_scalar(const Tensor& x, double s) {
    return unary(x, "add_scalar", [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Tensor scale(const Tensor& x, double s) {
    return unary(x, "scale", [s](double v) { return v * s; }, [s](double, double) { return s; });
}

Tensor pow(const Tensor& x, double e) {
    return unary(
        x, "pow", [e](double v) { return std::pow(v, e); },
        [e](double v, double) { return e == 0.0 ? 0.0 : e * std::pow(v, e - 1.0); });
}

Tensor relu(const Tensor& x) {
    return unary(x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
                 [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
    return unary(
        x, "leaky_relu", [slope](double v) { return v > 0.0 ? v : slope * v; },
        [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor softplus(const Tensor& x) {
    return unary(
        x, "softplus", [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); },
        [](double v, double) { return 1.0 / (1.0 + std::exp(-v)); });
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (numel(shape) != x.numel()) {
        throw std::invalid_argument("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
    }
    std::vector<double> out(x.data().begin(), x.data().end());
    return Tensor::make_result(
        std::move(shape), std::move(out), {x},
        [](Node& self) {
            if (double* g = parent_grad(self, 0))
                for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
        },
        "reshape");
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& order) {
    const auto& s = x.shape();
    if (order.size() != s.size()) throw std::invalid_argument("permute: order rank mismatch for " + shape_str(s));
    std::vector<bool> used(s.size(), false);
    for (auto o : order) {
        if (o >= s.size() || used[o]) throw std::invalid_argument("permute: invalid axis order");
        used[o] = true;
    }
    const std::size_t r = s.size();
    std::vector<std::size_t> in_stride(r, 1);
    for (std::size_t i = r; i-- > 1;) in_stride[i - 1] = in_stride[i] * s[i];
    Shape out_shape(r);
    for (std::size_t i = 0; i < r; ++i) out_shape[i] = s[order[i]];

    // src_index[k] = flat input index of flat output element k
    std::vector<std::size_t> src(x.numel());
    std::vector<std::size_t> idx(r, 0);
    for (std::size_t k = 0; k < src.size(); ++k) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < r; ++i) off += idx[i] * in_stride[order[i]];
        src[k] = off;
        for (std::size_t i = r; i-- > 0;) {
            if (++idx[i] < out_shape[i]) break;
            idx[i] = 0;
        }
    }
    std::vector<double> out(src.size());
    for (std::size_t k = 0; k < src.size(); ++k) out[k] = x[src[k]];
    return Tensor::make_result(
        std::move(out_shape), std::move(out), {x},
        [src = std::move(src)](Node& self) {
            if (double* g = parent_grad(self, 0))
                for (std::size_t k = 0; k < src.size(); ++k) g[src[k]] += self.grad[k];
        },
        "permute");
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
    require_axis(x, axis, "slice");
    if (begin >= end || end > x.dim(axis)) {
        throw std::invalid_argument("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                                    ") invalid for axis " + std::to_string(axis) + " of " + shape_str(x.shape()));
    }
    const AxisSplit sp = split_at(x.shape(), axis);
    const std::size_t len = end - begin;
    Shape out_shape = x.shape();
    out_shape[axis] = len;
    std::vector<double> out(sp.outer * len * sp.inner);
    for (std::size_t o = 0; o < sp.outer; ++o) {
        const double* from = x.data().data() + (o * sp.n + begin) * sp.inner;
        std::copy(from, from + len * sp.inner, out.begin() + static_cast<std::ptrdiff_t>(o * len * sp.inner));
    }
    return Tensor::make_result(
        std::move(out_shape), std::move(out), {x},
        [sp, begin, len](Node& self) {
            double* g = parent_grad(self, 0);
            if (!g) return;
            for (std::size_t o = 0; o < sp.outer; ++o) {
                double* to = g + (o * sp.n + begin) * sp.inner;
                const double* from = self.grad.data() + o * len * sp.inner;
                for (std::size_t i = 0; i < len * sp.inner; ++i) to[i] += from[i];
            }
        },
        "slice");
}

Tensor concat(const std::vector<Tensor>& xs, std::size_t axis) {
    if (xs.empty()) throw std::invalid_argument("concat: no inputs");
    require_axis(xs[0], axis, "concat");
    Shape out_shape = xs[0].shape();
    out_shape[axis] = 0;
    std::vector<std::size_t> lens;
    for (const auto& t : xs) {
        Shape a = t.shape(), b = xs[0].shape();
        if (a.size() != b.size()) throw std::invalid_argument("concat: rank mismatch " + shape_str(a) + " vs " + shape_str(b));
        a[axis] = b[axis] = 0;
        if (a != b) {
            throw std::invalid_argument("concat: incompatible shapes " + shape_str(t.shape()) + " and " +
                                        shape_str(xs[0].shape()) + " along axis " + std::to_string(axis));
        }
        lens.push_back(t.dim(axis));
        out_shape[axis] += t.dim(axis);
    }
    const AxisSplit sp = split_at(out_shape, axis);
    std::vector<double> out(numel(out_shape));
    std::size_t offset = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const std::size_t chunk = lens[k] * sp.inner;
        for (std::size_t o = 0; o < sp.outer; ++o) {
            const double* from = xs[k].data().data() + o * chunk;
            std::copy(from, from + chunk, out.begin() + static_cast<std::ptrdiff_t>((o * sp.n + offset) * sp.inner));
        }
        offset += lens[k];
    }
    return Tensor::make_result(
        std::move(out_shape), std::move(out), xs,
        [sp, lens](Node& self) {
            std::size_t offset = 0;
            for (std::size_t k = 0; k < lens.size(); ++k) {
                const std::size_t chunk = lens[k] * sp.inner;
                if (double* g = parent_grad(self, k)) {
                    for (std::size_t o = 0; o < sp.outer; ++o) {
                        const double* from = self.grad.data() + (o * sp.n + offset) * sp.inner;
                        for (std::size_t i = 0; i < chunk; ++i) g[o * chunk + i] += from[i];
                    }
                }
                offset += lens[k];
            }
        },
        "concat");
}

Tensor reduce(const Tensor& x, std::size_t axis, Reduce kind) {
    require_axis(x, axis, "reduce");
    const AxisSplit sp = split_at(x.shape(), axis);
    std::vector<double> out(sp.outer * sp.inner);
    std::vector<std::size_t> argmax;
    if (kind == Reduce::Max) argmax.assign(out.size(), 0);
    const double* xv = x.data().data();
    for (std::size_t o = 0; o < sp.outer; ++o) {
        for (std::size_t i = 0; i < sp.inner; ++i) {
            const double* base = xv + o * sp.n * sp.inner + i;
            double acc = kind == Reduce::Max ? base[0] : 0.0;
            std::size_t best = 0;
            for (std::size_t k = 0; k < sp.n; ++k) {
                const double v = base[k * sp.inner];
                if (kind == Reduce::Max) {
                    if (v > acc) acc = v, best = k;
                } else {
                    acc += v;
                }
            }
            if (kind == Reduce::Mean) acc /= static_cast<double>(sp.n);
            out[o * sp.inner + i] = acc;
            if (kind == Reduce::Max) argmax[o * sp.inner + i] = best;
        }
    }
    const char* name = kind == Reduce::Sum ? "sum" : kind == Reduce::Mean ? "mean" : "max";
    return Tensor::make_result(
        drop_axis(x.shape(), axis), std::move(out), {x},
        [sp, kind, argmax = std::move(argmax)](Node& self) {
            double* g = parent_grad(self, 0);
            if (!g) return;
            const double w = kind == Reduce::Mean ? 1.0 / static_cast<double>(sp.n) : 1.0;
            for (std::size_t o = 0; o < sp.outer; ++o)
                for (std::size_t i = 0; i < sp.inner; ++i) {
                    const double go = self.grad[o * sp.inner + i];
                    double* base = g + o * sp.n * sp.inner + i;
                    if (kind == Reduce::Max) {
                        base[argmax[o * sp.inner + i] * sp.inner] += go;
                    } else {
                        for (std::size_t k = 0; k < sp.n; ++k) base[k * sp.inner] += go * w;
                    }
                }
        },
        name);
}

Tensor sum(const Tensor& x, std::size_t axis) { return reduce(x, axis, Reduce::Sum); }
Tensor mean(const Tensor& x, std::size_t axis) { return reduce(x, axis, Reduce::Mean); }
Tensor max(const Tensor& x, std::size_t axis) { return reduce(x, axis, Reduce::Max); }
Tensor sum_all(const Tensor& x) { return sum(reshape(x, {x.numel()}), 0); }
Tensor mean_all(const Tensor& x) { return mean(reshape(x, {x.numel()}), 0); }

Tensor softmax(const Tensor& x, std::size_t axis) {
    require_axis(x, axis, "softmax");
    const AxisSplit sp = split_at(x.shape(), axis);
    std::vector<double> out(x.numel());
    const double* xv = x.data().data();
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t i = 0; i < sp.inner; ++i) {
            const std::size_t base = o * sp.n * sp.inner + i;
            double m = xv[base];
            for (std::size_t k = 1; k < sp.n; ++k) m = std::max(m, xv[base + k * sp.inner]);
            double z = 0.0;
            for (std::size_t k = 0; k < sp.n; ++k) {
                const double e = std::exp(xv[base + k * sp.inner] - m);
                out[base + k * sp.inner] = e;
                z += e;
            }
            for (std::size_t k = 0; k < sp.n; ++k) out[base + k * sp.inner] /= z;
        }
    return Tensor::make_result(
        x.shape(), std::move(out), {x},
        [sp](Node& self) {
            double* g = parent_grad(self, 0);
            if (!g) return;
            const auto& y = self.value;
            for (std::size_t o = 0; o < sp.outer; ++o)
                for (std::size_t i = 0; i < sp.inner; ++i) {
                    const std::size_t base = o * sp.n * sp.inner + i;
                    double dot = 0.0;
                    for (std::size_t k = 0; k < sp.n; ++k) dot += self.grad[base + k * sp.inner] * y[base + k * sp.inner];
                    for (std::size_t k = 0; k < sp.n; ++k) {
                        const std::size_t j = base + k * sp.inner;
                        g[j] += y[j] * (self.grad[j] - dot);
                    }
                }
        },
        "softmax");
}

Tensor conv3d(const Tensor& input, const Tensor& kernel, const Tensor& bias, const Conv3dOptions& opts) {
    if (input.rank() != 4 || kernel.rank() != 5) {
        throw std::invalid_argument("conv3d: expected input c x T x h x w and 5-d kernel, got " +
                                    shape_str(input.shape()) + " and " + shape_str(kernel.shape()));
    }
    if (kernel.dim(1) != input.dim(0)) {
        throw std::invalid_argument("conv3d: channel mismatch between input " + shape_str(input.shape()) +
                                    " and kernel " + shape_str(kernel.shape()));
    }
    kernels::Conv3dGeometry g;
    g.c_in = input.dim(0), g.t_in = input.dim(1), g.h_in = input.dim(2), g.w_in = input.dim(3);
    g.c_out = kernel.dim(0), g.k_t = kernel.dim(2), g.k_h = kernel.dim(3), g.k_w = kernel.dim(4);
    g.pad = opts.pad;
    g.stride = opts.stride;
    const std::array<std::size_t, 3> in_ext{g.t_in, g.h_in, g.w_in}, k_ext{g.k_t, g.k_h, g.k_w};
    for (std::size_t a = 0; a < 3; ++a) {
        if (g.stride[a] == 0) throw std::invalid_argument("conv3d: stride must be positive");
        const std::size_t padded = in_ext[a] + 2 * g.pad[a];
        if (k_ext[a] > padded) {
            throw std::invalid_argument("conv3d: kernel " + shape_str(kernel.shape()) + " exceeds padded input " +
                                        shape_str(input.shape()));
        }
        if ((padded - k_ext[a]) % g.stride[a] != 0) {
            throw std::invalid_argument("conv3d: non-integer output extent on axis " + std::to_string(a + 1) +
                                        " for input " + shape_str(input.shape()) + " and kernel " +
                                        shape_str(kernel.shape()));
        }
    }
    std::vector<Tensor> inputs{input, kernel};
    std::span<const double> bias_span;
    if (bias.defined()) {
        if (bias.rank() != 1 || bias.dim(0) != g.c_out) {
            throw std::invalid_argument("conv3d: bias " + shape_str(bias.shape()) + " does not match kernel " +
                                        shape_str(kernel.shape()));
        }
        inputs.push_back(bias);
        bias_span = bias.data();
    }
    std::vector<double> out(g.out_size());
    kernels::conv3d_forward(g, input.data(), kernel.data(), bias_span, out);
    return Tensor::make_result(
        {g.c_out, g.t_out(), g.h_out(), g.w_out()}, std::move(out), std::move(inputs),
        [g](Node& self) {
            if (double* gi = parent_grad(self, 0))
                kernels::conv3d_backward_input(g, self.grad, parent_value(self, 1),
                                               std::span<double>(gi, self.parents[0]->value.size()));
            double* gk = parent_grad(self, 1);
            double* gb = self.parents.size() > 2 ? parent_grad(self, 2) : nullptr;
            if (gk || gb) {
                kernels::conv3d_backward_kernel(
                    g, self.grad, parent_value(self, 0),
                    gk ? std::span<double>(gk, self.parents[1]->value.size()) : std::span<double>(),
                    gb ? std::span<double>(gb, g.c_out) : std::span<double>());
            }
        },
        "conv3d");
}

Tensor max_pool2d(const Tensor& x, std::size_t kh, std::size_t kw) {
    if (x.rank() < 2 || kh == 0 || kw == 0) throw std::invalid_argument("max_pool2d: bad input " + shape_str(x.shape()));
    const std::size_t H = x.dim(x.rank() - 2), W = x.dim(x.rank() - 1);
    const std::size_t Ho = H / kh, Wo = W / kw;
    if (Ho == 0 || Wo == 0) throw std::invalid_argument("max_pool2d: window larger than " + shape_str(x.shape()));
    const std::size_t planes = x.numel() / (H * W);
    Shape out_shape = x.shape();
    out_shape[out_shape.size() - 2] = Ho;
    out_shape[out_shape.size() - 1] = Wo;
    std::vector<double> out(planes * Ho * Wo);
    std::vector<std::size_t> arg(out.size());
    const double* xv = x.data().data();
    for (std::size_t p = 0; p < planes; ++p)
        for (std::size_t i = 0; i < Ho; ++i)
            for (std::size_t j = 0; j < Wo; ++j) {
                std::size_t best = p * H * W + (i * kh) * W + j * kw;
                for (std::size_t a = 0; a < kh; ++a)
                    for (std::size_t b = 0; b < kw; ++b) {
                        const std::size_t k = p * H * W + (i * kh + a) * W + j * kw + b;
                        if (xv[k] > xv[best]) best = k;
                    }
                const std::size_t o = (p * Ho + i) * Wo + j;
                out[o] = xv[best];
                arg[o] = best;
            }
    return Tensor::make_result(
        std::move(out_shape), std::move(out), {x},
        [arg = std::move(arg)](Node& self) {
            if (double* g = parent_grad(self, 0))
                for (std::size_t o = 0; o < arg.size(); ++o) g[arg[o]] += self.grad[o];
        },
        "max_pool2d");
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    if (x.rank() != 2 || weight.rank() != 2 || x.dim(1) != weight.dim(0)) {
        throw std::invalid_argument("linear: cannot multiply " + shape_str(x.shape()) + " by " +
                                    shape_str(weight.shape()));
    }
    const std::size_t n = x.dim(0), d_in = x.dim(1), d_out = weight.dim(1);
    std::vector<Tensor> inputs{x, weight};
    std::span<const double> b;
    if (bias.defined()) {
        if (bias.rank() != 1 || bias.dim(0) != d_out) {
            throw std::invalid_argument("linear: bias " + shape_str(bias.shape()) + " does not match weight " +
                                        shape_str(weight.shape()));
        }
        inputs.push_back(bias);
        b = bias.data();
    }
    std::vector<double> out(n * d_out);
    kernels::linear_forward(n, d_in, d_out, x.data(), weight.data(), b, out);
    return Tensor::make_result(
        {n, d_out}, std::move(out), std::move(inputs),
        [n, d_in, d_out](Node& self) {
            double* gx = parent_grad(self, 0);
            double* gw = parent_grad(self, 1);
            double* gb = self.parents.size() > 2 ? parent_grad(self, 2) : nullptr;
            kernels::linear_backward(n, d_in, d_out, self.grad, parent_value(self, 0), parent_value(self, 1),
                                     gx ? std::span<double>(gx, n * d_in) : std::span<double>(),
                                     gw ? std::span<double>(gw, d_in * d_out) : std::span<double>(),
                                     gb ? std::span<double>(gb, d_out) : std::span<double>());
        },
        "linear");
}

Tensor gem(const Tensor& x, const Tensor& p, std::size_t axis) {
    require_axis(x, axis, "gem");
    if (p.numel() != 1) throw std::invalid_argument("gem: exponent must be a scalar tensor");
    const double pv = p.item();
    if (!(pv >= 1.0)) throw std::invalid_argument("gem: exponent must be >= 1, got " + std::to_string(pv));
    const AxisSplit sp = split_at(x.shape(), axis);
    const double* xv = x.data().data();
    std::vector<double> out(sp.outer * sp.inner);
    std::vector<double> means(out.size());
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t i = 0; i < sp.inner; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < sp.n; ++k) {
                const double z = std::max(xv[(o * sp.n + k) * sp.inner + i], kGemClamp);
                acc += std::pow(z, pv);
            }
            const double m = acc / static_cast<double>(sp.n);
            means[o * sp.inner + i] = m;
            out[o * sp.inner + i] = std::pow(m, 1.0 / pv);
        }
    return Tensor::make_result(
        drop_axis(x.shape(), axis), std::move(out), {x, p},
        [sp, pv, means = std::move(means)](Node& self) {
            double* gx = parent_grad(self, 0);
            double* gp = parent_grad(self, 1);
            const auto& xv = parent_value(self, 0);
            const double inv_n = 1.0 / static_cast<double>(sp.n);
            for (std::size_t o = 0; o < sp.outer; ++o)
                for (std::size_t i = 0; i < sp.inner; ++i) {
                    const std::size_t r = o * sp.inner + i;
                    const double go = self.grad[r];
                    const double m = means[r];
                    const double y = self.value[r];
                    // dy/dx_k = m^(1/p - 1) * z_k^(p-1) / n
                    const double scale_x = std::pow(m, 1.0 / pv - 1.0) * inv_n;
                    double zlogz = 0.0;
                    for (std::size_t k = 0; k < sp.n; ++k) {
                        const std::size_t j = (o * sp.n + k) * sp.inner + i;
                        const double z = std::max(xv[j], kGemClamp);
                        if (gx && xv[j] >= kGemClamp) gx[j] += go * scale_x * std::pow(z, pv - 1.0);
                        if (gp) zlogz += std::pow(z, pv) * std::log(z);
                    }
                    if (gp) {
                        zlogz *= inv_n;
                        gp[0] += go * y * (-std::log(m) / (pv * pv) + zlogz / (pv * m));
                    }
                }
        },
        "gem");
}

Tensor weighted_sum(const Tensor& x, const Tensor& w) {
    if (x.rank() != 3 || w.rank() != 2 || w.dim(0) != x.dim(0) || w.dim(1) != x.dim(1)) {
        throw std::invalid_argument("weighted_sum: weights " + shape_str(w.shape()) + " do not match features " +
                                    shape_str(x.shape()));
    }
    const std::size_t S = x.dim(0), L = x.dim(1), D = x.dim(2);
    std::vector<double> out(S * D, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t l = 0; l < L; ++l) {
            const double wv = w[s * L + l];
            const double* row = x.data().data() + (s * L + l) * D;
            for (std::size_t d = 0; d < D; ++d) out[s * D + d] += wv * row[d];
        }
    return Tensor::make_result(
        {S, D}, std::move(out), {x, w},
        [S, L, D](Node& self) {
            double* gx = parent_grad(self, 0);
            double* gw = parent_grad(self, 1);
            const auto& xv = parent_value(self, 0);
            const auto& wv = parent_value(self, 1);
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t l = 0; l < L; ++l) {
                    const double* go = self.grad.data() + s * D;
                    const std::size_t row = (s * L + l) * D;
                    if (gx)
                        for (std::size_t d = 0; d < D; ++d) gx[row + d] += wv[s * L + l] * go[d];
                    if (gw) {
                        double acc = 0.0;
                        for (std::size_t d = 0; d < D; ++d) acc += go[d] * xv[row + d];
                        gw[s * L + l] += acc;
                    }
                }
        },
        "weighted_sum");
}

Tensor pairwise_euclidean(const Tensor& x) {
    if (x.rank() != 2) throw std::invalid_argument("pairwise_euclidean: expected n x d, got " + shape_str(x.shape()));
    const std::size_t n = x.dim(0), d = x.dim(1);
    const double* xv = x.data().data();
    std::vector<double> out(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = xv[i * d + k] - xv[j * d + k];
                acc += diff * diff;
            }
            out[i * n + j] = out[j * n + i] = std::sqrt(acc);
        }
    return Tensor::make_result(
        {n, n}, std::move(out), {x},
        [n, d](Node& self) {
            double* gx = parent_grad(self, 0);
            if (!gx) return;
            const auto& xv = parent_value(self, 0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const double dist = self.value[i * n + j];
                    if (i == j || dist <= 0.0) continue;
                    const double c = (self.grad[i * n + j] + self.grad[j * n + i]) / dist;
                    if (c == 0.0) continue;
                    for (std::size_t k = 0; k < d; ++k) gx[i * d + k] += c * (xv[i * d + k] - xv[j * d + k]);
                }
        },
        "pairwise_euclidean");
}

}  // namespace gait
