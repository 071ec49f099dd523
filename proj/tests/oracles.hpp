#pragma once

// Slow, literal reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "gait/eval.hpp"
#include "gait/ops.hpp"
#include "gait/rng.hpp"

namespace oracle {

inline gait::Tensor random_tensor(const gait::Shape& shape, gait::Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(gait::numel(shape));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return gait::Tensor::from(shape, std::move(v));
}

/// Direct summation over every output position and kernel tap.
inline std::vector<double> conv3d(const gait::Tensor& input, const gait::Tensor& kernel, const gait::Tensor& bias,
                                  const gait::Conv3dOptions& o) {
    const auto& is = input.shape();
    const auto& ks = kernel.shape();
    const long ci_n = static_cast<long>(is[0]);
    const long T = static_cast<long>(is[1]), H = static_cast<long>(is[2]), W = static_cast<long>(is[3]);
    const long co_n = static_cast<long>(ks[0]), kt = static_cast<long>(ks[2]), kh = static_cast<long>(ks[3]),
               kw = static_cast<long>(ks[4]);
    const long pt = static_cast<long>(o.pad[0]), ph = static_cast<long>(o.pad[1]), pw = static_cast<long>(o.pad[2]);
    const long st = static_cast<long>(o.stride[0]), sh = static_cast<long>(o.stride[1]), sw = static_cast<long>(o.stride[2]);
    const long To = (T + 2 * pt - kt) / st + 1, Ho = (H + 2 * ph - kh) / sh + 1, Wo = (W + 2 * pw - kw) / sw + 1;
    auto in = input.data();
    auto k = kernel.data();
    std::vector<double> out(static_cast<std::size_t>(co_n * To * Ho * Wo));
    for (long co = 0; co < co_n; ++co)
        for (long t = 0; t < To; ++t)
            for (long y = 0; y < Ho; ++y)
                for (long x = 0; x < Wo; ++x) {
                    double s = bias.defined() ? bias[static_cast<std::size_t>(co)] : 0.0;
                    for (long ci = 0; ci < ci_n; ++ci)
                        for (long a = 0; a < kt; ++a)
                            for (long b = 0; b < kh; ++b)
                                for (long c = 0; c < kw; ++c) {
                                    const long ti = t * st + a - pt, yi = y * sh + b - ph, xi = x * sw + c - pw;
                                    if (ti < 0 || ti >= T || yi < 0 || yi >= H || xi < 0 || xi >= W) continue;
                                    s += in[static_cast<std::size_t>(((ci * T + ti) * H + yi) * W + xi)] *
                                         k[static_cast<std::size_t>((((co * ci_n + ci) * kt + a) * kh + b) * kw + c)];
                                }
                    out[static_cast<std::size_t>(((co * To + t) * Ho + y) * Wo + x)] = s;
                }
    return out;
}

/// Triplet loss by enumerating every head, anchor, positive and negative.
inline double triplet_loss(const std::vector<std::vector<std::vector<double>>>& emb,  // item x head x dim
                           const std::vector<int>& ids, double margin) {
    const std::size_t n = emb.size(), heads = emb[0].size();
    auto dist = [&](std::size_t i, std::size_t j, std::size_t c) {
        double s = 0;
        for (std::size_t k = 0; k < emb[i][c].size(); ++k) s += (emb[i][c][k] - emb[j][c][k]) * (emb[i][c][k] - emb[j][c][k]);
        return std::sqrt(s);
    };
    double total = 0.0;
    for (std::size_t c = 0; c < heads; ++c)
        for (std::size_t a = 0; a < n; ++a) {
            double pos = 0, neg = 0;
            std::size_t np = 0, nn = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == a) continue;
                if (ids[j] == ids[a]) {
                    pos += dist(a, j, c), ++np;
                } else {
                    neg += dist(a, j, c), ++nn;
                }
            }
            if (np == 0 || nn == 0) continue;
            total += std::max(0.0, margin + pos / static_cast<double>(np) - neg / static_cast<double>(nn));
        }
    return total / static_cast<double>(heads * n);
}

/// Rank-1 per (condition, probe view, gallery view) by scanning every gallery
/// sequence for every probe; ties go to the lexicographically smallest id.
struct BruteCell {
    std::size_t correct = 0, total = 0;
};
using BruteMatrix = std::map<std::tuple<gait::Condition, int, int>, BruteCell>;

inline BruteMatrix rank1(const std::vector<gait::Embedding>& gallery, const std::vector<gait::Embedding>& probe) {
    BruteMatrix m;
    for (const auto& p : probe) {
        std::map<int, std::pair<double, std::string>> best;  // gallery view -> (distance, id)
        std::map<int, int> best_identity;
        for (const auto& g : gallery) {
            if (g.info.view == p.info.view) continue;
            double d = 0;
            for (std::size_t c = 0; c < p.heads.size(); ++c) {
                double s = 0;
                for (std::size_t k = 0; k < p.heads[c].size(); ++k)
                    s += (p.heads[c][k] - g.heads[c][k]) * (p.heads[c][k] - g.heads[c][k]);
                d += std::sqrt(s);
            }
            const std::string id = g.info.id();
            auto it = best.find(g.info.view);
            if (it == best.end() || d < it->second.first || (d == it->second.first && id < it->second.second)) {
                best[g.info.view] = {d, id};
                best_identity[g.info.view] = g.info.identity;
            }
        }
        for (const auto& [view, pick] : best) {
            auto& cell = m[{p.info.condition, p.info.view, view}];
            ++cell.total;
            cell.correct += best_identity[view] == p.info.identity;
        }
    }
    return m;
}

}  // namespace oracle
