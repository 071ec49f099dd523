#include "gait/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gait {

GradCheckReport grad_check_report(const LossFn& f, const std::vector<Tensor>& inputs, double eps,
                                  const std::vector<std::string>& names) {
    std::vector<Tensor> leaves = inputs;
    for (auto& t : leaves) {
        t.set_requires_grad(true);
        t.zero_grad();
    }
    {
        Tensor loss = f(leaves);
        loss.backward();
    }
    std::vector<std::vector<double>> analytic;
    analytic.reserve(leaves.size());
    for (auto& t : leaves) analytic.emplace_back(t.grad().begin(), t.grad().end());

    GradCheckReport report;
    NoGradGuard no_grad;
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        GradCheckEntry entry;
        entry.name = k < names.size() ? names[k] : "input" + std::to_string(k);
        auto values = leaves[k].mutable_data();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + eps;
            const double up = f(leaves).item();
            values[i] = saved - eps;
            const double down = f(leaves).item();
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double err = std::abs(analytic[k][i] - numeric) / std::max(1.0, std::abs(numeric));
            entry.max_rel_error = std::max(entry.max_rel_error, err);
        }
        entry.coords = values.size();
        report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

double grad_check(const LossFn& f, const std::vector<Tensor>& inputs, double eps) {
    return grad_check_report(f, inputs, eps).max_rel_error;
}

}  // namespace gait
