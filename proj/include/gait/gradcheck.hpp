#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gait/tensor.hpp"

namespace gait {

/// Maps a list of leaf tensors to a scalar. Must be deterministic.
using LossFn = std::function<Tensor(const std::vector<Tensor>&)>;

struct GradCheckEntry {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t coords = 0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::vector<GradCheckEntry> entries;  // one per input
};

/// Compares backward() against central differences on every coordinate of
/// every input. Error per coordinate is |analytic - numeric| / max(1, |numeric|).
GradCheckReport grad_check_report(const LossFn& f, const std::vector<Tensor>& inputs, double eps = 1e-4,
                                  const std::vector<std::string>& names = {});

double grad_check(const LossFn& f, const std::vector<Tensor>& inputs, double eps = 1e-4);

}  // namespace gait
