#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gait/model.hpp"

namespace gait {

inline constexpr double kGradCheckTolerance = 1e-5;
inline constexpr double kGradCheckEps = 1e-4;

struct BatteryCheck {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t coords = 0;
    double seconds = 0.0;

    bool passed() const { return max_rel_error < kGradCheckTolerance; }
};

/// The end-to-end check model: T=4 frames of 8x6, L=2, m=2, C=2, learnable
/// GeM exponents.
ModelConfig micro_model_config();

/// Central differences are meaningless across a leaky-ReLU kink, so the
/// end-to-end inputs are redrawn until every pre-activation is this far from 0.
inline constexpr double kKinkMargin = 1e-3;

struct MicroInputs {
    ModelParams params;
    Tensor frames;     // 1 x 4 x 8 x 6
    Tensor keypoints;  // 4 x 51
    double margin = 0.0;
    std::size_t attempts = 0;
};

MicroInputs draw_micro_inputs(const ModelConfig& cfg, std::uint64_t seed);

/// Finite-difference check of every differentiable operation, each composite
/// block and the micro model end to end. Inputs come from `seed`.
std::vector<BatteryCheck> run_gradcheck_battery(std::uint64_t seed = 7);

}  // namespace gait
