#pragma once

#include <filesystem>

#include "gait/training.hpp"

namespace gait {

/// Writes <dir>/state.bin (tensor records: parameters, then Adam first and
/// second moments) and <dir>/manifest.txt (step, sampling-rng state, one line
/// per tensor with name, shape, byte offset, byte length).
void checkpoint_save(const TrainState& state, const std::filesystem::path& dir);

/// Restores a state saved for the same model configuration. Rejects missing or
/// truncated files and the first name/shape that differs from `cfg`.
TrainState checkpoint_load(const std::filesystem::path& dir, const ModelConfig& cfg);

}  // namespace gait
