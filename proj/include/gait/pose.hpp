#pragma once

#include <cstddef>
#include <vector>

#include "gait/attention.hpp"
#include "gait/layers.hpp"
#include "gait/sequence.hpp"

namespace gait {

struct PoseParams {
    LinearParams fc1;  // 51 -> d_p
    LinearParams fc2;  // d_p -> d_p
    TAParams ta;
};

PoseParams init_pose(std::size_t pose_dim, std::size_t ta_hidden, Rng& rng);

/// Frames whose torso was too short to normalize and were filled from a neighbor.
struct NormalizeDiagnostics {
    std::vector<std::size_t> degenerate_frames;
};

inline constexpr double kMinTorsoLength = 1e-6;

/// Per frame: hip midpoint moved to the origin, coordinates divided by the
/// hip-to-shoulder midpoint distance, confidences unchanged. Degenerate frames
/// copy the previous valid frame (leading ones the first valid frame).
/// Returns T x 51; throws if no frame is valid.
Tensor normalize_keypoints(const KeypointSequence& k, NormalizeDiagnostics* diag = nullptr);

/// Normalized T x 51 -> T x d_p frame features.
Tensor pose_encode(const Tensor& normalized, const PoseParams& params);
/// normalize -> encode -> clip split -> attention: S x d_p.
Tensor pose_forward(const KeypointSequence& k, const PoseParams& params, std::size_t clip_length);

}  // namespace gait
