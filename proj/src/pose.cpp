#include "gait/pose.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "gait/ops.hpp"

namespace gait {

namespace {
constexpr double kEncoderSlope = 0.01;
}

PoseParams init_pose(std::size_t pose_dim, std::size_t ta_hidden, Rng& rng) {
    PoseParams p;
    p.fc1 = init_linear(kKeypointValues, pose_dim, rng);
    p.fc2 = init_linear(pose_dim, pose_dim, rng);
    p.ta = init_ta(pose_dim, ta_hidden, rng);
    return p;
}

Tensor normalize_keypoints(const KeypointSequence& k, NormalizeDiagnostics* diag) {
    const std::size_t t_count = k.size();
    if (t_count == 0) throw std::invalid_argument("normalize_keypoints: empty keypoint sequence");
    std::vector<std::optional<std::array<double, kKeypointValues>>> rows(t_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        const double hx = 0.5 * (k.x(t, kLeftHip) + k.x(t, kRightHip));
        const double hy = 0.5 * (k.y(t, kLeftHip) + k.y(t, kRightHip));
        const double sx = 0.5 * (k.x(t, kLeftShoulder) + k.x(t, kRightShoulder));
        const double sy = 0.5 * (k.y(t, kLeftShoulder) + k.y(t, kRightShoulder));
        const double torso = std::hypot(sx - hx, sy - hy);
        if (!(torso >= kMinTorsoLength)) continue;
        std::array<double, kKeypointValues> row{};
        for (std::size_t j = 0; j < kJoints; ++j) {
            row[3 * j] = (k.x(t, j) - hx) / torso;
            row[3 * j + 1] = (k.y(t, j) - hy) / torso;
            row[3 * j + 2] = k.confidence(t, j);
        }
        rows[t] = row;
    }
    std::size_t first_valid = t_count;
    for (std::size_t t = 0; t < t_count; ++t)
        if (rows[t]) {
            first_valid = t;
            break;
        }
    if (first_valid == t_count) {
        throw std::invalid_argument("normalize_keypoints: every frame has a degenerate torso");
    }
    std::vector<double> values;
    values.reserve(t_count * kKeypointValues);
    const std::array<double, kKeypointValues>* last = &*rows[first_valid];
    for (std::size_t t = 0; t < t_count; ++t) {
        if (rows[t]) {
            last = &*rows[t];
        } else if (diag) {
            diag->degenerate_frames.push_back(t);
        }
        values.insert(values.end(), last->begin(), last->end());
    }
    return Tensor::from({t_count, kKeypointValues}, std::move(values));
}

Tensor pose_encode(const Tensor& normalized, const PoseParams& params) {
    return apply(params.fc2, leaky_relu(apply(params.fc1, normalized), kEncoderSlope));
}

Tensor pose_forward(const KeypointSequence& k, const PoseParams& params, std::size_t clip_length) {
    Tensor frames = pose_encode(normalize_keypoints(k), params);
    return ta_aggregate(clip_split(frames, clip_length), params.ta);
}

}  // namespace gait
