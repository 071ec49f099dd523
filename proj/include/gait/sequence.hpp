#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gait/tensor.hpp"

namespace gait {

enum class Condition { NM, BG, CL };

std::string condition_name(Condition c);  // "nm", "bg", "cl"
Condition parse_condition(const std::string& s);

/// Labels shared by a silhouette sequence and its keypoint sidecar.
struct SequenceInfo {
    int identity = 0;
    Condition condition = Condition::NM;
    int seq_num = 1;
    int view = 0;  // degrees

    /// "<identity>-<condition>-<seq>-<view>", e.g. "003-nm-01-090"; orders like the tuple.
    std::string id() const;
};

/// T grayscale frames of height x width, stored as 8-bit levels (value = level / 255).
struct SilhouetteSequence {
    SequenceInfo info;
    std::size_t frames = 0, height = 0, width = 0;
    std::vector<std::uint8_t> pixels;  // frame-major, row-major

    double at(std::size_t t, std::size_t r, std::size_t c) const {
        return pixels[(t * height + r) * width + c] / 255.0;
    }
    std::uint8_t* frame(std::size_t t) { return pixels.data() + t * height * width; }
    const std::uint8_t* frame(std::size_t t) const { return pixels.data() + t * height * width; }

    /// 1 x T x height x width tensor with values in [0, 1].
    Tensor to_tensor() const;
    /// Window of `length` frames from `start`, wrapping around the end.
    SilhouetteSequence window(std::size_t start, std::size_t length) const;
};

inline constexpr std::size_t kJoints = 17;
inline constexpr std::size_t kKeypointValues = kJoints * 3;

/// COCO joint order.
enum Joint : std::size_t {
    kNose, kLeftEye, kRightEye, kLeftEar, kRightEar, kLeftShoulder, kRightShoulder, kLeftElbow, kRightElbow,
    kLeftWrist, kRightWrist, kLeftHip, kRightHip, kLeftKnee, kRightKnee, kLeftAnkle, kRightAnkle
};

/// Per frame: (x, y, confidence) for each of the 17 joints, pixel units.
struct KeypointSequence {
    std::vector<std::array<double, kKeypointValues>> frames;

    std::size_t size() const { return frames.size(); }
    double x(std::size_t t, std::size_t j) const { return frames[t][3 * j]; }
    double y(std::size_t t, std::size_t j) const { return frames[t][3 * j + 1]; }
    double confidence(std::size_t t, std::size_t j) const { return frames[t][3 * j + 2]; }
    KeypointSequence window(std::size_t start, std::size_t length) const;
};

/// A silhouette sequence with its aligned keypoints.
struct GaitSample {
    SilhouetteSequence silhouettes;
    KeypointSequence keypoints;

    const SequenceInfo& info() const { return silhouettes.info; }
    GaitSample window(std::size_t start, std::size_t length) const {
        return {silhouettes.window(start, length), keypoints.window(start, length)};
    }
};

}  // namespace gait
