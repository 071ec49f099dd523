#include "gait/sequence.hpp"

#include <cstdio>
#include <stdexcept>

namespace gait {

std::string condition_name(Condition c) {
    switch (c) {
        case Condition::NM: return "nm";
        case Condition::BG: return "bg";
        case Condition::CL: return "cl";
    }
    return "?";
}

Condition parse_condition(const std::string& s) {
    if (s == "nm" || s == "NM") return Condition::NM;
    if (s == "bg" || s == "BG") return Condition::BG;
    if (s == "cl" || s == "CL") return Condition::CL;
    throw std::invalid_argument("unknown walking condition '" + s + "' (expected nm, bg or cl)");
}

std::string SequenceInfo::id() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%03d-%s-%02d-%03d", identity, condition_name(condition).c_str(), seq_num, view);
    return buf;
}

Tensor SilhouetteSequence::to_tensor() const {
    std::vector<double> values(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) values[i] = pixels[i] / 255.0;
    return Tensor::from({1, frames, height, width}, std::move(values));
}

SilhouetteSequence SilhouetteSequence::window(std::size_t start, std::size_t length) const {
    if (frames == 0) throw std::invalid_argument("window of an empty sequence " + info.id());
    SilhouetteSequence out{info, length, height, width, {}};
    out.pixels.resize(length * height * width);
    const std::size_t plane = height * width;
    for (std::size_t i = 0; i < length; ++i) {
        const std::uint8_t* src = frame((start + i) % frames);
        std::copy(src, src + plane, out.pixels.begin() + static_cast<std::ptrdiff_t>(i * plane));
    }
    return out;
}

KeypointSequence KeypointSequence::window(std::size_t start, std::size_t length) const {
    if (frames.empty()) throw std::invalid_argument("window of an empty keypoint sequence");
    KeypointSequence out;
    out.frames.reserve(length);
    for (std::size_t i = 0; i < length; ++i) out.frames.push_back(frames[(start + i) % frames.size()]);
    return out;
}

}  // namespace gait
