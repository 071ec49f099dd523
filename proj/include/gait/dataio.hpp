#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gait/rng.hpp"
#include "gait/sequence.hpp"

namespace gait {

/// Body and gait parameters of one synthetic walker. Lengths are in body-height
/// units (a standing walker is roughly 1.0 tall).
struct WalkerIdentity {
    double femur = 0.25;
    double tibia = 0.25;
    double humerus = 0.17;
    double forearm = 0.15;
    double torso = 0.30;
    double body_width = 0.18;
    double head_radius = 0.06;
    std::size_t period = 20;  // frames per gait cycle
    double amplitude = 0.4;   // thigh swing, radians
    double phase = 0.0;       // radians

    double frequency() const { return 1.0 / static_cast<double>(period); }
};

/// Parameter ranges the generator draws from.
struct WalkerRanges {
    static constexpr double femur[2]{0.21, 0.29};
    static constexpr double tibia[2]{0.21, 0.29};
    static constexpr double humerus[2]{0.14, 0.20};
    static constexpr double forearm[2]{0.12, 0.18};
    static constexpr double torso[2]{0.25, 0.35};
    static constexpr double body_width[2]{0.13, 0.23};
    static constexpr double head_radius[2]{0.05, 0.075};
    static constexpr std::size_t period[2]{14, 26};
    static constexpr double amplitude[2]{0.30, 0.55};
};

WalkerIdentity gen_identity(Rng& rng);
/// Largest per-parameter difference, each scaled by its range width.
double identity_separation(const WalkerIdentity& a, const WalkerIdentity& b);
/// `count` identities, rejection-sampled so every pair is at least
/// `min_separation` apart.
std::vector<WalkerIdentity> gen_identities(std::size_t count, Rng& rng, double min_separation = 0.15);

struct RenderOptions {
    std::size_t height = 64;
    std::size_t width = 44;
    double keypoint_jitter = 0.0;  // Gaussian sigma in pixels; 0 = exact keypoints
};

std::vector<int> casia_views();  // 0..180 in 18-degree steps
std::vector<int> oumvlp_views();  // 0..90 and 180..270 in 15-degree steps

/// Renders a walker at a camera view (degrees, 90 = side view) under a walking
/// condition. The rng draws the per-sequence start phase, vertical offset and
/// a small stride-amplitude variation.
GaitSample render_sequence(const WalkerIdentity& id, int view, Condition condition, std::size_t frames, Rng& rng,
                           const RenderOptions& opts = {});

struct DatasetSpec {
    std::size_t identities = 8;
    std::vector<int> views = casia_views();
    std::vector<Condition> conditions{Condition::NM, Condition::BG, Condition::CL};
    std::size_t seqs_per_cell = 2;
    std::size_t frames = 40;
    std::uint64_t seed = 1;
    RenderOptions render;

    void validate() const;
};

struct Dataset {
    DatasetSpec spec;
    std::vector<WalkerIdentity> walkers;  // empty when loaded from disk
    std::vector<GaitSample> samples;      // ordered by SequenceInfo::id()

    /// Samples whose condition and sequence number match one of the
    /// "<condition>-<seq>" selectors, e.g. {"nm-01", "cl-02"}.
    std::vector<const GaitSample*> select(const std::vector<std::string>& selectors) const;
};

Dataset generate_dataset(const DatasetSpec& spec);

/// Writes `<root>/<identity>/<condition>-<seq>/<view>/<frame>.pgm`, a
/// keypoints.txt sidecar per sequence and `<root>/manifest.txt`. Each sequence
/// directory is staged under a temporary name and renamed into place.
void write_dataset(const std::filesystem::path& root, const Dataset& dataset);

struct LoadReport {
    std::vector<std::string> problems;  // one line per skipped sequence, with its path
};

/// strict: the first problem throws. Otherwise problem sequences are skipped
/// and listed in `report`.
Dataset load_dataset(const std::filesystem::path& root, bool strict = true, LoadReport* report = nullptr);

// Single-sequence file formats.
void write_pgm(const std::filesystem::path& path, std::size_t height, std::size_t width, const std::uint8_t* pixels);
std::vector<std::uint8_t> read_pgm(const std::filesystem::path& path, std::size_t& height, std::size_t& width);
void write_keypoints(const std::filesystem::path& path, const KeypointSequence& k);
KeypointSequence read_keypoints(const std::filesystem::path& path);

}  // namespace gait
