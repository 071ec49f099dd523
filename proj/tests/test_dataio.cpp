#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "gait/dataio.hpp"

using namespace gait;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("gait_dataio_test_" + name);
    fs::remove_all(p);
    return p;
}

template <class R>
bool in_range(double v, const R& r) {
    return v >= r[0] && v <= r[1];
}

}  // namespace

TEST(Identity, SameSeedSameWalker) {
    Rng a(11), b(11);
    WalkerIdentity x = gen_identity(a), y = gen_identity(b);
    EXPECT_EQ(x.femur, y.femur);
    EXPECT_EQ(x.period, y.period);
    EXPECT_EQ(x.phase, y.phase);
    EXPECT_EQ(identity_separation(x, y), 0.0);
}

TEST(Identity, HundredWalkersSeparatedAndInRange) {
    Rng rng(12);
    auto ws = gen_identities(100, rng);
    ASSERT_EQ(ws.size(), 100u);
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const auto& w = ws[i];
        EXPECT_TRUE(in_range(w.femur, WalkerRanges::femur));
        EXPECT_TRUE(in_range(w.tibia, WalkerRanges::tibia));
        EXPECT_TRUE(in_range(w.humerus, WalkerRanges::humerus));
        EXPECT_TRUE(in_range(w.forearm, WalkerRanges::forearm));
        EXPECT_TRUE(in_range(w.torso, WalkerRanges::torso));
        EXPECT_TRUE(in_range(w.body_width, WalkerRanges::body_width));
        EXPECT_TRUE(in_range(w.head_radius, WalkerRanges::head_radius));
        EXPECT_TRUE(in_range(w.amplitude, WalkerRanges::amplitude));
        EXPECT_GE(w.period, WalkerRanges::period[0]);
        EXPECT_LE(w.period, WalkerRanges::period[1]);
        for (std::size_t j = 0; j < i; ++j) EXPECT_GE(identity_separation(w, ws[j]), 0.15);
    }
}

TEST(Render, HipMidpointTracksTorsoCentroid) {
    Rng ids(13);
    auto walkers = gen_identities(4, ids);
    double worst = 0.0;
    for (const auto& w : walkers)
        for (int view : casia_views())
            for (Condition c : {Condition::NM, Condition::BG, Condition::CL}) {
                Rng rng(static_cast<std::uint64_t>(view) + 1);
                GaitSample s = render_sequence(w, view, c, 30, rng);
                const auto& sil = s.silhouettes;
                for (std::size_t t = 0; t < sil.frames; ++t) {
                    const double hip_x = 0.5 * (s.keypoints.x(t, kLeftHip) + s.keypoints.x(t, kRightHip));
                    const double hip_y = 0.5 * (s.keypoints.y(t, kLeftHip) + s.keypoints.y(t, kRightHip));
                    const double sho_y = 0.5 * (s.keypoints.y(t, kLeftShoulder) + s.keypoints.y(t, kRightShoulder));
                    // rows of the upper torso, above where the arms hang
                    const auto r0 = static_cast<std::size_t>(std::ceil(sho_y + 1));
                    const auto r1 = static_cast<std::size_t>(std::floor(sho_y + 0.5 * (hip_y - sho_y)));
                    double sum = 0.0, n = 0.0;
                    for (std::size_t r = r0; r <= r1; ++r)
                        for (std::size_t col = 0; col < sil.width; ++col)
                            if (sil.frame(t)[r * sil.width + col]) sum += col + 0.5, n += 1;
                    ASSERT_GT(n, 0.0);
                    worst = std::max(worst, std::abs(sum / n - hip_x));
                }
            }
    EXPECT_LE(worst, 2.0);
}

TEST(Render, OppositeViewsMirror) {
    Rng ids(14);
    WalkerIdentity w = gen_identity(ids);
    Rng ra(5), rb(5);
    GaitSample a = render_sequence(w, 0, Condition::NM, 20, ra), b = render_sequence(w, 180, Condition::NM, 20, rb);
    const auto& sa = a.silhouettes;
    std::size_t differ = 0, fg = 0;
    for (std::size_t t = 0; t < sa.frames; ++t)
        for (std::size_t r = 0; r < sa.height; ++r)
            for (std::size_t c = 0; c < sa.width; ++c) {
                const bool pa = sa.frame(t)[r * sa.width + c] != 0;
                const bool pb = b.silhouettes.frame(t)[r * sa.width + (sa.width - 1 - c)] != 0;
                fg += pa;
                differ += pa != pb;
            }
    EXPECT_GT(fg, 0u);
    EXPECT_LE(static_cast<double>(differ), 0.02 * static_cast<double>(fg));
}

TEST(Render, PeriodicGait) {
    Rng ids(15);
    WalkerIdentity w = gen_identity(ids);
    Rng rng(1);
    GaitSample s = render_sequence(w, 54, Condition::BG, 2 * w.period + 3, rng);
    EXPECT_EQ(w.period, static_cast<std::size_t>(std::lround(1.0 / w.frequency())));
    const auto& sil = s.silhouettes;
    const std::size_t plane = sil.height * sil.width;
    for (std::size_t t = 0; t + w.period < sil.frames; ++t) {
        EXPECT_TRUE(std::equal(sil.frame(t), sil.frame(t) + plane, sil.frame(t + w.period))) << t;
        EXPECT_EQ(s.keypoints.frames[t], s.keypoints.frames[t + w.period]) << t;
    }
    EXPECT_THROW(render_sequence(w, 360, Condition::NM, 4, rng), std::invalid_argument);
}

TEST(Dataset, CountsAndOrder) {
    DatasetSpec spec = fixture::tiny_spec(8, 2);
    spec.views = casia_views();
    spec.conditions = {Condition::NM, Condition::BG, Condition::CL};
    Dataset ds = generate_dataset(spec);
    EXPECT_EQ(ds.samples.size(), 528u);
    for (std::size_t i = 1; i < ds.samples.size(); ++i)
        EXPECT_LT(ds.samples[i - 1].info().id(), ds.samples[i].info().id());
    EXPECT_EQ(ds.select({"nm-01"}).size(), 88u);
    EXPECT_EQ(ds.select({"bg-02", "cl-01"}).size(), 176u);
    EXPECT_EQ(ds.samples.front().info().id(), "001-bg-01-000");
}

TEST(Dataset, SpecValidation) {
    DatasetSpec s;
    s.views = {0, 90, 400};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.views = {0, 90, 90};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.views = oumvlp_views();
    EXPECT_EQ(s.views.size(), 14u);
    EXPECT_NO_THROW(s.validate());
}

TEST(Dataset, WriteLoadRoundTrip) {
    DatasetSpec spec = fixture::tiny_spec(2, 5);
    spec.render.keypoint_jitter = 0.7;
    Dataset ds = generate_dataset(spec);
    const fs::path root = scratch("roundtrip");
    write_dataset(root, ds);
    EXPECT_TRUE(fs::exists(root / "manifest.txt"));
    Dataset back = load_dataset(root);
    ASSERT_EQ(back.samples.size(), ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const auto &a = ds.samples[i], &b = back.samples[i];
        EXPECT_EQ(a.info().id(), b.info().id());
        EXPECT_EQ(a.silhouettes.pixels, b.silhouettes.pixels);
        EXPECT_EQ(a.silhouettes.height, b.silhouettes.height);
        EXPECT_EQ(a.keypoints.frames, b.keypoints.frames);
    }
    EXPECT_EQ(back.spec.seed, spec.seed);
    EXPECT_EQ(back.spec.views, spec.views);
    fs::remove_all(root);
}

TEST(Dataset, MissingSidecar) {
    Dataset ds = generate_dataset(fixture::tiny_spec(2, 4));
    const fs::path root = scratch("sidecar");
    write_dataset(root, ds);
    const fs::path victim = root / "002" / "nm-01" / "090" / "keypoints.txt";
    ASSERT_TRUE(fs::exists(victim));
    fs::remove(victim);
    try {
        load_dataset(root, true);
        FAIL() << "strict load accepted a missing sidecar";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find(victim.string()), std::string::npos) << e.what();
    }
    LoadReport report;
    Dataset partial = load_dataset(root, false, &report);
    EXPECT_EQ(partial.samples.size(), ds.samples.size() - 1);
    ASSERT_EQ(report.problems.size(), 1u);
    EXPECT_NE(report.problems[0].find(victim.string()), std::string::npos);
    fs::remove_all(root);
}

TEST(Dataset, PgmRoundTrip) {
    const fs::path dir = scratch("pgm");
    fs::create_directories(dir);
    std::vector<std::uint8_t> px{0, 255, 7, 128, 1, 2};
    write_pgm(dir / "f.pgm", 2, 3, px.data());
    std::size_t h = 0, w = 0;
    EXPECT_EQ(read_pgm(dir / "f.pgm", h, w), px);
    EXPECT_EQ(h, 2u);
    EXPECT_EQ(w, 3u);
    fs::resize_file(dir / "f.pgm", fs::file_size(dir / "f.pgm") - 1);
    EXPECT_THROW(read_pgm(dir / "f.pgm", h, w), std::runtime_error);
    fs::remove_all(dir);
}
