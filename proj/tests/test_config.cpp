#include <gtest/gtest.h>

#include <sstream>

#include "gait/config.hpp"

using namespace gait;

TEST(Config, DefaultsDescribeStandardDataset) {
    RunConfig cfg;
    EXPECT_EQ(cfg.data.identities, 8u);
    EXPECT_EQ(cfg.data.views.size(), 11u);
    EXPECT_EQ(cfg.data.conditions.size(), 3u);
    EXPECT_EQ(cfg.data.seqs_per_cell, 2u);
    EXPECT_EQ(cfg.data.frames, 40u);
    EXPECT_EQ(cfg.train.batch.size(), 64u);
}

TEST(Config, ParsesSectionsAndComments) {
    std::istringstream is(R"(# desk run
[data]
identities = 6   # fewer walkers
views = 0, 90, 180
conditions = nm, cl
height = 32
width = 24

[model]
channels = 4, 8
pose_branch = false

[train]
P = 3
lr = 0.0005
sequences = nm-01, cl-01

[eval]
probe = nm-02, cl-02

[run]
seed = 42
out = somewhere
)");
    RunConfig cfg = parse_config(is);
    EXPECT_EQ(cfg.data.identities, 6u);
    EXPECT_EQ(cfg.data.views, (std::vector<int>{0, 90, 180}));
    EXPECT_EQ(cfg.data.conditions, (std::vector<Condition>{Condition::NM, Condition::CL}));
    EXPECT_EQ(cfg.train.model.backbone.in_height, 32u);
    EXPECT_EQ(cfg.train.model.backbone.in_width, 24u);
    EXPECT_EQ(cfg.train.model.backbone.channels, (std::vector<std::size_t>{4, 8}));
    EXPECT_FALSE(cfg.train.model.pose_branch);
    EXPECT_EQ(cfg.train.batch.identities, 3u);
    EXPECT_EQ(cfg.train.adam.lr, 0.0005);
    EXPECT_EQ(cfg.train_sequences, (std::vector<std::string>{"nm-01", "cl-01"}));
    EXPECT_EQ(cfg.probe, (std::vector<std::string>{"nm-02", "cl-02"}));
    EXPECT_EQ(cfg.seed, 42u);
    EXPECT_EQ(cfg.out, "somewhere");
}

TEST(Config, NamedViewSets) {
    RunConfig cfg;
    apply_setting(cfg, "data.views", "oumvlp");
    EXPECT_EQ(cfg.data.views.size(), 14u);
    apply_setting(cfg, "data.views", "casia");
    EXPECT_EQ(cfg.data.views.size(), 11u);
}

TEST(Config, RejectsMistakesWithLocation) {
    auto fails = [](const std::string& text, const std::string& fragment) {
        std::istringstream is(text);
        try {
            parse_config(is, "cfg");
            ADD_FAILURE() << "accepted: " << text;
        } catch (const std::invalid_argument& e) {
            EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
        }
    };
    fails("[data]\nidentitys = 3\n", "cfg:2");
    fails("[data]\nidentities = 3\nidentities = 4\n", "duplicate");
    fails("identities = 3\n", "outside any section");
    fails("[nope]\n", "unknown section");
    fails("[train]\nlr = fast\n", "train.lr");
    fails("[model]\nstem_kernel = 1, 3\n", "three");
    fails("[train]\nsequences = nm01\n", "nm01");
}

TEST(Config, DumpParsesBackToSameText) {
    RunConfig cfg;
    apply_setting(cfg, "train.lr", "0.0003");
    apply_setting(cfg, "data.views", "0, 45, 90");
    apply_setting(cfg, "model.learn_p_c", "true");
    const std::string text = dump_config(cfg);
    std::istringstream is(text);
    EXPECT_EQ(dump_config(parse_config(is)), text);
}

TEST(Config, ValidateCatchesInconsistencies) {
    RunConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    RunConfig a = cfg;
    a.train.batch.identities = 9;
    EXPECT_THROW(a.validate(), std::invalid_argument);
    RunConfig b = cfg;
    b.gallery = {"nm-02"};
    EXPECT_THROW(b.validate(), std::invalid_argument);
    RunConfig c = cfg;
    c.data.render.height = 32;  // model input not synced
    EXPECT_THROW(c.validate(), std::invalid_argument);
    RunConfig d = cfg;
    apply_setting(d, "data.views", "0, 400");
    EXPECT_THROW(d.validate(), std::invalid_argument);
}
