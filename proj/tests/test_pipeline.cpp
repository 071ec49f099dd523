#include <gtest/gtest.h>

#include <numeric>

#include "fixtures.hpp"
#include "gait/eval.hpp"
#include "gait/training.hpp"

using namespace gait;

namespace {

double nm_rank1(const Dataset& ds, const ModelParams& params, const ModelConfig& cfg) {
    EvalSplit split = build_split(ds, {"nm-01"}, {"nm-02"});
    EvalReport r = rank1_matrix(split, embed_set(fixture::pool(ds), params, cfg));
    return r.mean[0];
}

}  // namespace

TEST(Pipeline, TwoHundredStepsOnDefaultDataReduceLoss) {
    DatasetSpec spec;  // 8 identities, 11 views, 3 conditions, 2 per cell, 40 frames
    Dataset ds = generate_dataset(spec);
    ASSERT_EQ(ds.samples.size(), 528u);
    TrainConfig cfg;
    cfg.model.backbone.stem_channels = 2, cfg.model.backbone.channels = {2, 2};
    cfg.model.pose_dim = 16, cfg.model.heads = 2, cfg.model.embed_dim = 16;
    cfg.batch = {4, 4, 30};
    cfg.adam.lr = 3e-4;
    TrainState st = init_train_state(cfg.model, 1);
    auto pool = ds.select({"nm-01", "bg-01", "cl-01"});
    std::vector<double> losses;
    for (int i = 0; i < 200; ++i) losses.push_back(train_step(st, sample_batch(pool, cfg.batch, st.rng), cfg).loss);
    // single batches are noisy; compare the first and last twenty
    const double head = std::accumulate(losses.begin(), losses.begin() + 20, 0.0);
    const double tail = std::accumulate(losses.end() - 20, losses.end(), 0.0);
    EXPECT_LT(tail, head);
}

TEST(Pipeline, OverfitMicroModelIsPerfectOnItsIdentities) {
    Dataset ds = generate_dataset(fixture::tiny_spec(4, 12));
    TrainConfig cfg = fixture::tiny_train(3e-3);
    cfg.batch = {4, 2, 6};
    TrainState st = init_train_state(cfg.model, 2);
    const double before = nm_rank1(ds, st.params, cfg.model);
    auto pool = fixture::pool(ds);
    for (int i = 0; i < 400; ++i) train_step(st, sample_batch(pool, cfg.batch, st.rng), cfg);
    const double after = nm_rank1(ds, st.params, cfg.model);
    EXPECT_EQ(after, 1.0);
    // random conv features of body shape already beat chance, so the
    // untrained model is only required to be worse
    EXPECT_LT(before, after);
}
