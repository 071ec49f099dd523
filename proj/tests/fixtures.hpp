#pragma once

// Small datasets and models shared by the slower tests.

#include "gait/dataio.hpp"
#include "gait/eval.hpp"
#include "gait/model.hpp"
#include "gait/training.hpp"

namespace fixture {

inline gait::DatasetSpec tiny_spec(std::size_t identities = 4, std::size_t frames = 12) {
    gait::DatasetSpec s;
    s.identities = identities;
    s.views = {0, 90, 180};
    s.conditions = {gait::Condition::NM};
    s.seqs_per_cell = 2;
    s.frames = frames;
    s.render.height = 16;
    s.render.width = 16;
    s.seed = 3;
    return s;
}

inline gait::ModelConfig tiny_model() {
    gait::ModelConfig m;
    auto& b = m.backbone;
    b.in_height = 16, b.in_width = 16;
    b.stem_channels = 2, b.stem_pool = 1;
    b.channels = {2, 2}, b.pool_after = {};
    b.partitions = 2;
    m.clip_length = 3, m.pose_dim = 4, m.heads = 2, m.embed_dim = 3;
    return m;
}

inline gait::TrainConfig tiny_train(double lr = 1e-3) {
    gait::TrainConfig t;
    t.model = tiny_model();
    t.batch.identities = 2, t.batch.per_identity = 2, t.batch.crop = 6;
    t.adam.lr = lr;
    return t;
}

inline std::vector<const gait::GaitSample*> pool(const gait::Dataset& ds) {
    std::vector<const gait::GaitSample*> out;
    for (const auto& s : ds.samples) out.push_back(&s);
    return out;
}

/// A random gallery/probe split with embeddings drawn from a few integer
/// levels, so exact distance ties are common. Some gallery sequences are left
/// out to produce masked cells.
struct MicroSplit {
    gait::EvalSplit split;
    gait::EmbeddingStore store;
    std::vector<gait::Embedding> gallery, probe;
};

inline MicroSplit random_micro_split(gait::Rng& rng) {
    using gait::Condition;
    MicroSplit m;
    const auto all_views = gait::casia_views();
    std::vector<int> views;
    for (int v : all_views)
        if (rng.below(3) == 0) views.push_back(v);
    if (views.size() < 2) views = {all_views[rng.below(5)], all_views[5 + rng.below(6)]};
    const int identities = 2 + static_cast<int>(rng.below(4));
    const std::size_t heads = 1 + rng.below(3), dim = 1 + rng.below(3);
    const std::uint64_t levels = 2 + rng.below(3);
    m.store.heads = heads, m.store.dim = dim;
    auto embed = [&](const gait::SequenceInfo& info) {
        gait::Embedding e{info, std::vector<std::vector<double>>(heads, std::vector<double>(dim))};
        for (auto& h : e.heads)
            for (auto& v : h) v = static_cast<double>(rng.below(levels));
        m.store.items.push_back(e);
        return e;
    };
    for (int id = 1; id <= identities; ++id) {
        bool enrolled = false;
        for (std::size_t vi = 0; vi < views.size(); ++vi) {
            const bool last = vi + 1 == views.size();
            if (rng.below(6) == 0 && !(last && !enrolled)) continue;
            gait::SequenceInfo g{id, Condition::NM, 1, views[vi]};
            m.split.gallery.push_back(g);
            m.gallery.push_back(embed(g));
            enrolled = true;
        }
        for (int v : views)
            for (auto [c, seq] : {std::pair{Condition::NM, 2}, {Condition::BG, 1}, {Condition::CL, 2}}) {
                if (rng.below(4) == 0) continue;
                gait::SequenceInfo p{id, c, seq, v};
                m.split.probe.push_back(p);
                m.probe.push_back(embed(p));
            }
    }
    if (m.split.probe.empty()) {
        gait::SequenceInfo p{1, Condition::NM, 2, views[0]};
        m.split.probe.push_back(p);
        m.probe.push_back(embed(p));
    }
    return m;
}

}  // namespace fixture
