#include "gait/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "gait/ops.hpp"

namespace gait {

void BatchSpec::validate(std::size_t clip_length) const {
    if (identities < 2) throw std::invalid_argument("batch: P must be >= 2, got " + std::to_string(identities));
    if (per_identity < 2) throw std::invalid_argument("batch: K must be >= 2, got " + std::to_string(per_identity));
    if (crop < clip_length) {
        throw std::invalid_argument("batch: crop length " + std::to_string(crop) + " is shorter than clip length " +
                                    std::to_string(clip_length));
    }
}

namespace {

// First k entries of a Fisher-Yates shuffle of v.
template <class T>
void partial_shuffle(std::vector<T>& v, std::size_t k, Rng& rng) {
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(v.size() - i);
        std::swap(v[i], v[j]);
    }
}

}  // namespace

std::vector<BatchItem> sample_batch(const std::vector<const GaitSample*>& pool, const BatchSpec& spec, Rng& rng) {
    std::map<int, std::vector<const GaitSample*>> by_identity;
    for (const auto* s : pool) by_identity[s->info().identity].push_back(s);
    std::vector<int> eligible;
    for (const auto& [id, seqs] : by_identity)
        if (seqs.size() >= spec.per_identity) eligible.push_back(id);
    if (eligible.size() < spec.identities) {
        throw std::invalid_argument("sample_batch: need " + std::to_string(spec.identities) + " identities with >= " +
                                    std::to_string(spec.per_identity) + " sequences each, found " +
                                    std::to_string(eligible.size()) + " (of " + std::to_string(by_identity.size()) +
                                    " identities)");
    }
    partial_shuffle(eligible, spec.identities, rng);
    std::vector<BatchItem> batch;
    batch.reserve(spec.size());
    for (std::size_t p = 0; p < spec.identities; ++p) {
        auto seqs = by_identity[eligible[p]];
        partial_shuffle(seqs, spec.per_identity, rng);
        for (std::size_t k = 0; k < spec.per_identity; ++k) {
            const GaitSample& s = *seqs[k];
            const std::size_t t = s.silhouettes.frames;
            const std::size_t start = t > spec.crop ? rng.below(t - spec.crop + 1) : (t < spec.crop ? rng.below(t) : 0);
            batch.push_back({s.window(start, spec.crop), eligible[p]});
        }
    }
    return batch;
}

TripletResult triplet_loss(const std::vector<EmbeddingSet>& embeddings, const std::vector<int>& identities,
                           const TripletConfig& cfg) {
    const std::size_t n = embeddings.size();
    if (n == 0 || identities.size() != n) throw std::invalid_argument("triplet_loss: embeddings/labels mismatch");
    if (cfg.margin < 0.0) throw std::invalid_argument("triplet_loss: margin must be non-negative");
    const std::size_t heads = embeddings[0].size();
    for (const auto& e : embeddings)
        if (e.size() != heads) throw std::invalid_argument("triplet_loss: items disagree on head count");
    if (std::all_of(identities.begin(), identities.end(), [&](int id) { return id == identities[0]; })) {
        throw std::invalid_argument("triplet_loss: batch needs at least two identities");
    }

    // Row-normalized positive / negative weight matrices (uniform w_p, w_n).
    // An anchor without positives gets all-zero weights and zero margin.
    std::vector<double> wp(n * n, 0.0), wn(n * n, 0.0), margin_vec(n, cfg.margin);
    std::size_t empty = 0;
    for (std::size_t a = 0; a < n; ++a) {
        std::size_t np = 0, nn = 0;
        for (std::size_t b = 0; b < n; ++b) {
            if (b != a) (identities[b] == identities[a] ? np : nn)++;
        }
        if (np == 0) {
            ++empty;
            margin_vec[a] = 0.0;
            continue;
        }
        for (std::size_t b = 0; b < n; ++b) {
            if (b == a) continue;
            if (identities[b] == identities[a]) {
                wp[a * n + b] = 1.0 / static_cast<double>(np);
            } else {
                wn[a * n + b] = 1.0 / static_cast<double>(nn);
            }
        }
    }
    Tensor pos_w = Tensor::from({n, n}, wp), neg_w = Tensor::from({n, n}, wn);
    Tensor margins = Tensor::from({n}, margin_vec);

    Tensor total;
    std::size_t active = 0;
    for (std::size_t h = 0; h < heads; ++h) {
        std::vector<Tensor> rows;
        rows.reserve(n);
        for (const auto& e : embeddings) rows.push_back(e[h]);
        Tensor dist = pairwise_euclidean(concat(rows, 0));
        Tensor hinge = relu(add(margins, sub(sum(mul(dist, pos_w), 1), sum(mul(dist, neg_w), 1))));
        for (double v : hinge.data()) active += v > 0.0;
        Tensor head_sum = sum_all(hinge);
        total = total.defined() ? add(total, head_sum) : head_sum;
    }
    TripletResult r;
    r.loss = scale(total, 1.0 / static_cast<double>(heads * n));
    r.active_fraction = static_cast<double>(active) / static_cast<double>(heads * n);
    r.empty_positive_sets = empty * heads;
    return r;
}

TrainState init_train_state(const ModelConfig& cfg, std::uint64_t seed) {
    Rng init = Rng::stream(seed, "init");
    TrainState s;
    s.params = init_model(cfg, init);
    for (const auto& [name, t] : s.params.trainable()) {
        s.adam_m.push_back(Tensor::zeros(t.shape()));
        s.adam_v.push_back(Tensor::zeros(t.shape()));
    }
    s.rng = Rng::stream(seed, "sampling");
    return s;
}

StepMetrics train_step(TrainState& state, const std::vector<BatchItem>& batch, const TrainConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    auto params = state.params.trainable();
    if (params.size() != state.adam_m.size()) throw std::logic_error("train_step: optimizer state does not match model");
    for (auto& [name, t] : params) t.zero_grad();

    std::vector<EmbeddingSet> embeddings;
    std::vector<int> labels;
    embeddings.reserve(batch.size());
    for (const auto& item : batch) {
        embeddings.push_back(model_forward(item.sample, state.params, cfg.model));
        labels.push_back(item.identity);
    }
    TripletResult tl = triplet_loss(embeddings, labels, cfg.triplet);
    const double loss = tl.loss.item();
    const std::uint64_t step_index = state.step + 1;
    if (!std::isfinite(loss)) {
        throw std::runtime_error("non-finite loss at step " + std::to_string(step_index) + " (block: loss)");
    }
    tl.loss.backward();
    embeddings.clear();
    tl.loss = Tensor();

    double sq = 0.0;
    for (auto& [name, t] : params) {
        for (double g : t.grad()) {
            if (!std::isfinite(g)) {
                throw std::runtime_error("non-finite gradient at step " + std::to_string(step_index) + " in " + name);
            }
            sq += g * g;
        }
    }

    const double b1 = cfg.adam.beta1, b2 = cfg.adam.beta2;
    const double t = static_cast<double>(step_index);
    const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto w = params[k].second.mutable_data();
        auto g = params[k].second.grad();
        auto m = state.adam_m[k].mutable_data();
        auto v = state.adam_v[k].mutable_data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double update = cfg.adam.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adam.eps);
            w[i] -= update;
        }
    }
    // GeM exponents must stay in their domain
    for (Tensor* p : {&state.params.backbone.p_s, &state.params.head.p_c}) {
        if (p->requires_grad() && p->item() < 1.0) p->mutable_data()[0] = 1.0;
    }
    state.step = step_index;

    StepMetrics m;
    m.step = step_index;
    m.loss = loss;
    m.active_fraction = tl.active_fraction;
    m.grad_norm = std::sqrt(sq);
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return m;
}

}  // namespace gait
