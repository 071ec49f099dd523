#include "gait/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gait/serialize.hpp"

namespace gait {

namespace fs = std::filesystem;

namespace {

constexpr double kMasked = std::numeric_limits<double>::quiet_NaN();

SequenceInfo parse_sequence_id(const std::string& id) {
    SequenceInfo info;
    char cond[8] = {};
    if (std::sscanf(id.c_str(), "%d-%2s-%d-%d", &info.identity, cond, &info.seq_num, &info.view) != 4) {
        throw std::runtime_error("bad sequence id '" + id + "'");
    }
    info.condition = parse_condition(cond);
    return info;
}

double mean_of_finite(const std::vector<double>& xs) {
    double s = 0.0;
    std::size_t n = 0;
    for (double x : xs)
        if (!std::isnan(x)) s += x, ++n;
    return n ? s / static_cast<double>(n) : kMasked;
}

}  // namespace

const Embedding* EmbeddingStore::find(const std::string& id) const {
    for (const auto& e : items)
        if (e.info.id() == id) return &e;
    return nullptr;
}

EmbeddingStore embed_set(const std::vector<const GaitSample*>& sequences, const ModelParams& params,
                         const ModelConfig& cfg) {
    EmbeddingStore store;
    store.heads = cfg.heads;
    store.dim = cfg.embed_dim;
    std::vector<Embedding> out(sequences.size());
    std::vector<char> ok(sequences.size(), 0);
    const long n = static_cast<long>(sequences.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
        const GaitSample& s = *sequences[static_cast<std::size_t>(i)];
        if (s.silhouettes.frames < cfg.clip_length) continue;
        NoGradGuard guard;
        EmbeddingSet set = model_forward(s, params, cfg);
        Embedding& e = out[static_cast<std::size_t>(i)];
        e.info = s.info();
        for (const auto& h : set) e.heads.emplace_back(h.data().begin(), h.data().end());
        ok[static_cast<std::size_t>(i)] = 1;
    }
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        if (ok[i]) {
            store.items.push_back(std::move(out[i]));
        } else {
            store.skipped.push_back(sequences[i]->info().id());
        }
    }
    return store;
}

double pairwise_distance(const Embedding& a, const Embedding& b) {
    if (a.heads.size() != b.heads.size()) {
        throw std::invalid_argument("pairwise_distance: " + std::to_string(a.heads.size()) + " heads vs " +
                                    std::to_string(b.heads.size()));
    }
    double total = 0.0;
    for (std::size_t c = 0; c < a.heads.size(); ++c) {
        const auto& x = a.heads[c];
        const auto& y = b.heads[c];
        if (x.size() != y.size()) throw std::invalid_argument("pairwise_distance: embedding width mismatch");
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
        total += std::sqrt(s);
    }
    return total;
}

void EvalSplit::validate() const {
    if (gallery.empty()) throw std::invalid_argument("eval split: gallery is empty");
    if (probe.empty()) throw std::invalid_argument("eval split: probe set is empty");
    std::set<std::string> gallery_ids;
    std::set<int> enrolled;
    for (const auto& g : gallery) {
        gallery_ids.insert(g.id());
        enrolled.insert(g.identity);
    }
    for (const auto& p : probe) {
        if (gallery_ids.count(p.id())) throw std::invalid_argument("eval split: " + p.id() + " is in both gallery and probe");
        if (!enrolled.count(p.identity)) {
            throw std::invalid_argument("eval split: probe identity " + std::to_string(p.identity) +
                                        " has no gallery sequence");
        }
    }
}

EvalSplit build_split(const Dataset& dataset, const std::vector<std::string>& gallery_selectors,
                      const std::vector<std::string>& probe_selectors) {
    EvalSplit split;
    for (const auto* s : dataset.select(gallery_selectors)) split.gallery.push_back(s->info());
    for (const auto* s : dataset.select(probe_selectors)) split.probe.push_back(s->info());
    split.validate();
    return split;
}

EvalReport rank1_matrix(const EvalSplit& split, const EmbeddingStore& embeddings) {
    split.validate();
    std::map<std::string, const Embedding*> by_id;
    for (const auto& e : embeddings.items) by_id[e.info.id()] = &e;

    // gallery grouped by view, each group sorted by id so the first minimum wins ties
    std::map<int, std::vector<const Embedding*>> gallery;
    std::set<int> gallery_views, probe_views;
    std::set<Condition> conditions;
    for (const auto& g : split.gallery) {
        gallery_views.insert(g.view);
        if (auto it = by_id.find(g.id()); it != by_id.end()) gallery[g.view].push_back(it->second);
    }
    for (auto& [view, list] : gallery)
        std::sort(list.begin(), list.end(), [](const Embedding* a, const Embedding* b) { return a->info.id() < b->info.id(); });
    std::vector<const Embedding*> probes;
    for (const auto& p : split.probe) {
        probe_views.insert(p.view);
        conditions.insert(p.condition);
        if (auto it = by_id.find(p.id()); it != by_id.end()) probes.push_back(it->second);
    }

    EvalReport r;
    r.conditions.assign(conditions.begin(), conditions.end());
    r.probe_views.assign(probe_views.begin(), probe_views.end());
    r.gallery_views.assign(gallery_views.begin(), gallery_views.end());
    const std::size_t nc = r.conditions.size(), npv = r.probe_views.size(), ngv = r.gallery_views.size();
    auto index_of = [](const auto& v, auto x) { return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin()); };

    // per probe and gallery view: 1 correct, 0 wrong, -1 no candidate
    std::vector<std::vector<int>> hit(probes.size(), std::vector<int>(ngv, -1));
    const long n = static_cast<long>(probes.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
        const Embedding& p = *probes[static_cast<std::size_t>(i)];
        for (std::size_t g = 0; g < ngv; ++g) {
            const int view = r.gallery_views[g];
            if (view == p.info.view) continue;
            auto it = gallery.find(view);
            if (it == gallery.end() || it->second.empty()) continue;
            const Embedding* best = nullptr;
            double best_d = 0.0;
            for (const Embedding* cand : it->second) {
                const double d = pairwise_distance(p, *cand);
                if (!best || d < best_d) best = cand, best_d = d;
            }
            hit[static_cast<std::size_t>(i)][g] = best->info.identity == p.info.identity ? 1 : 0;
        }
    }

    std::vector<std::vector<std::vector<std::size_t>>> correct(nc, std::vector<std::vector<std::size_t>>(npv, std::vector<std::size_t>(ngv, 0)));
    auto total = correct;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto c = index_of(r.conditions, probes[i]->info.condition);
        const auto pv = index_of(r.probe_views, probes[i]->info.view);
        for (std::size_t g = 0; g < ngv; ++g) {
            if (hit[i][g] < 0) continue;
            ++total[c][pv][g];
            correct[c][pv][g] += static_cast<std::size_t>(hit[i][g]);
        }
    }

    r.accuracy.assign(nc, std::vector<std::vector<double>>(npv, std::vector<double>(ngv, kMasked)));
    r.view_mean.assign(nc, std::vector<double>(npv, kMasked));
    r.mean.assign(nc, kMasked);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t pv = 0; pv < npv; ++pv) {
            for (std::size_t g = 0; g < ngv; ++g) {
                if (r.gallery_views[g] == r.probe_views[pv]) continue;
                if (total[c][pv][g] == 0) {
                    r.notes.push_back("masked " + condition_name(r.conditions[c]) + " probe view " +
                                      std::to_string(r.probe_views[pv]) + " gallery view " +
                                      std::to_string(r.gallery_views[g]) + ": no gallery or probe sequences");
                    continue;
                }
                r.accuracy[c][pv][g] =
                    static_cast<double>(correct[c][pv][g]) / static_cast<double>(total[c][pv][g]);
            }
            r.view_mean[c][pv] = mean_of_finite(r.accuracy[c][pv]);
        }
        r.mean[c] = mean_of_finite(r.view_mean[c]);
    }
    return r;
}

std::string render_report(const EvalReport& r, const std::string& method) {
    auto pct = [](double v) {
        if (std::isnan(v)) return std::string("-");
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
        return std::string(buf);
    };
    std::size_t label_width = 9;
    std::vector<std::string> labels;
    for (Condition c : r.conditions) {
        std::string label = method.empty() ? "" : method + " ";
        std::string name = condition_name(c);
        std::transform(name.begin(), name.end(), name.begin(), ::toupper);
        labels.push_back(label + name);
        label_width = std::max(label_width, labels.back().size());
    }
    std::ostringstream os;
    char cell[32];
    std::snprintf(cell, sizeof cell, "%-*s", static_cast<int>(label_width), "Probe");
    os << cell;
    for (int v : r.probe_views) {
        std::snprintf(cell, sizeof cell, " %6d", v);
        os << cell;
    }
    os << "   Mean\n";
    for (std::size_t c = 0; c < r.conditions.size(); ++c) {
        std::snprintf(cell, sizeof cell, "%-*s", static_cast<int>(label_width), labels[c].c_str());
        os << cell;
        for (double v : r.view_mean[c]) {
            std::snprintf(cell, sizeof cell, " %6s", pct(v).c_str());
            os << cell;
        }
        std::snprintf(cell, sizeof cell, " %6s", pct(r.mean[c]).c_str());
        os << cell << '\n';
    }
    return os.str();
}

std::string report_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "condition,probe_view,gallery_view,accuracy\n";
    char buf[32];
    for (std::size_t c = 0; c < r.conditions.size(); ++c)
        for (std::size_t pv = 0; pv < r.probe_views.size(); ++pv)
            for (std::size_t g = 0; g < r.gallery_views.size(); ++g) {
                const double a = r.accuracy[c][pv][g];
                if (std::isnan(a)) continue;
                std::snprintf(buf, sizeof buf, "%.17g", a);
                os << condition_name(r.conditions[c]) << ',' << r.probe_views[pv] << ',' << r.gallery_views[g] << ','
                   << buf << '\n';
            }
    return os.str();
}

void export_embeddings(const EmbeddingStore& store, const fs::path& dir) {
    fs::create_directories(dir);
    {
        std::ofstream bin(dir / "embeddings.bin", std::ios::binary | std::ios::trunc);
        if (!bin) throw std::runtime_error("cannot write " + (dir / "embeddings.bin").string());
        for (std::size_t i = 0; i < store.items.size(); ++i) {
            const auto& e = store.items[i];
            for (std::size_t c = 0; c < e.heads.size(); ++c) {
                write_u64(bin, i);
                write_u64(bin, c);
                for (double v : e.heads[c]) write_f64(bin, v);
            }
        }
    }
    std::ofstream txt(dir / "embeddings.txt", std::ios::trunc);
    if (!txt) throw std::runtime_error("cannot write " + (dir / "embeddings.txt").string());
    txt << "heads " << store.heads << "\ndim " << store.dim << "\nsequences " << store.items.size() << '\n';
    for (const auto& e : store.items) txt << e.info.id() << '\n';
    for (const auto& s : store.skipped) txt << "skipped " << s << '\n';
}

EmbeddingStore import_embeddings(const fs::path& dir) {
    std::ifstream txt(dir / "embeddings.txt");
    if (!txt) throw std::runtime_error("missing " + (dir / "embeddings.txt").string());
    EmbeddingStore store;
    std::string key;
    std::size_t count = 0;
    if (!(txt >> key >> store.heads) || key != "heads" || !(txt >> key >> store.dim) || key != "dim" ||
        !(txt >> key >> count) || key != "sequences") {
        throw std::runtime_error("malformed embedding manifest in " + dir.string());
    }
    std::string word;
    while (txt >> word) {
        if (word == "skipped") {
            txt >> word;
            store.skipped.push_back(word);
        } else {
            store.items.push_back({parse_sequence_id(word), {}});
        }
    }
    if (store.items.size() != count) throw std::runtime_error("embedding manifest lists the wrong number of sequences");
    std::ifstream bin(dir / "embeddings.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("missing " + (dir / "embeddings.bin").string());
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < store.heads; ++c) {
            if (read_u64(bin) != i || read_u64(bin) != c) throw std::runtime_error("embedding records out of order");
            std::vector<double> v(store.dim);
            for (auto& x : v) x = read_f64(bin);
            store.items[i].heads.push_back(std::move(v));
        }
    }
    if (bin.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing bytes in embeddings.bin");
    return store;
}

}  // namespace gait
