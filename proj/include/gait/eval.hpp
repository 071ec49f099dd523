#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "gait/dataio.hpp"
#include "gait/model.hpp"
#include "gait/sequence.hpp"

namespace gait {

/// C head embeddings of one sequence, detached to plain values.
struct Embedding {
    SequenceInfo info;
    std::vector<std::vector<double>> heads;  // C x d_e
};

struct EmbeddingStore {
    std::size_t heads = 0;
    std::size_t dim = 0;
    std::vector<Embedding> items;       // in input order, skipped sequences left out
    std::vector<std::string> skipped;   // ids of sequences shorter than L

    const Embedding* find(const std::string& id) const;
};

/// Full-length forward of every sequence without gradient tracking.
EmbeddingStore embed_set(const std::vector<const GaitSample*>& sequences, const ModelParams& params,
                         const ModelConfig& cfg);

/// Sum over heads of the per-head Euclidean distance.
double pairwise_distance(const Embedding& a, const Embedding& b);

struct EvalSplit {
    std::vector<SequenceInfo> gallery;
    std::vector<SequenceInfo> probe;

    /// Gallery and probe disjoint, every probe identity enrolled in the gallery.
    void validate() const;
};

EvalSplit build_split(const Dataset& dataset, const std::vector<std::string>& gallery_selectors,
                      const std::vector<std::string>& probe_selectors);

struct EvalReport {
    std::vector<Condition> conditions;  // probe conditions present
    std::vector<int> probe_views;
    std::vector<int> gallery_views;
    /// accuracy[c][pv][gv] in [0, 1]; NaN marks a masked cell (same view,
    /// empty gallery view or no probes).
    std::vector<std::vector<std::vector<double>>> accuracy;
    std::vector<std::vector<double>> view_mean;  // [c][pv] over unmasked cells
    std::vector<double> mean;                    // [c] over probe views with a mean
    std::vector<std::string> notes;              // masked cells other than the diagonal
};

/// For each probe and each gallery view other than the probe's own, the
/// nearest gallery sequence of that view predicts the identity. Ties go to
/// the smallest sequence id.
EvalReport rank1_matrix(const EvalSplit& split, const EmbeddingStore& embeddings);

/// Table with one row per condition and one column per probe view plus Mean,
/// as percentages with one decimal.
std::string render_report(const EvalReport& report, const std::string& method = "");

/// "condition,probe_view,gallery_view,accuracy" lines for every unmasked cell.
std::string report_csv(const EvalReport& report);

/// embeddings.bin holds per sequence and head a u64 sequence index, a u64 head
/// index and d_e doubles; embeddings.txt lists the sequence ids and sizes.
void export_embeddings(const EmbeddingStore& store, const std::filesystem::path& dir);
EmbeddingStore import_embeddings(const std::filesystem::path& dir);

}  // namespace gait
