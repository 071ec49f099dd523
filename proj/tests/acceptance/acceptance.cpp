// Checks the nine acceptance criteria and prints one PASS/FAIL line each.
// Exit status is 0 only when every selected criterion passes.
//
//   acceptance [--workdir DIR] [--only 1,2,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gait/attention.hpp"
#include "gait/backbone.hpp"
#include "gait/battery.hpp"
#include "gait/config.hpp"
#include "gait/eval.hpp"
#include "gait/fusion.hpp"
#include "gait/ops.hpp"
#include "gait/training.hpp"
#include "oracles.hpp"

using namespace gait;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kBatteryTolerance = 1e-5;
constexpr double kBatterySeconds = 120.0;
constexpr int kConvCases = 200;
constexpr double kConvTolerance = 1e-10;
constexpr double kMeanTolerance = 1e-12;
constexpr double kMaxProbeTolerance = 0.15;
constexpr int kMonotoneInputs = 100;
constexpr double kMonotoneSlack = 1e-12;
constexpr double kTaMeanTolerance = 1e-14;  // 1/L is not exact in binary
constexpr double kTaSumTolerance = 1e-12;
constexpr double kTripletTolerance = 1e-12;
constexpr int kMarginUlps = 2;  // averaging n copies of a non-dyadic margin rounds
constexpr std::size_t kMaxSteps = 2000;
constexpr double kTrainSeconds = 15 * 60;
constexpr double kNmThreshold = 0.90;
constexpr double kClThreshold = 0.75;
constexpr int kSeeds = 3;
constexpr int kMicroSplits = 30;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

// 1: gradient battery ----------------------------------------------------

Outcome gradient_battery() {
    auto checks = run_gradcheck_battery();
    double worst = 0.0, seconds = 0.0;
    std::string worst_name, failed;
    bool micro = false;
    for (const auto& c : checks) {
        seconds += c.seconds;
        micro |= c.name == "micro_model";
        if (c.max_rel_error >= worst) worst = c.max_rel_error, worst_name = c.name;
        if (!(c.max_rel_error < kBatteryTolerance)) failed += " " + c.name;
    }
    const bool pass = failed.empty() && micro && seconds < kBatterySeconds;
    std::string d = std::to_string(checks.size()) + " checks, worst " + fmt("%.2e", worst) + " (" + worst_name +
                    "), " + fmt("%.1f", seconds) + "s";
    if (!failed.empty()) d += "; failing:" + failed;
    if (!micro) d += "; micro model check missing";
    return {pass, d};
}

// 2: convolution oracle --------------------------------------------------

Outcome conv_oracle() {
    Rng rng(2024);
    double worst = 0.0;
    for (int i = 0; i < kConvCases; ++i) {
        const std::size_t ci = 1 + rng.below(3), co = 1 + rng.below(3);
        std::array<std::size_t, 3> k{}, pad{}, stride{}, extent{};
        for (int a = 0; a < 3; ++a) {
            k[a] = 1 + rng.below(3);
            stride[a] = 1 + rng.below(2);
            pad[a] = rng.below(k[a]);
            // pick an output length, then the input extent that yields it exactly
            const std::size_t out = 1 + rng.below(4);
            const std::size_t span = (out - 1) * stride[a] + k[a];
            if (span <= 2 * pad[a]) pad[a] = 0;
            extent[a] = span - 2 * pad[a];
        }
        Tensor in = oracle::random_tensor({ci, extent[0], extent[1], extent[2]}, rng);
        Tensor ker = oracle::random_tensor({co, ci, k[0], k[1], k[2]}, rng);
        Tensor bias = rng.below(2) ? oracle::random_tensor({co}, rng) : Tensor();
        Conv3dOptions o{pad, stride};
        auto want = oracle::conv3d(in, ker, bias, o);
        Tensor got = conv3d(in, ker, bias, o);
        if (got.numel() != want.size()) return {false, "case " + std::to_string(i) + ": output size differs"};
        for (std::size_t j = 0; j < want.size(); ++j) worst = std::max(worst, std::abs(got[j] - want[j]));
    }
    return {worst <= kConvTolerance, std::to_string(kConvCases) + " cases, max abs diff " + fmt("%.2e", worst)};
}

// 3: pooling identities --------------------------------------------------

Outcome pooling_identities() {
    Rng rng(33);
    double mean_err = 0.0;
    for (int i = 0; i < 20; ++i) {
        const std::size_t w = 1 + rng.below(9);
        Tensor x = oracle::random_tensor({2, 3, 2, w}, rng, 0.01, 3.0);
        Tensor s = spatial_gem(x, Tensor::scalar(1.0)), m = mean(x, 3);
        for (std::size_t j = 0; j < s.numel(); ++j) mean_err = std::max(mean_err, std::abs(s[j] - m[j]));
        Tensor f = oracle::random_tensor({1 + rng.below(6), 5}, rng, 0.01, 3.0);
        Tensor c = clip_gem(f, Tensor::scalar(1.0)), cm = mean(f, 0);
        for (std::size_t j = 0; j < c.numel(); ++j) mean_err = std::max(mean_err, std::abs(c[j] - cm[j]));
    }
    const double s64 = spatial_gem(Tensor::from({1, 1, 1, 4}, {1, 2, 3, 4}), Tensor::scalar(64.0)).item();
    const double c64 = clip_gem(Tensor::from({4, 1}, {1, 2, 3, 4}), Tensor::scalar(64.0)).item();
    const double max_err = std::max(std::abs(s64 - 4.0), std::abs(c64 - 4.0));

    const std::vector<double> ps{1, 1.25, 1.5, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64};
    int violations = 0;
    for (int i = 0; i < kMonotoneInputs; ++i) {
        Tensor row = oracle::random_tensor({1, 1, 1, 2 + rng.below(10)}, rng, 0.05, 5.0);
        Tensor col = reshape(row, {row.numel(), 1});
        double prev_s = -1, prev_c = -1;
        for (double p : ps) {
            const double s = spatial_gem(row, Tensor::scalar(p)).item();
            const double c = clip_gem(col, Tensor::scalar(p)).item();
            violations += s < prev_s - kMonotoneSlack;
            violations += c < prev_c - kMonotoneSlack;
            prev_s = s, prev_c = c;
        }
    }
    const bool pass = mean_err <= kMeanTolerance && max_err <= kMaxProbeTolerance && violations == 0;
    return {pass, "p=1 vs mean " + fmt("%.1e", mean_err) + ", p=64 on [1,2,3,4] off max by " + fmt("%.4f", max_err) +
                      ", " + std::to_string(violations) + " monotonicity violations on " +
                      std::to_string(kMonotoneInputs) + " inputs"};
}

// 4: temporal attention base case ----------------------------------------

Outcome ta_base_case() {
    Rng rng(44);
    double mean_err = 0.0, sum_err = 0.0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t d = 1 + rng.below(12), l = 1 + rng.below(12), s = 1 + rng.below(4);
        TAParams p = init_ta(d, 1 + rng.below(8), rng);
        ClipBatch clips = clip_split(oracle::random_tensor({s * l, d}, rng, -1, 1), l);
        Tensor agg = ta_aggregate(clips, p);
        Tensor means = mean(clips.clips, 1);
        for (std::size_t j = 0; j < agg.numel(); ++j) mean_err = std::max(mean_err, std::abs(agg[j] - means[j]));

        p.score2.weight = oracle::random_tensor(p.score2.weight.shape(), rng, -4, 4);
        p.score2.bias = oracle::random_tensor(p.score2.bias.shape(), rng);
        Tensor w = ta_weights(clips, p);
        for (std::size_t r = 0; r < s; ++r) {
            double total = 0;
            for (std::size_t c = 0; c < l; ++c) total += w[r * l + c];
            sum_err = std::max(sum_err, std::abs(total - 1.0));
        }
    }
    return {mean_err <= kTaMeanTolerance && sum_err <= kTaSumTolerance,
            "zero-init vs clip mean " + fmt("%.1e", mean_err) + ", weight sums off 1 by " + fmt("%.1e", sum_err)};
}

// 5: triplet oracle ------------------------------------------------------

Outcome triplet_oracle() {
    Rng rng(55);
    double worst = 0.0;
    int batches = 0;
    for (std::size_t P = 2; P <= 4; ++P)
        for (std::size_t K = 2; K <= 4; ++K)
            for (int rep = 0; rep < 5; ++rep) {
                const std::size_t heads = 1 + rng.below(3), dim = 1 + rng.below(6);
                std::vector<std::vector<std::vector<double>>> e;
                std::vector<int> ids;
                std::vector<EmbeddingSet> sets;
                for (std::size_t p = 0; p < P; ++p)
                    for (std::size_t k = 0; k < K; ++k) {
                        ids.push_back(static_cast<int>(p));
                        e.emplace_back();
                        EmbeddingSet s;
                        for (std::size_t c = 0; c < heads; ++c) {
                            Tensor t = oracle::random_tensor({1, dim}, rng, -1, 1);
                            e.back().emplace_back(t.data().begin(), t.data().end());
                            s.push_back(t);
                        }
                        sets.push_back(s);
                    }
                const double margin = rng.uniform(0.0, 2.0);
                const double got = triplet_loss(sets, ids, {margin}).loss.item();
                worst = std::max(worst, std::abs(got - oracle::triplet_loss(e, ids, margin)));
                ++batches;
            }

    bool dyadic_exact = true;
    double margin_ulps = 0.0;
    for (double margin : {0.25, 0.5, 1.0, 0.2, 0.3, 0.1}) {
        std::vector<EmbeddingSet> same(8, EmbeddingSet(2, Tensor::full({1, 4}, 0.37)));
        const double loss = triplet_loss(same, {0, 0, 1, 1, 2, 2, 3, 3}, {margin}).loss.item();
        const double ulps = std::abs(loss - margin) / (std::nextafter(margin, 2.0) - margin);
        if (margin == 0.25 || margin == 0.5 || margin == 1.0) dyadic_exact &= loss == margin;
        margin_ulps = std::max(margin_ulps, ulps);
    }
    const bool pass = worst <= kTripletTolerance && dyadic_exact && margin_ulps <= kMarginUlps;
    return {pass, std::to_string(batches) + " batches up to P=4,K=4, max diff " + fmt("%.1e", worst) +
                      "; all-equal loss " + (dyadic_exact ? "exact" : "NOT exact") + " for dyadic margins, within " +
                      fmt("%.0f", margin_ulps) + " ulp otherwise"};
}

// 6: shape contracts -----------------------------------------------------

Outcome shape_contracts() {
    Rng rng(66);
    int bad = 0, configs = 0;
    for (int i = 0; i < 25; ++i) {
        const std::size_t c1 = 1 + rng.below(3), c2 = 1 + rng.below(4), t = 1 + rng.below(4);
        const std::size_t m = 1 + rng.below(3), h = m * (1 + rng.below(3)), w = 1 + rng.below(5);
        GLConvParams p{init_conv(c2, c1, 3, 3, 3, rng), init_conv(c2, c1, 3, 3, 3, rng)};
        Tensor x = oracle::random_tensor({c1, t, h, w}, rng);
        bad += glconv_a(x, p, m).shape() != Shape{c2, t, h, w};
        bad += glconv_b(x, p, m).shape() != Shape{c2, t, 2 * h, w};
        ++configs;
    }
    int split_bad = 0, pairs = 0;
    for (std::size_t T = 1; T <= 64; ++T) {
        Tensor x = Tensor::zeros({T, 2});
        for (std::size_t L = 1; L <= T; ++L) {
            ClipBatch b = clip_split(x, L);
            split_bad += b.count() != T / L || b.length() != L || b.dropped != T % L;
            ++pairs;
        }
    }
    return {bad == 0 && split_bad == 0, std::to_string(configs) + " GLConv configs (" + std::to_string(bad) +
                                            " wrong), " + std::to_string(pairs) + " (T, L) pairs (" +
                                            std::to_string(split_bad) + " wrong)"};
}

// 7 and 8: end-to-end runs through the command-line tool -----------------

struct Cli {
    fs::path work;
    fs::path config = fs::path(GAIT_CONFIG_DIR) / "desk.conf";

    std::string base() const {
        return std::string(GAITTAKE_BIN) + " %s --config " + config.string() + " --set data.root=" +
               (work / "data").string() + " --workers 1";
    }

    // Runs one subcommand, logging to <work>/<log>.log. Returns wall seconds, or -1 on failure.
    double run(const std::string& sub, const std::string& args, const std::string& log) const {
        char head[512];
        std::snprintf(head, sizeof head, base().c_str(), sub.c_str());
        const fs::path log_path = work / (log + ".log");
        const std::string cmd = std::string(head) + " " + args + " > " + log_path.string() + " 2>&1";
        const auto t0 = std::chrono::steady_clock::now();
        const int status = std::system(cmd.c_str());
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (status != 0) {
            std::cerr << "command failed (" << status << "): " << cmd << '\n' << slurp(log_path);
            return -1;
        }
        return s;
    }
};

// Mean over probe views of the mean over gallery views, per condition.
std::map<std::string, double> condition_means(const fs::path& csv) {
    std::ifstream is(csv);
    std::string line;
    std::getline(is, line);
    std::map<std::string, std::map<int, std::vector<double>>> cells;
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string cond, pv, gv, acc;
        std::getline(ss, cond, ','), std::getline(ss, pv, ','), std::getline(ss, gv, ','), std::getline(ss, acc);
        if (pv == gv) return {};  // a same-view cell must never appear
        cells[cond][std::stoi(pv)].push_back(std::stod(acc));
    }
    std::map<std::string, double> out;
    for (const auto& [cond, views] : cells) {
        double total = 0;
        for (const auto& [v, accs] : views) {
            double s = 0;
            for (double a : accs) s += a;
            total += s / static_cast<double>(accs.size());
        }
        out[cond] = total / static_cast<double>(views.size());
    }
    return out;
}

std::size_t configured_steps(const fs::path& config) {
    RunConfig cfg = load_config(config);
    return cfg.steps;
}

Outcome desk_experiment(const Cli& cli) {
    if (cli.run("gen-data", "--seed 1 --force", "gen-data") < 0) return {false, "gen-data failed"};
    const std::size_t steps = configured_steps(cli.config);
    double nm = 0, cl = 0, cl_ablated = 0, slowest = 0;
    std::string per_seed;
    for (int seed = 1; seed <= kSeeds; ++seed) {
        for (bool ablated : {false, true}) {
            const std::string name = (ablated ? "ablated_" : "full_") + std::to_string(seed);
            const std::string args = "--seed " + std::to_string(seed) + " --out " + (cli.work / name).string() +
                                     (ablated ? " --set model.pose_branch=false" : "");
            const double secs = cli.run("train", args, "train_" + name);
            if (secs < 0) return {false, "training " + name + " failed"};
            slowest = std::max(slowest, secs);
            if (cli.run("eval", args, "eval_" + name) < 0) return {false, "eval " + name + " failed"};
            auto means = condition_means(cli.work / name / "report.csv");
            if (!means.count("nm") || !means.count("cl")) return {false, name + ": report lacks NM or CL rows"};
            if (ablated) {
                cl_ablated += means["cl"] / kSeeds;
            } else {
                nm += means["nm"] / kSeeds;
                cl += means["cl"] / kSeeds;
                per_seed += " s" + std::to_string(seed) + " NM " + fmt("%.1f", 100 * means["nm"]) + " BG " +
                            fmt("%.1f", 100 * means["bg"]) + " CL " + fmt("%.1f", 100 * means["cl"]) + ";";
            }
            std::cerr << name << ": NM " << 100 * means["nm"] << " BG " << 100 * means["bg"] << " CL "
                      << 100 * means["cl"] << " (" << secs << "s)\n";
        }
    }
    const bool pass = steps <= kMaxSteps && slowest <= kTrainSeconds && nm >= kNmThreshold && cl >= kClThreshold &&
                      cl >= cl_ablated;
    return {pass, "3-seed mean NM " + fmt("%.1f", 100 * nm) + " CL " + fmt("%.1f", 100 * cl) + ", ablated CL " +
                      fmt("%.1f", 100 * cl_ablated) + ";" + per_seed + " " + std::to_string(steps) +
                      " steps, slowest run " + fmt("%.0f", slowest) + "s"};
}

Outcome determinism(const Cli& cli) {
    const fs::path ref = cli.work / "full_1";
    if (!fs::exists(ref / "checkpoint" / "state.bin") || !fs::exists(ref / "report.csv")) {
        return {false, "reference run of seed 1 missing (criterion 7 must run first)"};
    }
    const std::string steps = std::to_string(configured_steps(cli.config));
    const fs::path again = cli.work / "rerun_1", resumed = cli.work / "resumed_1";
    fs::remove_all(again), fs::remove_all(resumed);

    const std::string rerun_args = "--seed 1 --out " + again.string();
    if (cli.run("train", rerun_args, "train_rerun_1") < 0 || cli.run("eval", rerun_args, "eval_rerun_1") < 0) {
        return {false, "rerun failed"};
    }
    const std::string half = std::to_string(configured_steps(cli.config) / 2);
    const std::string res_args = "--seed 1 --out " + resumed.string();
    if (cli.run("train", res_args + " --set train.steps=" + half, "train_resumed_1a") < 0 ||
        cli.run("train", res_args + " --set train.steps=" + steps + " --resume", "train_resumed_1b") < 0 ||
        cli.run("eval", res_args, "eval_resumed_1") < 0) {
        return {false, "interrupted run failed"};
    }
    std::vector<std::string> differ;
    auto same = [&](const fs::path& a, const fs::path& b, const std::string& what) {
        if (!fs::exists(a) || !fs::exists(b) || slurp(a) != slurp(b)) differ.push_back(what);
    };
    for (const auto& [dir, tag] : {std::pair{again, "rerun"}, {resumed, "resume"}}) {
        same(ref / "checkpoint" / "state.bin", dir / "checkpoint" / "state.bin", std::string(tag) + " state.bin");
        same(ref / "checkpoint" / "manifest.txt", dir / "checkpoint" / "manifest.txt", std::string(tag) + " manifest");
        same(ref / "report.csv", dir / "report.csv", std::string(tag) + " report.csv");
        same(ref / "report.txt", dir / "report.txt", std::string(tag) + " report.txt");
        same(ref / "embeddings" / "embeddings.bin", dir / "embeddings" / "embeddings.bin",
             std::string(tag) + " embeddings");
    }
    std::string d = "rerun and resume-at-step-" + half + " runs byte-identical to the reference";
    if (!differ.empty()) {
        d = "differs:";
        for (const auto& s : differ) d += " " + s;
    }
    return {differ.empty(), d};
}

// 9: protocol correctness ------------------------------------------------

Outcome protocol() {
    Rng rng(99);
    int mismatches = 0, diagonal = 0, mean_errors = 0, cells = 0;
    for (int i = 0; i < kMicroSplits; ++i) {
        auto m = fixture::random_micro_split(rng);
        EvalReport r = rank1_matrix(m.split, m.store);
        auto want = oracle::rank1(m.gallery, m.probe);
        std::size_t seen = 0;
        for (std::size_t c = 0; c < r.conditions.size(); ++c) {
            std::vector<double> view_means;
            for (std::size_t pv = 0; pv < r.probe_views.size(); ++pv) {
                double sum = 0;
                int n = 0;
                for (std::size_t gv = 0; gv < r.gallery_views.size(); ++gv) {
                    const double got = r.accuracy[c][pv][gv];
                    if (r.probe_views[pv] == r.gallery_views[gv]) {
                        diagonal += !std::isnan(got);
                        continue;
                    }
                    auto it = want.find({r.conditions[c], r.probe_views[pv], r.gallery_views[gv]});
                    if (it == want.end()) {
                        mismatches += !std::isnan(got);
                        continue;
                    }
                    ++seen, ++cells;
                    const double expect =
                        static_cast<double>(it->second.correct) / static_cast<double>(it->second.total);
                    mismatches += got != expect;
                    sum += expect, ++n;
                }
                const double vm = n ? sum / n : std::nan("");
                mean_errors += !(std::isnan(vm) ? std::isnan(r.view_mean[c][pv]) : vm == r.view_mean[c][pv]);
                if (n) view_means.push_back(vm);
            }
            double total = 0;
            for (double v : view_means) total += v;
            const double cm = view_means.empty() ? std::nan("") : total / static_cast<double>(view_means.size());
            mean_errors += !(std::isnan(cm) ? std::isnan(r.mean[c]) : cm == r.mean[c]);
        }
        mismatches += seen != want.size();
    }
    const bool pass = mismatches == 0 && diagonal == 0 && mean_errors == 0;
    return {pass, std::to_string(kMicroSplits) + " splits, " + std::to_string(cells) + " cells: " +
                      std::to_string(mismatches) + " mismatches, " + std::to_string(diagonal) +
                      " same-view cells filled, " + std::to_string(mean_errors) + " wrong means"};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work = fs::current_path() / "acceptance_work";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--workdir" && i + 1 < argc) {
            work = argv[++i];
        } else if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string item;
            while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
        } else {
            std::cerr << "usage: acceptance [--workdir DIR] [--only 1,2,...]\n";
            return 2;
        }
    }
    fs::create_directories(work);
    Cli cli{fs::absolute(work)};

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient battery", gradient_battery},
        {"convolution oracle", conv_oracle},
        {"pooling identities", pooling_identities},
        {"temporal attention base case", ta_base_case},
        {"triplet loss oracle", triplet_oracle},
        {"shape contracts", shape_contracts},
        {"end-to-end desk experiment", [&] { return desk_experiment(cli); }},
        {"determinism and resume", [&] { return determinism(cli); }},
        {"protocol correctness", protocol},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(n)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all &= o.pass;
        std::printf("criterion %d %s: %s  [%s]\n", n, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
