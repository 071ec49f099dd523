#include "gait/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "gait/battery.hpp"
#include "gait/checkpoint.hpp"
#include "gait/eval.hpp"
#include "gait/kernels.hpp"

namespace gait {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        os << text;
        if (!os) throw std::runtime_error("short write to " + path.string());
    }
    fs::rename(tmp, path);
}

// Every identity in the pool needs K sequences and the pool P identities.
void check_pool(const std::vector<const GaitSample*>& pool, const BatchSpec& spec) {
    std::map<int, std::size_t> per_identity;
    for (const auto* s : pool) ++per_identity[s->info().identity];
    std::size_t usable = 0;
    for (const auto& [id, n] : per_identity) usable += n >= spec.per_identity;
    if (usable < spec.identities) {
        throw std::invalid_argument("training pool has " + std::to_string(usable) + " identities with at least K=" +
                                    std::to_string(spec.per_identity) + " sequences; P=" +
                                    std::to_string(spec.identities) + " are required");
    }
}

// Drops rows logged after the checkpoint a resumed run restarts from.
void trim_metrics(const fs::path& path, std::uint64_t step) {
    std::ifstream is(path);
    std::string text, line;
    if (!std::getline(is, line)) {
        write_text(path, "step,loss,active,gradnorm,wall\n");
        return;
    }
    text = line + '\n';
    while (std::getline(is, line))
        if (!line.empty() && std::stoull(line.substr(0, line.find(','))) <= step) text += line + '\n';
    is.close();
    write_text(path, text);
}

std::string format_metrics(const StepMetrics& m) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,%.6f\n", static_cast<unsigned long long>(m.step), m.loss,
                  m.active_fraction, m.grad_norm, m.seconds);
    return buf;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int cmd_gen_data(const RunConfig& cfg, bool force, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        const fs::path& root = cfg.data_root;
        if (fs::exists(root) && !fs::is_empty(root)) {
            if (!force) throw std::runtime_error("dataset root " + root.string() + " is not empty (use --force)");
            fs::remove_all(root);
        }
        kernels::set_workers(cfg.workers);
        DatasetSpec spec = cfg.data;
        spec.seed = cfg.seed;
        Dataset ds = generate_dataset(spec);
        write_dataset(root, ds);
        out << "wrote " << ds.samples.size() << " sequences to " << root.string() << ": " << spec.identities
            << " identities x " << spec.views.size() << " views x " << spec.conditions.size() << " conditions x "
            << spec.seqs_per_cell << " sequences, " << spec.frames << " frames of " << spec.render.height << "x"
            << spec.render.width << ", seed " << spec.seed << '\n';
        return 0;
    });
}

int cmd_train(const RunConfig& cfg, bool resume, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        kernels::set_workers(cfg.workers);
        Dataset ds = load_dataset(cfg.data_root, true);
        auto pool = ds.select(cfg.train_sequences);
        check_pool(pool, cfg.train.batch);

        const fs::path ckpt = cfg.out / "checkpoint";
        const fs::path metrics_path = cfg.out / "metrics.csv";
        TrainState state;
        if (resume) {
            state = checkpoint_load(ckpt, cfg.train.model);
            out << "resuming from step " << state.step << '\n';
            trim_metrics(metrics_path, state.step);
        } else {
            fs::create_directories(cfg.out);
            state = init_train_state(cfg.train.model, cfg.seed);
            write_text(metrics_path, "step,loss,active,gradnorm,wall\n");
        }
        write_text(cfg.out / "config.txt", dump_config(cfg));

        std::ofstream metrics(metrics_path, std::ios::app);
        if (!metrics) throw std::runtime_error("cannot append to " + metrics_path.string());
        const auto start = std::chrono::steady_clock::now();
        double first_loss = std::nan(""), last_loss = std::nan("");
        while (state.step < cfg.steps) {
            auto batch = sample_batch(pool, cfg.train.batch, state.rng);
            StepMetrics m = train_step(state, batch, cfg.train);
            metrics << format_metrics(m);
            if (std::isnan(first_loss)) first_loss = m.loss;
            last_loss = m.loss;
            if (state.step % cfg.checkpoint_every == 0 || state.step == cfg.steps) {
                metrics.flush();
                checkpoint_save(state, ckpt);
                const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                char line[160];
                std::snprintf(line, sizeof line, "step %llu  loss %.4f  active %.3f  %.1fs\n",
                              static_cast<unsigned long long>(state.step), m.loss, m.active_fraction, wall);
                out << line << std::flush;
            }
        }
        if (!std::isnan(first_loss)) {
            char line[96];
            std::snprintf(line, sizeof line, "loss %.4f -> %.4f\n", first_loss, last_loss);
            out << line;
        }
        return 0;
    });
}

int cmd_eval(const RunConfig& cfg, const fs::path& checkpoint, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        kernels::set_workers(cfg.workers);
        const fs::path ckpt = checkpoint.empty() ? cfg.out / "checkpoint" : checkpoint;
        TrainState state = checkpoint_load(ckpt, cfg.train.model);
        Dataset ds = load_dataset(cfg.data_root, true);
        EvalSplit split = build_split(ds, cfg.gallery, cfg.probe);

        std::vector<const GaitSample*> sequences;
        std::set<std::string> wanted;
        for (const auto& s : split.gallery) wanted.insert(s.id());
        for (const auto& s : split.probe) wanted.insert(s.id());
        for (const auto& s : ds.samples)
            if (wanted.count(s.info().id())) sequences.push_back(&s);
        EmbeddingStore store = embed_set(sequences, state.params, cfg.train.model);
        if (!store.skipped.empty()) {
            err << "warning: skipped " << store.skipped.size() << " sequences shorter than L="
                << cfg.train.model.clip_length << '\n';
        }
        EvalReport report = rank1_matrix(split, store);
        for (const auto& note : report.notes) err << "warning: " << note << '\n';

        fs::create_directories(cfg.out);
        const std::string table = render_report(report);
        write_text(cfg.out / "report.txt", table);
        write_text(cfg.out / "report.csv", report_csv(report));
        export_embeddings(store, cfg.out / "embeddings");
        out << "checkpoint " << ckpt.string() << " (step " << state.step << ")\n" << table;
        return 0;
    });
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        kernels::set_workers(cfg.workers);
        auto checks = run_gradcheck_battery();
        std::vector<std::string> failed;
        double total = 0.0;
        for (const auto& c : checks) {
            char line[128];
            std::snprintf(line, sizeof line, "%-20s %6zu coords  max rel err %.3e  %s\n", c.name.c_str(), c.coords,
                          c.max_rel_error, c.passed() ? "ok" : "FAIL");
            out << line;
            total += c.seconds;
            if (!c.passed()) failed.push_back(c.name);
        }
        char line[96];
        std::snprintf(line, sizeof line, "%zu checks, %.1fs, tolerance %.0e\n", checks.size(), total,
                      kGradCheckTolerance);
        out << line;
        if (!failed.empty()) {
            err << "gradient check failed:";
            for (const auto& f : failed) err << ' ' << f;
            err << '\n';
            return 1;
        }
        return 0;
    });
}

}  // namespace gait
