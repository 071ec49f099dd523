#include <CLI11.hpp>

#include <iostream>

#include "gait/commands.hpp"

namespace {

struct Common {
    std::string config;
    std::vector<std::string> settings;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Config file (key = value with [sections])");
    cmd->add_option("--set", c.settings, "Override one key, e.g. --set train.steps=500")->take_all();
    cmd->add_option("--seed", c.seed, "Root seed (overrides run.seed)");
    cmd->add_option("--workers", c.workers, "Worker threads (results do not depend on this)")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out, "Output directory (overrides run.out)");
}

gait::RunConfig resolve(const Common& c, CLI::App* cmd) {
    gait::RunConfig cfg = c.config.empty() ? gait::RunConfig{} : gait::load_config(c.config);
    for (const auto& s : c.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
        gait::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (cmd->count("--seed")) cfg.seed = c.seed;
    if (cmd->count("--workers")) cfg.workers = c.workers;
    if (cmd->count("--out")) cfg.out = c.out;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gait recognition: synthetic data, training, cross-view evaluation"};
    app.require_subcommand(1);

    Common gen_opts, train_opts, eval_opts, grad_opts;
    bool force = false, resume = false;
    std::string checkpoint;

    auto* gen = app.add_subcommand("gen-data", "Render the synthetic dataset to data.root");
    add_common(gen, gen_opts);
    gen->add_flag("--force", force, "Replace a non-empty dataset root");

    auto* train = app.add_subcommand("train", "Train and write checkpoints and metrics.csv to the output directory");
    add_common(train, train_opts);
    train->add_flag("--resume", resume, "Continue from <out>/checkpoint");

    auto* eval = app.add_subcommand("eval", "Cross-view rank-1 evaluation of a checkpoint");
    add_common(eval, eval_opts);
    eval->add_option("--checkpoint", checkpoint, "Checkpoint directory (default <out>/checkpoint)");

    auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable operation");
    add_common(grad, grad_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return gait::cmd_gen_data(resolve(gen_opts, gen), force, std::cout, std::cerr);
        if (train->parsed()) return gait::cmd_train(resolve(train_opts, train), resume, std::cout, std::cerr);
        if (eval->parsed()) return gait::cmd_eval(resolve(eval_opts, eval), checkpoint, std::cout, std::cerr);
        if (grad->parsed()) return gait::cmd_gradcheck(resolve(grad_opts, grad), std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
