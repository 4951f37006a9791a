// Command-line front end: loads a JSON run configuration, applies flag
// overrides, and dispatches one subcommand.

#include <cstdint>
#include <iostream>

#include "CLI11.hpp"
#include "maglap/runner.hpp"

using namespace maglap;

int main(int argc, char** argv) {
    CLI::App app{"magnetic Laplacian laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0, dense_cap = 0;

    app.add_option("--config", config_path, "run configuration JSON")->required();
    app.add_option("--out", out_override, "output directory override");
    auto* seed_opt = app.add_option("--seed", seed, "solver seed override");
    app.add_option("--threads", threads, "worker threads override");
    app.add_option("--dense-cap", dense_cap, "dense solver dimension cap override");

    auto* s_model = app.add_subcommand("model", "envelope, Weyl density, point reports");
    auto* s_spec = app.add_subcommand("spectrum", "solve and cache low spectra per k");
    auto* s_clus = app.add_subcommand("clusters", "cluster detection and Riemann-Roch counts");
    auto* s_weyl = app.add_subcommand("weyl", "global and local Weyl tables");
    auto* s_kern = app.add_subcommand("kernel", "projector kernel slices and Gaussian fits");
    auto* s_chern = app.add_subcommand("chern", "cluster bundle Chern numbers");
    auto* s_acc = app.add_subcommand("accept", "full acceptance suite");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        RunConfig cfg = load_run_config(config_path);
        if (!out_override.empty()) cfg.output_dir = out_override;
        if (seed_set) cfg.solver.seed = seed;
        if (threads > 0) cfg.solver.threads = threads;
        if (dense_cap > 0) cfg.solver.dense_cap = dense_cap;

        RunContext ctx(cfg);
        if (s_model->parsed()) cmd_model(ctx);
        if (s_spec->parsed()) cmd_spectrum(ctx);
        if (s_clus->parsed()) cmd_clusters(ctx);
        if (s_weyl->parsed()) cmd_weyl(ctx);
        if (s_kern->parsed()) cmd_kernel(ctx);
        if (s_chern->parsed()) cmd_chern(ctx);
        if (s_acc->parsed()) {
            if (!cmd_accept(ctx)) return 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == "UsageError" ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
