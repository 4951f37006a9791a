#pragma once
// Orchestration for end-to-end experiments: builds geometries per k, solves
// (or reloads) low spectra, runs the analyses, and emits JSON/CSV artifacts
// plus a manifest under the configured output directory.

#include "maglap/run_config.hpp"
#include "maglap/spectral_analysis.hpp"

namespace maglap {

struct RunContext {
    RunConfig cfg;
    uint64_t hash = 0;
    std::string out_dir;
    RunManifest manifest;

    explicit RunContext(RunConfig c);
};

// Geometry at the grid this config assigns to k.
GeometryField geometry_for(const RunConfig& cfg, int k);

// Analysis cutoff: cfg.lambda when set, else the largest interval endpoint.
// Errors: UsageError when neither is available.
double solve_cutoff(const RunConfig& cfg);

// Solve or reload the low spectrum for one k. The cache file keys on the
// config hash plus (k, N, cutoff, tol, seed, want_vectors); a hit skips the
// assembly and the solve entirely. Returns the system and whether it was
// served from cache.
std::pair<EigenSystem, bool> solve_for_k(RunContext& ctx, int k, bool want_vectors);

// Subcommands. Each writes its artifacts and appends manifest stages;
// errors from modules are rethrown with the stage name prefixed.
void cmd_model(RunContext& ctx);
void cmd_spectrum(RunContext& ctx);
void cmd_clusters(RunContext& ctx);
void cmd_weyl(RunContext& ctx);
void cmd_kernel(RunContext& ctx);
void cmd_chern(RunContext& ctx);

// Full acceptance suite; returns true when every criterion passes.
bool cmd_accept(RunContext& ctx);

}  // namespace maglap
