#pragma once
// JSON run configuration, its hash (covers everything that affects the
// numbers), the resolution pre-flight, and the run manifest.

#include <iosfwd>

#include "maglap/eigensolver.hpp"
#include "maglap/geometry.hpp"

namespace maglap {

struct RunConfig {
    std::string name = "run";
    TorusConfig torus;
    std::vector<int> k_list;
    double lambda = 0.0;
    std::vector<std::pair<double, double>> intervals;
    // 0: fixed grid torus.resolution for every k; else N(k) = per_k_resolution * k.
    int per_k_resolution = 0;
    SolverOptions solver;
    // Analyses to run for commands that bundle several; empty means all.
    std::vector<std::string> analyses;
    std::string output_dir = "out";
    std::string canonical;  // sorted-key JSON dump, input to the hash
};

// Errors: BadConfig with a field path on schema violations.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// FNV-1a over the canonical dump plus format versions and tolerance
// defaults; identical hash implies bit-identical numeric inputs.
uint64_t config_hash(const RunConfig& cfg);

int resolution_for(const RunConfig& cfg, int k);

// Six grid points per magnetic length: a <= (1/6) k^{-1/2} (2pi/maxB)^{1/2}.
// Errors: ResolutionTooCoarse.
void check_resolution(const GeometryField& geom, int k);

// Builds the geometry at the largest k, enforces the resolution rule, and
// requires lambda and every interval endpoint to clear the envelope by
// max(3 * grid modulus, 1e-8). Errors: ResolutionTooCoarse, PreflightFailed.
void preflight(const RunConfig& cfg);

struct StageRecord {
    std::string stage;
    std::string status;  // "ok", "cached", "failed"
    double seconds = 0.0;
    std::vector<std::string> artifacts;
};

struct RunManifest {
    std::string name;
    uint64_t hash = 0;
    uint32_t format_version = 1;
    std::vector<StageRecord> stages;

    void add(const std::string& stage, const std::string& status, double seconds,
             std::vector<std::string> artifacts = {});
    std::string to_json() const;
    void write(const std::string& path) const;
};

}  // namespace maglap
