#pragma once
// Lowest part of the spectrum of weighted-Hermitian operators: dense solver
// up to a dimension cap, Lanczos with full reorthogonalization and locked
// restarts above it. Eigenvalues are reported for k^{-1} H; eigenvectors are
// orthonormal for the weighted inner product.

#include <optional>

#include "maglap/lattice_operator.hpp"

namespace maglap {

struct EigenSystem {
    int k = 1;
    // Ascending eigenvalues of k^{-1} H. Dense keeps the whole spectrum;
    // Lanczos keeps everything certified below lambda_cut.
    std::vector<double> eigenvalues;
    double lambda_cut = 0.0;  // certified coverage bound (inf for dense)
    std::vector<VectorXcd> vectors;  // optional, rho-orthonormal, one per value
    std::vector<double> residuals;   // ||H v - k lambda v||_rho per kept pair
    std::string method;
    int iterations = 0;
    uint64_t seed = 0;

    int64_t count_below(double lam) const;
};

struct SolverOptions {
    int dense_cap = 6000;
    double tol = 1e-9;  // relative to the operator norm estimate
    uint64_t seed = 0x6d61676c61700001ull;
    int threads = 1;
    bool want_vectors = true;
    int max_restarts = 16;
    int block_len = 240;  // Krylov length per restart
};

// Full spectrum by dense diagonalization of R^{1/2} H R^{-1/2}.
// Errors: DimensionTooLarge beyond opts.dense_cap.
EigenSystem dense_eig(const SparseHermitian& H, int k, const SolverOptions& opts = {});

// All eigenvalues of k^{-1} H below lambda with multiplicities. Certification:
// a second run with an independent seed and a raised cutoff must reproduce the
// count below lambda and contain the first run's values. Deterministic given
// the seed. Errors: NoConvergence (budget exhausted), ClusterUnresolved
// (certification runs disagree on the count below lambda).
EigenSystem lanczos_lowest(const SparseHermitian& H, int k, double lambda,
                           const SolverOptions& opts = {});

// Dense below the cap, Lanczos above.
EigenSystem solve_low_spectrum(const SparseHermitian& H, int k, double lambda,
                               const SolverOptions& opts = {});

// Multiplicity-weighted count of eigenvalues of k^{-1} H at or below lam.
// Errors: AboveCertifiedCutoff if lam exceeds the certified coverage.
int64_t counting_function(const EigenSystem& es, double lam);

// Cache file for eigen-data, reused across analysis passes when every header
// field matches. Binary layout is documented in the README.
struct EigenCacheKey {
    uint64_t config_hash = 0;
    int k = 0;
    int N = 0;
    double lambda = 0.0;
    double tol = 0.0;
    uint64_t seed = 0;
    bool want_vectors = false;
};

void save_eigen_cache(const std::string& path, const EigenCacheKey& key, const EigenSystem& es,
                      int r);
// Empty result on missing file or key mismatch; Error("CacheCorrupt") on a
// malformed file.
std::optional<EigenSystem> load_eigen_cache(const std::string& path, const EigenCacheKey& key);

}  // namespace maglap
