#pragma once
// The shipped pass/fail gate: ten numbered checks covering cluster counting
// against Riemann-Roch, gap emptiness, distance scaling, global and local
// Weyl laws, projector-kernel Gaussians, peaked-section residual scaling,
// first-order robustness, the symbol-algebra oracles, and gauge/solver
// invariance. Each check builds its own geometry and tolerances; nothing is
// tunable from the outside except solver settings.

#include <iosfwd>

#include "maglap/eigensolver.hpp"

namespace maglap {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;  // the measured numbers backing the verdict
};

struct AcceptanceReport {
    std::vector<CriterionResult> results;

    bool all_pass() const;
    std::string to_json() const;
};

// Runs all ten checks in order, one [PASS]/[FAIL] line each on `log` when
// given. A check that throws is recorded as failed with the error text;
// the suite always finishes.
AcceptanceReport run_acceptance(const std::string& out_dir, const SolverOptions& base,
                                std::ostream* log);

}  // namespace maglap
