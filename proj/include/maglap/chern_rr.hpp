#pragma once
// Chern number of a projector field over the T^2 grid by the plaquette
// loop-product method, a Berry-curvature quadrature cross-check, and the
// Riemann-Roch count rank * k * d + c1 that the cluster counting law
// predicts (flat T^2 only; the Todd correction vanishes there).

#include "maglap/model_spectrum.hpp"

namespace maglap {

struct ChernData {
    long long c1 = 0;
    int rank = 0;
    double raw = 0.0;  // (1/2pi) * sum of plaquette phases, before rounding
    std::vector<double> plaquette_phase;  // per plaquette, site-major
};

// Loop-product Chern number: per plaquette, arg det of the cycle of frame
// overlaps, counterclockwise in (x0, x1); summed and divided by 2 pi this is
// an integer up to roundoff. Errors: UnsupportedDimension unless n = 1;
// SingularOverlap if some P is not a projector (eigenvalues off {0,1} by
// more than 1e-6), the rank varies, or a loop determinant falls below 1e-8;
// NonIntegerChern if the total misses an integer by more than 1e-3.
ChernData fhs_chern(const ProjectorField& F);

// Central-difference quadrature of (1/(2 pi i)) tr(P [d1 P, d2 P]) over the
// grid, the curvature density whose plaquette holonomy fhs_chern multiplies
// out. Not exactly integral; agrees with fhs_chern to O(h^2) on smooth fields.
double berry_chern_quadrature(const ProjectorField& F);

long long riemann_roch_value(int k, long long d, int rank, long long c1);

// rank(F) * k * d + c1(F). Errors: UnsupportedDimension unless n = 1.
long long riemann_roch(int k, long long d, const ProjectorField& F);

}  // namespace maglap
