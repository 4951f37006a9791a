#pragma once
// Pointwise model operator: the harmonic-oscillator sum
//   box_y = sum_i B_i(y) (a_i^dag a_i + 1/2) + V(y)
// acting on anti-holomorphic polynomials tensored with the potential
// eigenframe. It is diagonal on zbar^alpha (x) zeta_ell with eigenvalue
// lambda(alpha, ell) = sum_i B_i (alpha_i + 1/2) + V_ell.
// From it: per-point spectra, the grid envelope Sigma (union of closed
// intervals), the integrated density used by the Weyl law, spectral
// projectors, and the eigenvalue cluster bundle over the grid.

#include "maglap/geometry.hpp"

namespace maglap {

// Oscillator basis labels (alpha, ell): alpha graded-lex with |alpha| <= cap,
// ell in 0..r-1. Flat index = alpha_index * r + ell.
struct OscillatorBasis {
    int n = 0, r = 1, cap = 0;
    MultiIndexTable alphas;

    OscillatorBasis() = default;
    OscillatorBasis(int n_, int r_, int cap_) : n(n_), r(r_), cap(cap_), alphas(n_, cap_) {}
    int size() const { return alphas.size() * r; }
    int flat(int alpha_idx, int ell) const { return alpha_idx * r + ell; }
    std::pair<int, int> split(int flat_idx) const { return {flat_idx / r, flat_idx % r}; }
};

struct ModelOperator {
    PointFrame frame;
    OscillatorBasis basis;
    VectorXd diag;  // eigenvalues in basis order

    // Matrix in the zbar^alpha (x) standard A-frame basis:
    // blockdiag over alpha of Zeta diag(lambda(alpha,.)) Zeta^dag.
    MatrixXcd matrix_standard_frame() const;
};

ModelOperator box_operator(const PointFrame& frame, int cap);

// Degree cap large enough that every model eigenvalue <= lam is represented:
// cap > (lam - min V_ell) / min B_i.
int required_cap(const PointFrame& frame, double lam);

// All model eigenvalues <= lam at this point, ascending with multiplicity.
std::vector<double> sigma_point(const PointFrame& frame, double lam);

// Union of closed disjoint intervals, merge-normalized on construction.
class IntervalUnion {
public:
    IntervalUnion() = default;
    explicit IntervalUnion(std::vector<std::pair<double, double>> intervals);

    const std::vector<std::pair<double, double>>& components() const { return iv_; }
    bool contains(double x, double tol = 0.0) const;
    double distance(double x) const;          // 0 inside
    int component_of(double x, double tol) const;  // -1 if farther than tol from all
    // Open gaps between consecutive components intersected with [lo, hi].
    std::vector<std::pair<double, double>> gaps(double lo, double hi) const;

private:
    std::vector<std::pair<double, double>> iv_;
};

struct EnvelopeResult {
    IntervalUnion sigma;        // truncated at lambda
    double lambda = 0.0;
    int branches = 0;           // eigenvalue branches that dip below lambda
    double grid_modulus = 0.0;  // max adjacent-site branch increment (continuity estimate)
    std::vector<std::pair<double, double>> branch_hulls;  // per-branch [min,max], pre-merge
};

// Envelope of the model spectra over all grid points: per-branch interval
// hulls of the sorted eigenvalue lists, merged, truncated at lambda.
EnvelopeResult sigma_envelope(const GeometryField& geom, double lambda);

// Integrated density v(lam) = sum_y N_y(lam) rho_L(y) a^{2n}; the Weyl law
// predicts N(lam, k) ~ (k/2pi)^n v(lam).
double weyl_density(const GeometryField& geom, double lam);

struct ProjectorSelection {
    std::vector<int> flat_indices;  // basis labels with lambda(alpha,ell) in I
    MatrixXcd P;                    // projector matrix in the standard A-frame basis
    int rank = 0;
};

// Spectral projector 1_I(box_y) on the cap-truncated basis. Errors:
// EndpointOnSpectrum if an interval endpoint is closer than endpoint_tol to
// a model eigenvalue, CapExceeded if the cap cannot certify the selection.
ProjectorSelection projector_symbol(const PointFrame& frame, double lo, double hi, int cap,
                                    double endpoint_tol = 1e-8);

struct ProjectorField {
    int n = 0, r = 1, cap = 0, rank = 0;
    int N = 0;
    std::vector<MatrixXcd> P;  // per site, in the standard A-frame basis
    std::vector<std::vector<int>> selections;  // per site flat indices
};

// Projector family over the grid. Errors: RankJump if the rank varies,
// EndpointOnSpectrum if an endpoint clears the sampled spectra by less than
// 3x the grid modulus of continuity (or endpoint_tol if larger).
ProjectorField cluster_bundle(const GeometryField& geom, double lo, double hi, int cap,
                              double endpoint_tol = 1e-8);

}  // namespace maglap
