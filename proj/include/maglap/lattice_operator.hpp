#pragma once
// U(1) gauge lattice for the k-th tensor power of the flux line bundle and
// the discretized operator
//   H = (1/2) D^*_rho W D + k V  [+ sym. first-order perturbation + b],
// with forward covariant differences D_j u(x) = (U_j(x) u(x+e_j) - u(x))/a,
// inverse-metric weights at link midpoints, and the weighted inner product
//   <u,v> = sum_x v(x)^dag u(x) rho_L(x) a^{2n}.
// H is self-adjoint for that inner product; the per-dof weights travel with
// the matrix. Counterclockwise plaquette products equal exp(-i Phi_p) with
// Phi_p = k * (2-point Gauss flux of omega over the plaquette).

#include "maglap/geometry.hpp"
#include "maglap/symbol_calculus.hpp"

namespace maglap {

enum class GaugeStyle { LandauX, LandauY };

struct GaugeLattice {
    int n = 0, N = 0, k = 0;
    GaugeStyle style = GaugeStyle::LandauX;
    // theta[axis][site]: link phase angle; U_j(x) = exp(-i theta[j][x]).
    std::vector<std::vector<double>> theta;
    // Realized plaquette fluxes, one N x N table per in-plane 2-cycle
    // ((0,1) and, for n=2, (2,3)), indexed i + N*j in plane coordinates.
    // Counterclockwise link products equal exp(-i phi) exactly.
    std::vector<std::vector<double>> phi;

    cdouble link(int axis, int64_t site) const {
        return std::polar(1.0, -theta[axis][site]);
    }
};

// Discrete Landau gauge with exact integer winding: plaquette fluxes are
// realized exactly and their total per 2-cycle is 2 pi k d_c (a quadrature
// defect below 1e-6 relative is spread uniformly; beyond that FluxMismatch).
// For n=2 the construction requires block-product flux (omega_{01} depending
// only on (x0,x1), omega_{23} only on (x2,x3), no cross-plane flux), else
// UnsupportedGauge. k = 0 yields the trivial gauge.
GaugeLattice build_gauge(const GeometryField& geom, int k, GaugeStyle style = GaugeStyle::LandauX);

// Section of L^k (x) A sampled on sites: values[site * r + component].
struct LatticeSection {
    int64_t dim = 0;
    int r = 1;
    std::vector<cdouble> values;
};

// Sparse operator self-adjoint w.r.t. the weighted inner product. CSR with a
// per-dof weight vector w(x) = rho_L(x) a^{2n}.
class SparseHermitian {
public:
    int64_t dim = 0;
    std::vector<int64_t> row_ptr;
    std::vector<int64_t> col;
    std::vector<cdouble> val;
    std::vector<double> w;

    void matvec(const cdouble* x, cdouble* y, int threads = 1) const;
    VectorXcd matvec(const VectorXcd& x, int threads = 1) const;
    cdouble weighted_dot(const VectorXcd& u, const VectorXcd& v) const;  // <u,v>_rho
    double weighted_norm(const VectorXcd& u) const;
    // max |(WH)_{xy} - conj((WH)_{yx})|; zero for a weighted-Hermitian matrix
    double hermitian_defect() const;
    double norm_estimate() const;  // max weighted row sum
    // Dense standard-Hermitian conjugation R^{1/2} H R^{-1/2}.
    MatrixXcd dense_standardized() const;

    static SparseHermitian from_triplets(int64_t dim, std::vector<double> weights,
                                         std::vector<std::tuple<int64_t, int64_t, cdouble>> trips);
};

// Optional first-order perturbation sum_j (1/2)(a_j D_j + (a_j D_j)^*_rho) + b
// with r x r coefficient fields a_j (one per axis) and b.
struct PerturbationSpec {
    std::vector<FieldSpec> a;  // size 2n, each r x r
    FieldSpec b;               // r x r Hermitian
    bool has_b = false;
};

// Errors: NonHermitianAssembly if the weighted-Hermiticity self-check fails.
SparseHermitian assemble_laplacian(const GeometryField& geom, const GaugeLattice& gauge, int k,
                                   const PerturbationSpec* pert = nullptr);

// Parallel transport phase along the axis-ordered staircase path from site y
// to site x (shortest signed wrap per axis, ties broken positive).
cdouble transport_frame(const GaugeLattice& gauge, const GeometryField& geom, int64_t y_site,
                        int64_t x_site);

// Gaussian coherent state centered at y:
//   Phi(x) = F_y(x) k^{n/2} exp(-k |xi|_y^2/4) f(k^{1/2} z(xi)) psi(|xi|) avec,
// xi the shortest periodic displacement, psi a smooth bump in the Euclidean
// displacement norm: 1 for |xi| <= cutoff/2, 0 beyond cutoff. f is a scalar
// polynomial (evaluated on anti-holomorphic arguments) and avec the A-fiber
// direction. The cutoff must cover five magnetic lengths k^{-1/2}(2pi/maxB)^{1/2}
// or as much of the torus as fits: cutoff >= min(5 sqrt(2pi/(k maxB)), 0.49),
// else CutoffTooSmall.
LatticeSection peaked_section(const GeometryField& geom, const GaugeLattice& gauge,
                              const PointFrame& frame, int64_t y_site,
                              const SymbolPolynomial& f, const VectorXcd& avec, int k,
                              double cutoff);

// Matrix export: binary (documented in README) and Matrix Market.
void export_binary(const SparseHermitian& H, const std::string& path);
void export_matrix_market(const SparseHermitian& H, const std::string& path);
// CSV dump: site, component, re, im.
void export_section_csv(const LatticeSection& sec, const std::string& path);

}  // namespace maglap
