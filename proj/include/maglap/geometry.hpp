#pragma once
// Discretized torus geometry: metric g, magnetic 2-form omega, auxiliary
// potential V sampled on a uniform grid over [0,1)^{2n}, n in {1,2}, plus the
// pointwise linear-algebra frame (field frequencies B_i, complex frame,
// potential eigenframe) that the model operators are built from.
//
// Conventions fixed here and relied on everywhere else:
//   omega(xi,eta) = xi^T Om eta with Om antisymmetric, Om = jB^T G,
//   jB = -G^{-1} Om, frequencies B_i = positive imaginary parts of jB's
//   spectrum, degree d_c = (1/2pi) * integral of omega over 2-cycle c > 0
//   for n=1 (orientation), Liouville density rho_L = Pfaffian(Om) > 0.

#include <optional>

#include "maglap/common.hpp"
#include "maglap/field_expr.hpp"

namespace maglap {

// Matrix-valued field on the torus: constant matrix, per-entry closed-form
// expressions, or raw per-site samples. Constant/Expr evaluate anywhere;
// Grid only at sites (off-site requests use corner averages upstream).
struct FieldSpec {
    enum class Kind { Constant, Expr, Grid };
    Kind kind = Kind::Constant;
    int rows = 0, cols = 0;
    MatrixXcd constant;
    std::vector<std::vector<FieldExpr>> exprs;  // rows x cols
    std::vector<MatrixXcd> grid;                // site-major

    static FieldSpec make_constant(const MatrixXcd& m);
    static FieldSpec make_expr(int rows, int cols, const std::vector<std::vector<std::string>>& entries, int dim);
    static FieldSpec make_grid(int rows, int cols, std::vector<MatrixXcd> values);

    bool pointwise() const { return kind != Kind::Grid; }
    MatrixXcd eval_point(const std::vector<double>& coords) const;
};

struct TorusConfig {
    int half_dim = 1;   // n; torus dimension is 2n
    int resolution = 16;  // N grid sites per axis
    int aux_rank = 1;   // r, fiber rank of the auxiliary bundle A
    FieldSpec metric;     // 2n x 2n symmetric positive definite
    FieldSpec omega;      // 2n x 2n antisymmetric, integral total flux
    FieldSpec potential;  // r x r Hermitian
};

// Pointwise frame data at a grid point.
struct PointFrame {
    int n = 0, r = 0;
    MatrixXd G, Om;     // inputs after symmetrization (2n x 2n)
    MatrixXd jB;        // -G^{-1} Om
    MatrixXd Jc;        // complex structure j = |jB|^{-1} jB
    MatrixXd Gt;        // matrix of g~(xi,eta) = omega(xi, j eta); |xi|_y^2 = xi^T Gt xi
    VectorXd B;         // frequencies, ascending, size n
    MatrixXcd U;        // columns u_i: h-orthonormal frame of T^{1,0}
    MatrixXcd Zdual;    // n x 2n rows: z_i(xi) = (Zdual * xi)(i)
    VectorXd Veig;      // potential eigenvalues ascending, size r
    MatrixXcd Zeta;     // r x r unitary, columns are potential eigenvectors
    double rhoL = 0.0;  // Pfaffian(Om)

    double xi_norm2(const VectorXd& xi) const { return xi.dot(Gt * xi); }
    VectorXcd z_of(const VectorXd& xi) const { return Zdual * xi; }
};

class GeometryField {
public:
    int n = 0, N = 0, r = 0;
    double a = 0.0;  // grid spacing 1/N
    std::vector<MatrixXd> g;     // per-site metric
    std::vector<MatrixXd> om;    // per-site omega (after flux snap)
    std::vector<MatrixXcd> V;    // per-site potential
    std::vector<double> rho;     // per-site Liouville density
    // per-axis link data: value associated with the link (site, site+e_axis),
    // from 2-point Gauss along the link (corner average for Grid fields)
    std::vector<std::vector<MatrixXd>> g_link;   // [axis][site]
    std::vector<std::vector<double>> rho_link;   // [axis][site]

    std::vector<std::pair<int, int>> cycles;     // 2-cycle axis pairs (i<j)
    std::vector<long long> degree;               // flux integers per cycle
    double snap_scale = 1.0;                     // uniform factor applied to omega

    FieldSpec metric_spec, omega_spec, potential_spec;  // omega_spec pre-snap

    int dim() const { return 2 * n; }
    int64_t sites() const {
        int64_t s = 1;
        for (int d = 0; d < dim(); ++d) s *= N;
        return s;
    }
    int64_t site_index(const std::vector<int>& c) const {
        int64_t idx = 0;
        for (int d = dim() - 1; d >= 0; --d) idx = idx * N + ((c[d] % N) + N) % N;
        return idx;
    }
    std::vector<int> site_coords(int64_t idx) const {
        std::vector<int> c(dim());
        for (int d = 0; d < dim(); ++d) {
            c[d] = static_cast<int>(idx % N);
            idx /= N;
        }
        return c;
    }
    int64_t neighbor(int64_t idx, int axis, int step) const {
        auto c = site_coords(idx);
        c[axis] = ((c[axis] + step) % N + N) % N;
        return site_index(c);
    }
    std::vector<double> site_point(int64_t idx) const {
        auto c = site_coords(idx);
        std::vector<double> x(dim());
        for (int d = 0; d < dim(); ++d) x[d] = c[d] * a;
        return x;
    }

    // Flux of (snapped) omega through the plaquette at `site` spanned by axes
    // (ax1, ax2), per unit k: 2-point Gauss per plaquette axis, other
    // coordinates held at the site. Grid fields use the 4-corner average.
    double plaq_flux(int64_t site, int ax1, int ax2) const;

    // omega entry evaluated off-site (Constant/Expr), with snap scale applied.
    double omega_entry_at(const std::vector<double>& coords, int i, int j) const;
};

// Validates fields, snaps total flux per 2-cycle to integers (uniform
// rescale within 1e-6 relative, else NonIntegralFlux), fixes orientation.
// Errors: NonPositiveMetric, NonSymplectic, NegativeOrientation,
// NonIntegralFlux, NonClosedForm (n=2 flux depends on the transverse slice).
GeometryField build_geometry(const TorusConfig& cfg);

// Pointwise frame from raw matrices; DegenerateForm if any B_i < 1e-8.
// Frequency-degenerate eigenspaces are re-based deterministically by
// projecting the standard basis and orthonormalizing in index order.
PointFrame frame_from_matrices(const MatrixXd& G, const MatrixXd& Om, const MatrixXcd& V);

PointFrame frame_at(const GeometryField& geom, int64_t site);

// Sum of rho_L * a^{2n} over sites.
double liouville_volume(const GeometryField& geom);

// Largest field frequency max_i B_i over all sites; sets the magnetic length
// k^{-1/2} B^{-1/2} that the resolution rule is stated in.
double max_frequency(const GeometryField& geom);

}  // namespace maglap
