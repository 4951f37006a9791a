#include "maglap/geometry.hpp"

#include <Eigen/Eigenvalues>

namespace maglap {

FieldSpec FieldSpec::make_constant(const MatrixXcd& m) {
    FieldSpec f;
    f.kind = Kind::Constant;
    f.rows = static_cast<int>(m.rows());
    f.cols = static_cast<int>(m.cols());
    f.constant = m;
    return f;
}

FieldSpec FieldSpec::make_expr(int rows, int cols,
                               const std::vector<std::vector<std::string>>& entries, int dim) {
    if (static_cast<int>(entries.size()) != rows)
        throw Error("BadArgument", "expression field: row count mismatch");
    FieldSpec f;
    f.kind = Kind::Expr;
    f.rows = rows;
    f.cols = cols;
    f.exprs.resize(rows);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(entries[i].size()) != cols)
            throw Error("BadArgument", "expression field: column count mismatch");
        for (int j = 0; j < cols; ++j) f.exprs[i].push_back(FieldExpr::parse(entries[i][j], dim));
    }
    return f;
}

FieldSpec FieldSpec::make_grid(int rows, int cols, std::vector<MatrixXcd> values) {
    FieldSpec f;
    f.kind = Kind::Grid;
    f.rows = rows;
    f.cols = cols;
    for (const auto& m : values)
        if (m.rows() != rows || m.cols() != cols)
            throw Error("BadArgument", "grid field: sample shape mismatch");
    f.grid = std::move(values);
    return f;
}

MatrixXcd FieldSpec::eval_point(const std::vector<double>& coords) const {
    if (kind == Kind::Constant) return constant;
    if (kind == Kind::Expr) {
        MatrixXcd m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = exprs[i][j].eval(coords);
        return m;
    }
    throw Error("BadArgument", "grid field has no off-site values");
}

namespace {

constexpr double kGaussOff = 0.28867513459481288225;  // 1/(2 sqrt(3))

// 2-point Gauss average of a real entry of `spec` along the link
// (site, site + a*e_axis); corner average for Grid fields.
MatrixXcd link_average(const FieldSpec& spec, const GeometryField& geom, int64_t site, int axis) {
    if (spec.kind == FieldSpec::Kind::Grid) {
        return 0.5 * (spec.grid[site] + spec.grid[geom.neighbor(site, axis, 1)]);
    }
    auto x = geom.site_point(site);
    auto lo = x, hi = x;
    lo[axis] += geom.a * (0.5 - kGaussOff);
    hi[axis] += geom.a * (0.5 + kGaussOff);
    return 0.5 * (spec.eval_point(lo) + spec.eval_point(hi));
}

MatrixXd real_part_checked(const MatrixXcd& m, const char* what) {
    if (m.imag().cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw Error("BadArgument", std::string(what) + " must be real-valued");
    return m.real();
}

}  // namespace

double GeometryField::omega_entry_at(const std::vector<double>& coords, int i, int j) const {
    return snap_scale * omega_spec.eval_point(coords)(i, j).real();
}

double GeometryField::plaq_flux(int64_t site, int ax1, int ax2) const {
    if (omega_spec.kind == FieldSpec::Kind::Grid) {
        double s = om[site](ax1, ax2) + om[neighbor(site, ax1, 1)](ax1, ax2) +
                   om[neighbor(site, ax2, 1)](ax1, ax2) +
                   om[neighbor(neighbor(site, ax1, 1), ax2, 1)](ax1, ax2);
        return 0.25 * s * a * a;
    }
    auto x = site_point(site);
    double s = 0.0;
    for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) {
            auto p = x;
            p[ax1] += a * (0.5 + (u ? kGaussOff : -kGaussOff));
            p[ax2] += a * (0.5 + (v ? kGaussOff : -kGaussOff));
            s += omega_entry_at(p, ax1, ax2);
        }
    return 0.25 * s * a * a;
}

PointFrame frame_from_matrices(const MatrixXd& G_in, const MatrixXd& Om_in, const MatrixXcd& V_in) {
    const int d = static_cast<int>(G_in.rows());
    if (d % 2 != 0 || d < 2 || Om_in.rows() != d || Om_in.cols() != d || G_in.cols() != d)
        throw Error("BadArgument", "frame: matrices must be 2n x 2n");
    const int n = d / 2;

    PointFrame fr;
    fr.n = n;
    fr.G = 0.5 * (G_in + G_in.transpose());
    fr.Om = 0.5 * (Om_in - Om_in.transpose());

    Eigen::SelfAdjointEigenSolver<MatrixXd> eg(fr.G);
    double gmax = eg.eigenvalues().cwiseAbs().maxCoeff();
    if (eg.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, gmax))
        throw Error("NonPositiveMetric", "metric is not positive definite");
    MatrixXd S = eg.operatorSqrt();
    MatrixXd Sinv = eg.operatorInverseSqrt();

    MatrixXd K = Sinv * fr.Om * Sinv;
    K = 0.5 * (K - K.transpose().eval());
    MatrixXd A = -K;

    MatrixXcd Hk = cdouble(0.0, 1.0) * A.cast<cdouble>();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eh(Hk);
    const VectorXd ev = eh.eigenvalues();  // ascending: -B_max .. -B_min, +B_min .. +B_max

    fr.B = VectorXd(n);
    MatrixXcd W(d, n);
    for (int i = 0; i < n; ++i) {
        double b = -ev(n - 1 - i);
        if (b < 1e-8) throw Error("DegenerateForm", "frequency B below 1e-8");
        fr.B(i) = b;
        W.col(i) = eh.eigenvectors().col(n - 1 - i);
    }

    // Deterministic basis inside degenerate frequency groups: project the
    // standard basis onto the group eigenspace and orthonormalize in order.
    int i0 = 0;
    while (i0 < n) {
        int i1 = i0 + 1;
        while (i1 < n && std::abs(fr.B(i1) - fr.B(i0)) <= 1e-10 * std::max(1.0, fr.B(i0))) ++i1;
        int m = i1 - i0;
        if (m > 1) {
            MatrixXcd P = W.middleCols(i0, m);  // d x m, orthonormal columns
            std::vector<VectorXcd> picked;
            for (int e = 0; e < d && static_cast<int>(picked.size()) < m; ++e) {
                VectorXcd v = P * (P.adjoint().col(e));  // project e_e onto the eigenspace
                for (const auto& q : picked) v -= q.dot(v) * q;
                double nv = v.norm();
                if (nv > 1e-6) picked.push_back(v / nv);
            }
            if (static_cast<int>(picked.size()) != m)
                throw Error("DegenerateForm", "could not re-base a degenerate frequency group");
            for (int t = 0; t < m; ++t) W.col(i0 + t) = picked[t];
        }
        i0 = i1;
    }

    fr.U = MatrixXcd(d, n);
    fr.Zdual = MatrixXcd(n, d);
    for (int i = 0; i < n; ++i) {
        VectorXcd u = (Sinv * W.col(i)) / std::sqrt(fr.B(i));
        fr.U.col(i) = u;
        // z_i(xi) = (1/i) * omega(xi, conj(u_i)) = -i * (Om * conj(u_i))^T xi
        fr.Zdual.row(i) = (cdouble(0.0, -1.0) * (fr.Om.cast<cdouble>() * u.conjugate())).transpose();
    }

    fr.jB = -(fr.G.inverse() * fr.Om);
    Eigen::SelfAdjointEigenSolver<MatrixXd> ek(A * A.transpose());  // = -K^2, PSD
    MatrixXd absK = ek.operatorSqrt();
    fr.Jc = Sinv * (absK.inverse() * A) * S;
    fr.Gt = fr.Om * fr.Jc;
    fr.Gt = 0.5 * (fr.Gt + fr.Gt.transpose().eval());
    fr.rhoL = pfaffian(fr.Om);

    const int r = static_cast<int>(V_in.rows());
    fr.r = r;
    MatrixXcd Vh = 0.5 * (V_in + V_in.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> evv(Vh);
    fr.Veig = evv.eigenvalues();
    fr.Zeta = evv.eigenvectors();
    return fr;
}

GeometryField build_geometry(const TorusConfig& cfg) {
    const int n = cfg.half_dim;
    if (n != 1 && n != 2) throw Error("BadArgument", "half_dim must be 1 or 2");
    if (cfg.resolution < 2) throw Error("BadArgument", "resolution must be >= 2");
    if (cfg.aux_rank < 1) throw Error("BadArgument", "aux_rank must be >= 1");
    const int d = 2 * n;
    if (cfg.metric.rows != d || cfg.metric.cols != d)
        throw Error("BadArgument", "metric must be 2n x 2n");
    if (cfg.omega.rows != d || cfg.omega.cols != d)
        throw Error("BadArgument", "omega must be 2n x 2n");
    if (cfg.potential.rows != cfg.aux_rank || cfg.potential.cols != cfg.aux_rank)
        throw Error("BadArgument", "potential must be r x r");

    GeometryField geo;
    geo.n = n;
    geo.N = cfg.resolution;
    geo.r = cfg.aux_rank;
    geo.a = 1.0 / geo.N;
    geo.metric_spec = cfg.metric;
    geo.omega_spec = cfg.omega;
    geo.potential_spec = cfg.potential;

    const int64_t S = geo.sites();
    if (cfg.metric.kind == FieldSpec::Kind::Grid && static_cast<int64_t>(cfg.metric.grid.size()) != S)
        throw Error("BadArgument", "metric grid: wrong sample count");
    if (cfg.omega.kind == FieldSpec::Kind::Grid && static_cast<int64_t>(cfg.omega.grid.size()) != S)
        throw Error("BadArgument", "omega grid: wrong sample count");
    if (cfg.potential.kind == FieldSpec::Kind::Grid &&
        static_cast<int64_t>(cfg.potential.grid.size()) != S)
        throw Error("BadArgument", "potential grid: wrong sample count");

    geo.g.resize(S);
    geo.om.resize(S);
    geo.V.resize(S);
    geo.rho.resize(S);

    for (int64_t s = 0; s < S; ++s) {
        auto x = geo.site_point(s);
        MatrixXd G = real_part_checked(
            cfg.metric.kind == FieldSpec::Kind::Grid ? cfg.metric.grid[s] : cfg.metric.eval_point(x),
            "metric");
        G = 0.5 * (G + G.transpose().eval());
        Eigen::SelfAdjointEigenSolver<MatrixXd> eg(G);
        if (eg.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, eg.eigenvalues().cwiseAbs().maxCoeff()))
            throw Error("NonPositiveMetric", "metric not positive definite at a grid site");
        geo.g[s] = G;

        MatrixXd Om = real_part_checked(
            cfg.omega.kind == FieldSpec::Kind::Grid ? cfg.omega.grid[s] : cfg.omega.eval_point(x),
            "omega");
        Om = 0.5 * (Om - Om.transpose().eval());
        geo.om[s] = Om;

        MatrixXcd V =
            cfg.potential.kind == FieldSpec::Kind::Grid ? cfg.potential.grid[s] : cfg.potential.eval_point(x);
        geo.V[s] = 0.5 * (V + V.adjoint().eval());
    }

    // 2-cycles and their fluxes: 2-point Gauss per plaquette axis over the
    // full coordinate plane, transverse coordinates at 0.
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) geo.cycles.emplace_back(i, j);

    auto cycle_flux = [&](int ax1, int ax2, int off) {
        // off indexes the transverse slice (n=2 closedness cross-check)
        double total = 0.0;
        std::vector<int> c(d, 0);
        for (int t = 0; t < d; ++t)
            if (t != ax1 && t != ax2) c[t] = off;
        for (int i = 0; i < geo.N; ++i)
            for (int j = 0; j < geo.N; ++j) {
                c[ax1] = i;
                c[ax2] = j;
                // raw (pre-snap) flux: use omega samples/spec directly
                int64_t s = geo.site_index(c);
                if (cfg.omega.kind == FieldSpec::Kind::Grid) {
                    double v = geo.om[s](ax1, ax2) + geo.om[geo.neighbor(s, ax1, 1)](ax1, ax2) +
                               geo.om[geo.neighbor(s, ax2, 1)](ax1, ax2) +
                               geo.om[geo.neighbor(geo.neighbor(s, ax1, 1), ax2, 1)](ax1, ax2);
                    total += 0.25 * v * geo.a * geo.a;
                } else {
                    auto x = geo.site_point(s);
                    double v = 0.0;
                    for (int u = 0; u < 2; ++u)
                        for (int w = 0; w < 2; ++w) {
                            auto p = x;
                            p[ax1] += geo.a * (0.5 + (u ? kGaussOff : -kGaussOff));
                            p[ax2] += geo.a * (0.5 + (w ? kGaussOff : -kGaussOff));
                            v += cfg.omega.eval_point(p)(ax1, ax2).real();
                        }
                    total += 0.25 * v * geo.a * geo.a;
                }
            }
        return total;
    };

    std::vector<double> flux(geo.cycles.size());
    for (size_t c = 0; c < geo.cycles.size(); ++c) {
        auto [i, j] = geo.cycles[c];
        flux[c] = cycle_flux(i, j, 0) / kTwoPi;
        if (n == 2) {
            double other = cycle_flux(i, j, geo.N / 2) / kTwoPi;
            if (std::abs(other - flux[c]) > 1e-6 * std::max(1.0, std::abs(flux[c])))
                throw Error("NonClosedForm", "2-cycle flux depends on the transverse slice");
        }
    }

    geo.degree.resize(geo.cycles.size());
    double scale = 0.0;
    for (size_t c = 0; c < geo.cycles.size(); ++c) {
        long long dc = std::llround(flux[c]);
        if (std::abs(flux[c] - dc) > 1e-6 * std::max(1.0, std::abs(static_cast<double>(dc))))
            throw Error("NonIntegralFlux", "flux per 2-cycle is not within 1e-6 of an integer");
        geo.degree[c] = dc;
        if (dc != 0 && scale == 0.0) scale = static_cast<double>(dc) / flux[c];
    }
    if (scale == 0.0) scale = 1.0;
    for (size_t c = 0; c < geo.cycles.size(); ++c) {
        if (geo.degree[c] == 0) continue;
        if (std::abs(flux[c] * scale - geo.degree[c]) > 1e-9 * std::max(1.0, std::abs(static_cast<double>(geo.degree[c]))))
            throw Error("NonIntegralFlux", "2-cycle fluxes need inconsistent rescaling factors");
    }
    geo.snap_scale = scale;
    for (int64_t s = 0; s < S; ++s) geo.om[s] *= scale;

    if (n == 1 && geo.degree[0] <= 0)
        throw Error("NegativeOrientation", "degree must be positive (orientation convention)");

    for (int64_t s = 0; s < S; ++s) {
        double p = pfaffian(geo.om[s]);
        if (std::abs(p) < 1e-12) throw Error("NonSymplectic", "omega degenerate at a grid site");
        if (p < 0.0) throw Error("NegativeOrientation", "Liouville density negative at a grid site");
        geo.rho[s] = p;
    }

    geo.g_link.resize(d);
    geo.rho_link.resize(d);
    for (int ax = 0; ax < d; ++ax) {
        geo.g_link[ax].resize(S);
        geo.rho_link[ax].resize(S);
        for (int64_t s = 0; s < S; ++s) {
            MatrixXd gl = real_part_checked(link_average(cfg.metric, geo, s, ax), "metric");
            geo.g_link[ax][s] = 0.5 * (gl + gl.transpose().eval());
            MatrixXd ol = real_part_checked(link_average(cfg.omega, geo, s, ax), "omega") * scale;
            geo.rho_link[ax][s] = pfaffian(0.5 * (ol - ol.transpose().eval()));
            if (geo.rho_link[ax][s] <= 0.0)
                throw Error("NegativeOrientation", "Liouville density not positive on a link");
        }
    }

    // Integral consistency of the Liouville volume. n=1: site-sampled volume
    // must equal 2pi*d (catches aliased field content). n=2: the identity
    // vol = (2pi)^2 * Pf(degree matrix) holds pointwise only for constant
    // omega, so the check binds there alone.
    double vol = liouville_volume(geo);
    if (n == 1) {
        double want = kTwoPi * static_cast<double>(geo.degree[0]);
        if (std::abs(vol - want) > 1e-6 * std::max(1.0, std::abs(want)))
            throw Error("NonIntegralFlux", "Liouville volume inconsistent with the degree");
    } else if (cfg.omega.kind == FieldSpec::Kind::Constant) {
        double pf = static_cast<double>(geo.degree[0]) * geo.degree[5] -
                    static_cast<double>(geo.degree[1]) * geo.degree[4] +
                    static_cast<double>(geo.degree[2]) * geo.degree[3];
        double want = kTwoPi * kTwoPi * pf;
        if (std::abs(vol - want) > 1e-6 * std::max(1.0, std::abs(want)))
            throw Error("NonIntegralFlux", "Liouville volume inconsistent with 2-cycle degrees");
    }

    return geo;
}

PointFrame frame_at(const GeometryField& geom, int64_t site) {
    return frame_from_matrices(geom.g[site], geom.om[site], geom.V[site]);
}

double liouville_volume(const GeometryField& geom) {
    double cell = 1.0;
    for (int t = 0; t < geom.dim(); ++t) cell *= geom.a;
    double v = 0.0;
    for (int64_t s = 0; s < geom.sites(); ++s) v += geom.rho[s] * cell;
    return v;
}

double max_frequency(const GeometryField& geom) {
    double maxB = 0.0;
    for (int64_t s = 0; s < geom.sites(); ++s)
        maxB = std::max(maxB, frame_at(geom, s).B.maxCoeff());
    return maxB;
}

}  // namespace maglap
