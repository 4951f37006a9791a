#include "maglap/lattice_operator.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_map>

namespace maglap {

namespace {

// Fills link phases on one N x N plane, plaquette fluxes phi[i + N*j].
// The interior links realize every plaquette flux exactly; one wrap column
// (row) carries the accumulated winding. Requires sum(phi) = 2 pi * (integer),
// which build_gauge arranges by defect spreading.
void landau_plane(int N, const std::vector<double>& phi, GaugeStyle style,
                  std::vector<double>& th1, std::vector<double>& th2) {
    th1.assign(static_cast<size_t>(N) * N, 0.0);
    th2.assign(static_cast<size_t>(N) * N, 0.0);
    auto at = [N](int i, int j) { return static_cast<size_t>(i) + static_cast<size_t>(N) * j; };
    if (style == GaugeStyle::LandauX) {
        // th1 = 0 except the wrap column i = N-1; th2 accumulates along axis 1.
        std::vector<double> rowsum(N, 0.0);
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) rowsum[j] += phi[at(i, j)];
        double acc = 0.0;
        for (int j = 0; j < N; ++j) {
            th1[at(N - 1, j)] = -acc;
            acc += rowsum[j];
        }
        for (int j = 0; j < N; ++j) {
            double run = 0.0;
            for (int i = 0; i < N; ++i) {
                th2[at(i, j)] = run;
                run += phi[at(i, j)];
            }
        }
    } else {
        // Mirror image: th2 = 0 except the wrap row j = N-1.
        std::vector<double> colsum(N, 0.0);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) colsum[i] += phi[at(i, j)];
        double acc = 0.0;
        for (int i = 0; i < N; ++i) {
            th2[at(i, N - 1)] = acc;
            acc += colsum[i];
        }
        for (int i = 0; i < N; ++i) {
            double run = 0.0;
            for (int j = 0; j < N; ++j) {
                th1[at(i, j)] = -run;
                run += phi[at(i, j)];
            }
        }
    }
}

int cycle_of(const GeometryField& geom, int ax1, int ax2) {
    for (size_t c = 0; c < geom.cycles.size(); ++c)
        if (geom.cycles[c] == std::make_pair(ax1, ax2)) return static_cast<int>(c);
    throw Error("BadArgument", "no such 2-cycle");
}

// Plaquette fluxes of k * omega over one axis plane, with the defect against
// the exact total 2 pi k d spread uniformly so the sum is exact.
std::vector<double> plane_fluxes(const GeometryField& geom, int k, int ax1, int ax2,
                                 const std::vector<int>& base_coords) {
    const int N = geom.N;
    std::vector<double> phi(static_cast<size_t>(N) * N, 0.0);
    double total = 0.0;
    std::vector<int> c = base_coords;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            c[ax1] = i;
            c[ax2] = j;
            double f = static_cast<double>(k) * geom.plaq_flux(geom.site_index(c), ax1, ax2);
            phi[static_cast<size_t>(i) + static_cast<size_t>(N) * j] = f;
            total += f;
        }
    const double want = kTwoPi * static_cast<double>(k) *
                        static_cast<double>(geom.degree[cycle_of(geom, ax1, ax2)]);
    if (std::abs(total - want) > 1e-6 * kTwoPi * std::max(1.0, std::abs(want) / kTwoPi))
        throw Error("FluxMismatch", "plaquette flux total is not the integer winding");
    const double defect = (want - total) / (static_cast<double>(N) * N);
    for (double& f : phi) f += defect;
    return phi;
}

double wrap_delta(int from, int to, int N) {
    int d = ((to - from) % N + N) % N;           // [0, N)
    if (2 * d > N) d -= N;                       // (-N/2, N/2], ties positive
    return d;
}

MatrixXcd eval_site_field(const FieldSpec& fs, const GeometryField& geom, int64_t site) {
    if (fs.kind == FieldSpec::Kind::Grid) return fs.grid[static_cast<size_t>(site)];
    return fs.eval_point(geom.site_point(site));
}

}  // namespace

GaugeLattice build_gauge(const GeometryField& geom, int k, GaugeStyle style) {
    if (k < 0) throw Error("BadArgument", "tensor power k must be >= 0");
    GaugeLattice gl;
    gl.n = geom.n;
    gl.N = geom.N;
    gl.k = k;
    gl.style = style;
    const int64_t S = geom.sites();
    gl.theta.assign(static_cast<size_t>(geom.dim()), std::vector<double>(static_cast<size_t>(S), 0.0));
    if (k == 0) return gl;

    const int N = geom.N;
    if (geom.n == 1) {
        auto phi = plane_fluxes(geom, k, 0, 1, {0, 0});
        std::vector<double> th1, th2;
        landau_plane(N, phi, style, th1, th2);
        for (int64_t s = 0; s < S; ++s) {
            auto c = geom.site_coords(s);
            size_t p = static_cast<size_t>(c[0]) + static_cast<size_t>(N) * c[1];
            gl.theta[0][static_cast<size_t>(s)] = th1[p];
            gl.theta[1][static_cast<size_t>(s)] = th2[p];
        }
        gl.phi.push_back(std::move(phi));
        return gl;
    }

    // n = 2: the construction needs block-product flux. Cross-plane plaquettes
    // must vanish and each in-plane flux must not depend on the transverse
    // coordinates; otherwise no per-plane Landau gauge exists here.
    const double scale = 1.0 + static_cast<double>(k);
    for (int64_t s = 0; s < S; ++s) {
        for (auto [i, j] : {std::pair<int, int>{0, 2}, {0, 3}, {1, 2}, {1, 3}})
            if (std::abs(geom.plaq_flux(s, i, j)) * k > 1e-10 * scale)
                throw Error("UnsupportedGauge", "cross-plane flux present; need block-product form");
        auto c = geom.site_coords(s);
        std::vector<int> c01 = c, c23 = c;
        c01[2] = c01[3] = 0;
        c23[0] = c23[1] = 0;
        if (std::abs(geom.plaq_flux(s, 0, 1) - geom.plaq_flux(geom.site_index(c01), 0, 1)) * k >
            1e-10 * scale)
            throw Error("UnsupportedGauge", "omega_{01} depends on (x2,x3); need block-product form");
        if (std::abs(geom.plaq_flux(s, 2, 3) - geom.plaq_flux(geom.site_index(c23), 2, 3)) * k >
            1e-10 * scale)
            throw Error("UnsupportedGauge", "omega_{23} depends on (x0,x1); need block-product form");
    }
    auto phi01 = plane_fluxes(geom, k, 0, 1, {0, 0, 0, 0});
    auto phi23 = plane_fluxes(geom, k, 2, 3, {0, 0, 0, 0});
    std::vector<double> a1, a2, b1, b2;
    landau_plane(N, phi01, style, a1, a2);
    landau_plane(N, phi23, style, b1, b2);
    for (int64_t s = 0; s < S; ++s) {
        auto c = geom.site_coords(s);
        size_t p01 = static_cast<size_t>(c[0]) + static_cast<size_t>(N) * c[1];
        size_t p23 = static_cast<size_t>(c[2]) + static_cast<size_t>(N) * c[3];
        gl.theta[0][static_cast<size_t>(s)] = a1[p01];
        gl.theta[1][static_cast<size_t>(s)] = a2[p01];
        gl.theta[2][static_cast<size_t>(s)] = b1[p23];
        gl.theta[3][static_cast<size_t>(s)] = b2[p23];
    }
    gl.phi.push_back(std::move(phi01));
    gl.phi.push_back(std::move(phi23));
    return gl;
}

void SparseHermitian::matvec(const cdouble* x, cdouble* y, int threads) const {
    parallel_for(dim, threads, [&](int64_t row) {
        cdouble acc = 0.0;
        for (int64_t p = row_ptr[static_cast<size_t>(row)]; p < row_ptr[static_cast<size_t>(row) + 1]; ++p)
            acc += val[static_cast<size_t>(p)] * x[col[static_cast<size_t>(p)]];
        y[row] = acc;
    });
}

VectorXcd SparseHermitian::matvec(const VectorXcd& x, int threads) const {
    if (x.size() != dim) throw Error("DimensionMismatch", "matvec size mismatch");
    VectorXcd y(dim);
    matvec(x.data(), y.data(), threads);
    return y;
}

cdouble SparseHermitian::weighted_dot(const VectorXcd& u, const VectorXcd& v) const {
    cdouble s = 0.0;
    for (int64_t i = 0; i < dim; ++i)
        s += std::conj(v[i]) * u[i] * w[static_cast<size_t>(i)];
    return s;
}

double SparseHermitian::weighted_norm(const VectorXcd& u) const {
    return std::sqrt(std::max(0.0, weighted_dot(u, u).real()));
}

double SparseHermitian::hermitian_defect() const {
    // Index transposed entries once, then compare W H against its adjoint.
    std::unordered_map<int64_t, cdouble> m;
    m.reserve(val.size() * 2);
    for (int64_t r = 0; r < dim; ++r)
        for (int64_t p = row_ptr[static_cast<size_t>(r)]; p < row_ptr[static_cast<size_t>(r) + 1]; ++p)
            m[r * dim + col[static_cast<size_t>(p)]] =
                w[static_cast<size_t>(r)] * val[static_cast<size_t>(p)];
    double worst = 0.0;
    for (const auto& [key, v] : m) {
        int64_t r = key / dim, c = key % dim;
        auto it = m.find(c * dim + r);
        cdouble other = (it == m.end()) ? cdouble(0.0) : it->second;
        worst = std::max(worst, std::abs(v - std::conj(other)));
    }
    return worst;
}

double SparseHermitian::norm_estimate() const {
    double best = 0.0;
    for (int64_t r = 0; r < dim; ++r) {
        double s = 0.0;
        for (int64_t p = row_ptr[static_cast<size_t>(r)]; p < row_ptr[static_cast<size_t>(r) + 1]; ++p)
            s += std::abs(val[static_cast<size_t>(p)]);
        best = std::max(best, s);
    }
    return best;
}

MatrixXcd SparseHermitian::dense_standardized() const {
    MatrixXcd M = MatrixXcd::Zero(dim, dim);
    for (int64_t r = 0; r < dim; ++r) {
        double sr = std::sqrt(w[static_cast<size_t>(r)]);
        for (int64_t p = row_ptr[static_cast<size_t>(r)]; p < row_ptr[static_cast<size_t>(r) + 1]; ++p) {
            int64_t c = col[static_cast<size_t>(p)];
            M(r, c) += val[static_cast<size_t>(p)] * sr / std::sqrt(w[static_cast<size_t>(c)]);
        }
    }
    // Exactly Hermitian input for the dense solver; the defect is solver noise.
    return 0.5 * (M + M.adjoint());
}

SparseHermitian SparseHermitian::from_triplets(int64_t dim, std::vector<double> weights,
                                               std::vector<std::tuple<int64_t, int64_t, cdouble>> trips) {
    if (static_cast<int64_t>(weights.size()) != dim)
        throw Error("BadArgument", "weight vector size mismatch");
    std::sort(trips.begin(), trips.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
    });
    SparseHermitian H;
    H.dim = dim;
    H.w = std::move(weights);
    H.row_ptr.assign(static_cast<size_t>(dim) + 1, 0);
    size_t i = 0;
    for (int64_t r = 0; r < dim; ++r) {
        H.row_ptr[static_cast<size_t>(r)] = static_cast<int64_t>(H.col.size());
        while (i < trips.size() && std::get<0>(trips[i]) == r) {
            int64_t c = std::get<1>(trips[i]);
            cdouble v = 0.0;
            while (i < trips.size() && std::get<0>(trips[i]) == r && std::get<1>(trips[i]) == c) {
                v += std::get<2>(trips[i]);
                ++i;
            }
            if (c < 0 || c >= dim) throw Error("BadArgument", "triplet column out of range");
            H.col.push_back(c);
            H.val.push_back(v);
        }
    }
    H.row_ptr[static_cast<size_t>(dim)] = static_cast<int64_t>(H.col.size());
    return H;
}

SparseHermitian assemble_laplacian(const GeometryField& geom, const GaugeLattice& gauge, int k,
                                   const PerturbationSpec* pert) {
    if (gauge.N != geom.N || gauge.n != geom.n)
        throw Error("BadArgument", "gauge lattice does not match the geometry grid");
    if (gauge.k != k) throw Error("BadArgument", "gauge built for a different tensor power");
    const int d = geom.dim(), r = geom.r;
    const int64_t S = geom.sites();
    const int64_t D = S * r;
    const double a = geom.a;
    double cellvol = 1.0;
    for (int t = 0; t < d; ++t) cellvol *= a;

    std::vector<double> w(static_cast<size_t>(D));
    for (int64_t s = 0; s < S; ++s)
        for (int l = 0; l < r; ++l)
            w[static_cast<size_t>(s * r + l)] = geom.rho[static_cast<size_t>(s)] * cellvol;

    // Quadratic form Q with <Hu,v>_rho = v^dag Q u; assembled entry-wise, then
    // divided by the row weight. unordered accumulation keyed row * D + col.
    std::unordered_map<int64_t, cdouble> Q;
    Q.reserve(static_cast<size_t>(D) * (4 * d + 2));
    auto add = [&](int64_t row, int64_t colm, cdouble v) { Q[row * D + colm] += v; };

    if (pert && !pert->a.empty() && static_cast<int>(pert->a.size()) != d)
        throw Error("BadArgument", "perturbation needs one coefficient field per axis");

    for (int64_t s = 0; s < S; ++s) {
        const MatrixXd ginv_site = geom.g[static_cast<size_t>(s)].inverse();
        const double rho_site = geom.rho[static_cast<size_t>(s)];
        std::vector<int64_t> nb(static_cast<size_t>(d));
        for (int ax = 0; ax < d; ++ax) nb[static_cast<size_t>(ax)] = geom.neighbor(s, ax, +1);

        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double W, rho_w;
                if (i == j) {
                    const MatrixXd gi = geom.g_link[static_cast<size_t>(i)][static_cast<size_t>(s)].inverse();
                    W = gi(i, i);
                    rho_w = geom.rho_link[static_cast<size_t>(i)][static_cast<size_t>(s)];
                } else {
                    W = ginv_site(i, j);
                    rho_w = rho_site;
                }
                const double wt = 0.5 * cellvol * W * rho_w / (a * a);
                if (wt == 0.0) continue;
                const cdouble Ui = gauge.link(i, s);
                const cdouble Uj = gauge.link(j, s);
                const int64_t xi = nb[static_cast<size_t>(i)], xj = nb[static_cast<size_t>(j)];
                for (int l = 0; l < r; ++l) {
                    add(xi * r + l, xj * r + l, wt * std::conj(Ui) * Uj);
                    add(xi * r + l, s * r + l, -wt * std::conj(Ui));
                    add(s * r + l, xj * r + l, -wt * Uj);
                    add(s * r + l, s * r + l, cdouble(wt));
                }
            }

        if (k != 0) {
            const MatrixXcd& V = geom.V[static_cast<size_t>(s)];
            const double c = cellvol * rho_site * static_cast<double>(k);
            for (int l = 0; l < r; ++l)
                for (int m = 0; m < r; ++m)
                    if (V(l, m) != cdouble(0.0)) add(s * r + l, s * r + m, c * V(l, m));
        }

        if (pert) {
            const double c = cellvol * rho_site / (2.0 * a);
            for (int ax = 0; ax < static_cast<int>(pert->a.size()); ++ax) {
                MatrixXcd A = eval_site_field(pert->a[static_cast<size_t>(ax)], geom, s);
                if (A.rows() != r || A.cols() != r)
                    throw Error("BadArgument", "perturbation coefficient must be r x r");
                const cdouble U = gauge.link(ax, s);
                const int64_t xn = nb[static_cast<size_t>(ax)];
                for (int l = 0; l < r; ++l)
                    for (int m = 0; m < r; ++m) {
                        if (A(l, m) == cdouble(0.0)) continue;
                        cdouble hop = c * A(l, m) * U;
                        cdouble onsite = -c * A(l, m);
                        add(s * r + l, xn * r + m, hop);
                        add(xn * r + m, s * r + l, std::conj(hop));
                        add(s * r + l, s * r + m, onsite);
                        add(s * r + m, s * r + l, std::conj(onsite));
                    }
            }
            if (pert->has_b) {
                MatrixXcd b = eval_site_field(pert->b, geom, s);
                if (b.rows() != r || b.cols() != r)
                    throw Error("BadArgument", "zero-order coefficient must be r x r");
                MatrixXcd bh = 0.5 * (b + b.adjoint());
                const double cb = cellvol * rho_site;
                for (int l = 0; l < r; ++l)
                    for (int m = 0; m < r; ++m)
                        if (bh(l, m) != cdouble(0.0)) add(s * r + l, s * r + m, cb * bh(l, m));
            }
        }
    }

    std::vector<std::tuple<int64_t, int64_t, cdouble>> trips;
    trips.reserve(Q.size());
    for (const auto& [key, v] : Q) {
        int64_t row = key / D, colm = key % D;
        trips.emplace_back(row, colm, v / w[static_cast<size_t>(row)]);
    }
    SparseHermitian H = SparseHermitian::from_triplets(D, std::move(w), std::move(trips));
    const double scale = std::max(1.0, H.norm_estimate()) * cellvol *
                         *std::max_element(geom.rho.begin(), geom.rho.end());
    if (H.hermitian_defect() > 1e-11 * scale)
        throw Error("NonHermitianAssembly", "weighted-Hermiticity self-check failed");
    return H;
}

cdouble transport_frame(const GaugeLattice& gauge, const GeometryField& geom, int64_t y_site,
                        int64_t x_site) {
    auto cy = geom.site_coords(y_site);
    auto cx = geom.site_coords(x_site);
    cdouble phase = 1.0;
    std::vector<int> cur = cy;
    for (int ax = 0; ax < geom.dim(); ++ax) {
        int delta = static_cast<int>(wrap_delta(cy[ax], cx[ax], geom.N));
        if (delta > 0)
            for (int t = 0; t < delta; ++t) {
                phase *= std::conj(gauge.link(ax, geom.site_index(cur)));
                cur[ax] = (cur[ax] + 1) % geom.N;
            }
        else
            for (int t = 0; t < -delta; ++t) {
                cur[ax] = (cur[ax] - 1 + geom.N) % geom.N;
                phase *= gauge.link(ax, geom.site_index(cur));
            }
    }
    return phase;
}

LatticeSection peaked_section(const GeometryField& geom, const GaugeLattice& gauge,
                              const PointFrame& frame, int64_t y_site, const SymbolPolynomial& f,
                              const VectorXcd& avec, int k, double cutoff) {
    if (k < 1) throw Error("BadArgument", "peaked section needs k >= 1");
    if (f.r() != 1 || f.n() != geom.n)
        throw Error("BadArgument", "profile must be a scalar polynomial in n variables");
    if (avec.size() != geom.r) throw Error("BadArgument", "fiber direction must have r entries");
    const double maxB = frame.B.maxCoeff();
    const double need =
        std::min(5.0 * std::sqrt(kTwoPi / (static_cast<double>(k) * maxB)), 0.49);
    if (cutoff < need)
        throw Error("CutoffTooSmall", "cutoff must cover five magnetic lengths or the torus");

    const int dimn = geom.dim();
    const int64_t S = geom.sites();
    LatticeSection sec;
    sec.dim = S * geom.r;
    sec.r = geom.r;
    sec.values.assign(static_cast<size_t>(sec.dim), cdouble(0.0));
    const auto cy = geom.site_coords(y_site);
    const double amp = std::pow(static_cast<double>(k), geom.n / 2.0);
    const double sqk = std::sqrt(static_cast<double>(k));
    // Raised-cosine roll-off between half the cutoff and the cutoff. Flatter
    // transitions shed their commutator junk faster than the profile tail
    // thins out, which breaks the k^{-1/2} residual scaling at coarse k.
    auto bump = [cutoff](double s) {
        if (s <= 0.5 * cutoff) return 1.0;
        if (s >= cutoff) return 0.0;
        const double t = (s - 0.5 * cutoff) / (0.5 * cutoff);
        const double ct = std::cos(0.5 * kPi * t);
        return ct * ct;
    };

    for (int64_t s = 0; s < S; ++s) {
        auto cx = geom.site_coords(s);
        VectorXd xi(dimn);
        for (int ax = 0; ax < dimn; ++ax) xi[ax] = geom.a * wrap_delta(cy[ax], cx[ax], geom.N);
        const double eunorm = xi.norm();
        if (eunorm >= cutoff) continue;
        const double psi = bump(eunorm);
        if (psi == 0.0) continue;
        const double q2 = frame.xi_norm2(xi);
        const double gauss = std::exp(-0.25 * static_cast<double>(k) * q2);
        if (gauss * psi < 1e-300) continue;
        const cdouble fv = f.eval(sqk * frame.z_of(xi))(0, 0);
        // Staircase transport times the flux through the region between the
        // staircase and the straight ray equals radial transport, the frame
        // the Gaussian profile is an approximate eigensection in.
        double tri = 0.0;
        for (int i = 0; i < dimn; ++i)
            for (int j = i + 1; j < dimn; ++j) tri += frame.Om(i, j) * xi[i] * xi[j];
        const cdouble phase = transport_frame(gauge, geom, y_site, s) *
                              std::polar(1.0, -0.5 * static_cast<double>(k) * tri);
        const cdouble scalar = phase * amp * gauss * psi * fv;
        for (int l = 0; l < geom.r; ++l)
            sec.values[static_cast<size_t>(s * geom.r + l)] = scalar * avec[l];
    }
    return sec;
}

void export_binary(const SparseHermitian& H, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IoError", "cannot open " + path);
    const char magic[4] = {'M', 'L', 'S', 'P'};
    uint32_t version = 1;
    int64_t dim = H.dim, nnz = static_cast<int64_t>(H.val.size());
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    out.write(reinterpret_cast<const char*>(&nnz), sizeof nnz);
    out.write(reinterpret_cast<const char*>(H.row_ptr.data()),
              static_cast<std::streamsize>(H.row_ptr.size() * sizeof(int64_t)));
    out.write(reinterpret_cast<const char*>(H.col.data()),
              static_cast<std::streamsize>(H.col.size() * sizeof(int64_t)));
    out.write(reinterpret_cast<const char*>(H.val.data()),
              static_cast<std::streamsize>(H.val.size() * sizeof(cdouble)));
    out.write(reinterpret_cast<const char*>(H.w.data()),
              static_cast<std::streamsize>(H.w.size() * sizeof(double)));
    if (!out) throw Error("IoError", "short write to " + path);
}

void export_matrix_market(const SparseHermitian& H, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("IoError", "cannot open " + path);
    out << "%%MatrixMarket matrix coordinate complex general\n";
    out << "% row weights in trailing comment lines: %w <index> <weight>\n";
    out << H.dim << ' ' << H.dim << ' ' << H.val.size() << '\n';
    char buf[160];
    for (int64_t r = 0; r < H.dim; ++r)
        for (int64_t p = H.row_ptr[static_cast<size_t>(r)]; p < H.row_ptr[static_cast<size_t>(r) + 1]; ++p) {
            std::snprintf(buf, sizeof buf, "%lld %lld %.17g %.17g\n",
                          static_cast<long long>(r + 1),
                          static_cast<long long>(H.col[static_cast<size_t>(p)] + 1),
                          H.val[static_cast<size_t>(p)].real(), H.val[static_cast<size_t>(p)].imag());
            out << buf;
        }
    for (int64_t i = 0; i < H.dim; ++i) {
        std::snprintf(buf, sizeof buf, "%%w %lld %.17g\n", static_cast<long long>(i + 1),
                      H.w[static_cast<size_t>(i)]);
        out << buf;
    }
    if (!out) throw Error("IoError", "short write to " + path);
}

void export_section_csv(const LatticeSection& sec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("IoError", "cannot open " + path);
    out << "site,component,re,im\n";
    char buf[96];
    const int64_t sites = sec.dim / sec.r;
    for (int64_t s = 0; s < sites; ++s)
        for (int l = 0; l < sec.r; ++l) {
            const cdouble v = sec.values[static_cast<size_t>(s * sec.r + l)];
            std::snprintf(buf, sizeof buf, "%lld,%d,%.17g,%.17g\n", static_cast<long long>(s), l,
                          v.real(), v.imag());
            out << buf;
        }
    if (!out) throw Error("IoError", "short write to " + path);
}

}  // namespace maglap
