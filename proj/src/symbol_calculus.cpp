#include "maglap/symbol_calculus.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace maglap {

namespace {
constexpr int kFactorialCap = 20;

void check_cap(int cap) {
    if (cap > kFactorialCap)
        throw Error("CapExceeded", "degree cap exceeds exact-double factorial range (20)");
}
}  // namespace

PolySpace::PolySpace(int n_, int cap_z_, int cap_zb_)
    : n(n_), cap_z(cap_z_), cap_zb(cap_zb_), z_table(n_, cap_z_), zb_table(n_, cap_zb_) {
    check_cap(cap_z_);
    check_cap(cap_zb_);
}

int PolySpace::pair_index(const MIdx& a, const MIdx& b) const {
    int ia = z_table.index_of(a), ib = zb_table.index_of(b);
    if (ia < 0 || ib < 0) return -1;
    return ia * zb_table.size() + ib;
}

std::pair<MIdx, MIdx> PolySpace::pair_at(int idx) const {
    return {z_table.at(idx / zb_table.size()), zb_table.at(idx % zb_table.size())};
}

MatrixXd PolySpace::gram() const {
    const int D = size();
    MatrixXd G = MatrixXd::Zero(D, D);
    for (int p = 0; p < D; ++p) {
        auto [a, b] = pair_at(p);
        for (int q = 0; q < D; ++q) {
            auto [c, d] = pair_at(q);
            double val = 1.0;
            bool zero = false;
            for (int i = 0; i < n; ++i) {
                if (a[i] + d[i] != b[i] + c[i]) {
                    zero = true;
                    break;
                }
                double f = 1.0;
                for (int j = 2; j <= a[i] + d[i]; ++j) f *= j;
                val *= f;
            }
            if (zero) continue;
            G(p, q) = val / std::sqrt(mi_factorial(a) * mi_factorial(b) * mi_factorial(c) *
                                      mi_factorial(d));
        }
    }
    return G;
}

void SymbolPolynomial::add_term(const MIdx& za, const MIdx& zb, const MatrixXcd& c) {
    auto key = std::make_pair(za, zb);
    auto it = coef_.find(key);
    if (it == coef_.end())
        coef_[key] = c;
    else {
        it->second += c;
        if (it->second.cwiseAbs().maxCoeff() == 0.0) coef_.erase(it);
    }
}

void SymbolPolynomial::scale(cdouble s) {
    for (auto& [k, v] : coef_) v *= s;
}

SymbolPolynomial& SymbolPolynomial::operator+=(const SymbolPolynomial& other) {
    if (other.n_ != n_ || other.r_ != r_) throw Error("BadArgument", "symbol shape mismatch");
    for (const auto& [k, v] : other.coef_) add_term(k.first, k.second, v);
    return *this;
}

int SymbolPolynomial::deg_z() const {
    int d = 0;
    for (const auto& [k, v] : coef_) d = std::max(d, mi_weight(k.first));
    return d;
}

int SymbolPolynomial::deg_zb() const {
    int d = 0;
    for (const auto& [k, v] : coef_) d = std::max(d, mi_weight(k.second));
    return d;
}

MatrixXcd SymbolPolynomial::eval(const VectorXcd& z) const {
    MatrixXcd out = MatrixXcd::Zero(r_, r_);
    for (const auto& [k, v] : coef_) {
        cdouble m = 1.0;
        for (int i = 0; i < n_; ++i) {
            for (int t = 0; t < k.first[i]; ++t) m *= z(i);
            for (int t = 0; t < k.second[i]; ++t) m *= std::conj(z(i));
        }
        out += m * v;
    }
    return out;
}

SymbolPolynomial SymbolPolynomial::scalar(int n) { return SymbolPolynomial(n, 1); }

double SymbolPolynomial::scalar_coeff(const MIdx& za, const MIdx& zb) const {
    auto it = coef_.find(std::make_pair(za, zb));
    if (it == coef_.end()) return 0.0;
    return it->second(0, 0).real();
}

LadderMatrices ladder_matrices(const PolySpace& space) {
    const int D = space.size();
    LadderMatrices L;
    for (int i = 0; i < space.n; ++i) {
        MatrixXcd A = MatrixXcd::Zero(D, D);
        MatrixXcd C = MatrixXcd::Zero(D, D);
        for (int p = 0; p < D; ++p) {
            auto [a, b] = space.pair_at(p);
            // a_i = d/dzbar_i: hat z^{a,b} -> sqrt(b_i) hat z^{a, b - e_i}
            if (b[i] > 0) {
                MIdx b2 = b;
                b2[i] -= 1;
                A(space.pair_index(a, b2), p) = std::sqrt(static_cast<double>(b[i]));
            }
            // adag_i = zbar_i - d/dz_i
            MIdx b3 = b;
            b3[i] += 1;
            int up = space.pair_index(a, b3);
            if (up >= 0) C(up, p) = std::sqrt(static_cast<double>(b[i] + 1));
            if (a[i] > 0) {
                MIdx a2 = a;
                a2[i] -= 1;
                C(space.pair_index(a2, b), p) -= std::sqrt(static_cast<double>(a[i]));
            }
        }
        L.a.push_back(std::move(A));
        L.adag.push_back(std::move(C));
    }
    return L;
}

MatrixXcd annihilation_D(int n, int cap, int i) {
    check_cap(cap);
    MultiIndexTable tab(n, cap);
    MatrixXcd A = MatrixXcd::Zero(tab.size(), tab.size());
    for (int p = 0; p < tab.size(); ++p) {
        MIdx al = tab.at(p);
        if (al[i] == 0) continue;
        double s = std::sqrt(static_cast<double>(al[i]));
        al[i] -= 1;
        A(tab.index_of(al), p) = s;
    }
    return A;
}

MatrixXcd creation_D(int n, int cap, int i) {
    check_cap(cap);
    MultiIndexTable tab(n, cap);
    MatrixXcd C = MatrixXcd::Zero(tab.size(), tab.size());
    for (int p = 0; p < tab.size(); ++p) {
        MIdx al = tab.at(p);
        double s = std::sqrt(static_cast<double>(al[i] + 1));
        al[i] += 1;
        int q = tab.index_of(al);
        if (q >= 0) C(q, p) = s;
    }
    return C;
}

SymbolPolynomial pab_polynomial(const MIdx& alpha, const MIdx& beta) {
    const int n = static_cast<int>(alpha.size());
    if (beta.size() != alpha.size()) throw Error("BadArgument", "p_ab index size mismatch");
    check_cap(mi_weight(alpha));
    check_cap(mi_weight(beta));
    SymbolPolynomial q = SymbolPolynomial::scalar(n);
    MatrixXcd one = MatrixXcd::Constant(1, 1, cdouble((mi_weight(beta) % 2 == 0) ? 1.0 : -1.0, 0.0));
    MIdx zero(n, 0);
    q.add_term(beta, zero, one);  // (-z)^beta
    for (int i = 0; i < n; ++i)
        for (int rep = 0; rep < alpha[i]; ++rep) {
            SymbolPolynomial next = SymbolPolynomial::scalar(n);
            for (const auto& [key, c] : q.terms()) {
                MIdx zb = key.second;
                zb[i] += 1;
                next.add_term(key.first, zb, c);  // zbar_i *
                if (key.first[i] > 0) {           // - d/dz_i
                    MIdx za = key.first;
                    za[i] -= 1;
                    next.add_term(za, key.second, -static_cast<double>(key.first[i]) * c);
                }
            }
            q = std::move(next);
        }
    q.scale(1.0 / std::sqrt(mi_factorial(alpha) * mi_factorial(beta)));
    return q;
}

MatrixXcd op_quantize(const SymbolPolynomial& q, const PolySpace& space, int cap_D) {
    check_cap(cap_D);
    if (q.n() != space.n) throw Error("BadArgument", "symbol dimension mismatch");
    if (q.deg_z() > space.cap_z || q.deg_zb() > space.cap_zb)
        throw Error("CapExceeded", "symbol degrees exceed the PolySpace caps");

    // Change of basis T: columns are p_{alpha beta} in raw monomial
    // coordinates; (alpha, beta) runs over (zb_table, z_table) so that the
    // column count matches the monomial dimension.
    const int D = space.size();
    const int nb = space.zb_table.size(), nz = space.z_table.size();
    MatrixXcd T = MatrixXcd::Zero(D, D);
    std::vector<std::pair<MIdx, MIdx>> cols(D);  // (alpha, beta)
    for (int ia = 0; ia < nb; ++ia)
        for (int ib = 0; ib < nz; ++ib) {
            int col = ia * nz + ib;
            cols[col] = {space.zb_table.at(ia), space.z_table.at(ib)};
            SymbolPolynomial p = pab_polynomial(cols[col].first, cols[col].second);
            for (const auto& [key, c] : p.terms()) {
                int row = space.pair_index(key.first, key.second);
                if (row < 0) throw Error("CapExceeded", "p_ab escapes the PolySpace");
                T(row, col) = c(0, 0);
            }
        }
    Eigen::PartialPivLU<MatrixXcd> lu(T);

    const int r = q.r();
    MultiIndexTable dtab(space.n, cap_D);
    const int DD = dtab.size() * r;
    MatrixXcd M = MatrixXcd::Zero(DD, DD);

    for (int l = 0; l < r; ++l)
        for (int m = 0; m < r; ++m) {
            VectorXcd rhs = VectorXcd::Zero(D);
            for (const auto& [key, c] : q.terms()) {
                int row = space.pair_index(key.first, key.second);
                rhs(row) = c(l, m);
            }
            if (rhs.cwiseAbs().maxCoeff() == 0.0) continue;
            VectorXcd cvec = lu.solve(rhs);
            for (int col = 0; col < D; ++col) {
                if (std::abs(cvec(col)) < 1e-300) continue;
                int ia = dtab.index_of(cols[col].first);
                int ib = dtab.index_of(cols[col].second);
                if (ia < 0 || ib < 0) continue;  // restriction to D_{<=cap_D}
                M(ia * r + l, ib * r + m) += cvec(col);
            }
        }
    return M;
}

SymbolPolynomial projector_symbol_polynomial(const PointFrame& frame, const OscillatorBasis& basis,
                                             const std::vector<int>& flat_indices) {
    SymbolPolynomial sigma(frame.n, frame.r);
    for (int idx : flat_indices) {
        auto [ai, l] = basis.split(idx);
        SymbolPolynomial paa = pab_polynomial(basis.alphas.at(ai), basis.alphas.at(ai));
        MatrixXcd proj = frame.Zeta.col(l) * frame.Zeta.col(l).adjoint();
        for (const auto& [key, c] : paa.terms()) sigma.add_term(key.first, key.second, c(0, 0) * proj);
    }
    return sigma;
}

MatrixXcd model_projector_kernel(const PointFrame& frame, const SymbolPolynomial& sigma,
                                 const VectorXd& xi, const VectorXd& eta) {
    const int n = frame.n;
    double om = eta.dot(frame.Om * xi);
    double q2 = frame.xi_norm2(xi);
    cdouble pref = std::exp(cdouble(-q2 / 4.0, om / 2.0));
    double norm = std::pow(kTwoPi, -n);
    return norm * pref * sigma.eval(frame.z_of(xi));
}

MatrixXcd model_projector_kernel_scaled(const PointFrame& frame, const SymbolPolynomial& sigma,
                                        int k, const VectorXd& xi, const VectorXd& eta) {
    const int n = frame.n;
    double om = eta.dot(frame.Om * xi);
    double q2 = frame.xi_norm2(xi);
    double kk = static_cast<double>(k);
    cdouble pref = std::exp(cdouble(-kk * q2 / 4.0, kk * om / 2.0));
    double norm = std::pow(kk / kTwoPi, n);
    return norm * pref * sigma.eval(std::sqrt(kk) * frame.z_of(xi));
}

void gauss_hermite(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    MatrixXd J = MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) {
        double b = std::sqrt(i / 2.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(J);
    nodes.resize(m);
    weights.resize(m);
    const double sqrtpi = std::sqrt(kPi);
    for (int i = 0; i < m; ++i) {
        nodes[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        weights[i] = sqrtpi * v0 * v0;
    }
}

}  // namespace maglap
