#pragma once
// Polynomial symbol algebra on the model fiber: Bargmann-normalized
// monomials, ladder operators, the operator basis polynomials
//   p_ab = (a! b!)^{-1/2} (zbar - d/dz)^a (-z)^b,
// the quantization map Op (p_ab -> |a><b| on anti-holomorphic polynomials),
// and the closed-form model projector kernel
//   P^I_y(eta + xi, eta) = (2pi)^{-n} exp((i/2) omega_y(eta, xi)
//                          - |xi|_y^2 / 4) sigma^I(y, xi).
//
// Bargmann inner product: <f,g> = (2pi)^{-n} int e^{-|z|^2} f gbar dmu_E
// with dmu_E = prod_i (2 dRe z_i dIm z_i), so z^a zbar^b / sqrt(a! b!) has
// unit norm and zbar^alpha / sqrt(alpha!) is orthonormal.

#include "maglap/model_spectrum.hpp"

namespace maglap {

// Monomial tables for polynomials with z-degree <= cap_z and zbar-degree
// <= cap_zb. Basis order: pair index = iz * (#zbar) + izb, both graded-lex.
// Factorials are exact in double up to degree 20; higher caps are rejected.
struct PolySpace {
    int n = 0, cap_z = 0, cap_zb = 0;
    MultiIndexTable z_table, zb_table;

    PolySpace() = default;
    PolySpace(int n_, int cap_z_, int cap_zb_);
    int size() const { return z_table.size() * zb_table.size(); }
    int pair_index(const MIdx& a, const MIdx& b) const;
    std::pair<MIdx, MIdx> pair_at(int idx) const;

    // Gram matrix of the normalized monomials (they are not orthogonal when
    // mixed z/zbar degrees interact): <z^a zbar^b, z^c zbar^d> =
    // delta_{a+d, b+c} (a+d)! / sqrt(a! b! c! d!).
    MatrixXd gram() const;
};

// Matrix-valued polynomial in (z, zbar), raw monomial coefficients.
class SymbolPolynomial {
public:
    SymbolPolynomial() = default;
    SymbolPolynomial(int n, int r) : n_(n), r_(r) {}

    int n() const { return n_; }
    int r() const { return r_; }
    const std::map<std::pair<MIdx, MIdx>, MatrixXcd>& terms() const { return coef_; }

    void add_term(const MIdx& za, const MIdx& zb, const MatrixXcd& c);
    void scale(cdouble s);
    SymbolPolynomial& operator+=(const SymbolPolynomial& other);

    int deg_z() const;
    int deg_zb() const;
    MatrixXcd eval(const VectorXcd& z) const;

    // Scalar polynomial convenience (r = 1).
    static SymbolPolynomial scalar(int n);
    double scalar_coeff(const MIdx& za, const MIdx& zb) const;  // real part, r=1

private:
    int n_ = 0, r_ = 1;
    std::map<std::pair<MIdx, MIdx>, MatrixXcd> coef_;
};

struct LadderMatrices {
    // On the full PolySpace in the normalized monomial basis; creation is
    // truncated at the zbar cap (canonical commutation holds away from it).
    std::vector<MatrixXcd> a;     // a_i = d/dzbar_i
    std::vector<MatrixXcd> adag;  // adag_i = zbar_i - d/dz_i
};

LadderMatrices ladder_matrices(const PolySpace& space);

// Ladder operators restricted to anti-holomorphic polynomials of degree
// <= cap in the orthonormal basis |alpha> = zbar^alpha / sqrt(alpha!).
MatrixXcd annihilation_D(int n, int cap, int i);
MatrixXcd creation_D(int n, int cap, int i);

// p_ab as a scalar SymbolPolynomial.
SymbolPolynomial pab_polynomial(const MIdx& alpha, const MIdx& beta);

// Matrix of Op(q) restricted to D_{<=cap_D} (x) C^r in the basis
// |alpha> (x) e_l, flat index = alpha_index * r + l. The symbol is expanded
// in the p_ab basis of `space`; CapExceeded if q does not fit in `space`.
MatrixXcd op_quantize(const SymbolPolynomial& q, const PolySpace& space, int cap_D);

// sigma^I(y, .) = sum_{(alpha,l) in I} p_{alpha alpha} (x) zeta_l zeta_l^dag
// as an r x r matrix-valued polynomial built from a projector selection.
SymbolPolynomial projector_symbol_polynomial(const PointFrame& frame, const OscillatorBasis& basis,
                                             const std::vector<int>& flat_indices);

// Model projector kernel P^I_y(eta + xi, eta), an r x r matrix.
MatrixXcd model_projector_kernel(const PointFrame& frame, const SymbolPolynomial& sigma,
                                 const VectorXd& xi, const VectorXd& eta);

// Semiclassically scaled kernel (k/2pi)^n F_y^k e^{-k|xi|^2/4} sigma(k^{1/2} xi).
MatrixXcd model_projector_kernel_scaled(const PointFrame& frame, const SymbolPolynomial& sigma,
                                        int k, const VectorXd& xi, const VectorXd& eta);

// Gauss-Hermite rule for weight e^{-x^2} (Golub-Welsch); used by the
// quadrature oracles in tests and by the peaked-section norm prediction.
void gauss_hermite(int m, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace maglap
