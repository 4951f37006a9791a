#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "maglap/common.hpp"
#include "maglap/geometry.hpp"
#include "maglap/model_spectrum.hpp"
#include "maglap/symbol_calculus.hpp"

using namespace maglap;

namespace {

PointFrame frame_1d(double b) {
    MatrixXd Om(2, 2);
    Om << 0, b, -b, 0;
    return frame_from_matrices(MatrixXd::Identity(2, 2), Om, MatrixXcd::Zero(1, 1));
}

MIdx mi(std::initializer_list<int> v) { return MIdx(v); }

}  // namespace

TEST_CASE("gauss-hermite integrates even monomials exactly") {
    std::vector<double> x, w;
    gauss_hermite(12, x, w);
    // int e^{-x^2} x^{2m} dx = Gamma(m + 1/2); exact up to degree 23.
    double m0 = 0.0, m2 = 0.0, m4 = 0.0, m1 = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        m0 += w[i];
        m1 += w[i] * x[i];
        m2 += w[i] * x[i] * x[i];
        m4 += w[i] * std::pow(x[i], 4);
    }
    const double spi = std::sqrt(kPi);
    CHECK(m0 == doctest::Approx(spi).epsilon(1e-13));
    CHECK(m1 == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(0.5 * spi).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(0.75 * spi).epsilon(1e-13));
}

TEST_CASE("normalized monomial gram matches the closed form") {
    PolySpace sp(1, 2, 2);
    MatrixXd G = sp.gram();
    REQUIRE(G.rows() == sp.size());
    // <z^a zbar^b, z^c zbar^d> = delta_{a+d, b+c} (a+d)! / sqrt(a! b! c! d!).
    auto fact = [](int m) { return m <= 1 ? 1.0 : (m == 2 ? 2.0 : 6.0); };
    for (int p = 0; p < sp.size(); ++p)
        for (int q = 0; q < sp.size(); ++q) {
            auto [a, b] = sp.pair_at(p);
            auto [c, d] = sp.pair_at(q);
            double want = 0.0;
            if (a[0] + d[0] == b[0] + c[0]) {
                int s = a[0] + d[0];
                double f = 1.0;
                for (int t = 2; t <= s; ++t) f *= t;
                want = f / std::sqrt(fact(a[0]) * fact(b[0]) * fact(c[0]) * fact(d[0]));
            }
            CHECK(G(p, q) == doctest::Approx(want).epsilon(1e-12));
        }
}

TEST_CASE("annihilation acts as differentiation on the oscillator basis") {
    // In |m> = zbar^m / sqrt(m!): a|m> = sqrt(m)|m-1>, adag|m> = sqrt(m+1)|m+1>.
    const int cap = 3;
    MatrixXcd A = annihilation_D(1, cap, 0), C = creation_D(1, cap, 0);
    REQUIRE(A.rows() == cap + 1);
    for (int m = 0; m <= cap; ++m)
        for (int l = 0; l <= cap; ++l) {
            double a_want = (l == m + 1) ? std::sqrt(double(m + 1)) : 0.0;
            CHECK(std::abs(A(m, l) - a_want) <= 1e-13);
            double c_want = (l + 1 == m) ? std::sqrt(double(m)) : 0.0;
            CHECK(std::abs(C(m, l) - c_want) <= 1e-13);
        }
}

TEST_CASE("canonical commutation holds away from the degree cap") {
    for (int n : {1, 2}) {
        const int cap = 4;
        MultiIndexTable tab(n, cap);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                MatrixXcd comm = annihilation_D(n, cap, i) * creation_D(n, cap, j) -
                                 creation_D(n, cap, j) * annihilation_D(n, cap, i);
                cdouble delta = (i == j) ? 1.0 : 0.0;
                for (int p = 0; p < tab.size(); ++p)
                    for (int q = 0; q < tab.size(); ++q) {
                        if (mi_weight(tab.at(p)) > cap - 1 || mi_weight(tab.at(q)) > cap - 1)
                            continue;
                        cdouble want = (p == q) ? delta : 0.0;
                        CHECK(std::abs(comm(p, q) - want) <= 1e-12);
                    }
            }
    }
}

TEST_CASE("number operator is diagonal with integer entries") {
    const int n = 2, cap = 3;
    MultiIndexTable tab(n, cap);
    for (int i = 0; i < n; ++i) {
        MatrixXcd Nop = creation_D(n, cap, i) * annihilation_D(n, cap, i);
        for (int p = 0; p < tab.size(); ++p) {
            for (int q = 0; q < tab.size(); ++q) {
                cdouble want = (p == q) ? cdouble(tab.at(p)[i]) : 0.0;
                CHECK(std::abs(Nop(p, q) - want) <= 1e-12);
            }
        }
    }
}

TEST_CASE("ladder matrices on the full polynomial space satisfy interior CCR") {
    PolySpace sp(1, 3, 3);
    LadderMatrices lm = ladder_matrices(sp);
    MatrixXcd comm = lm.a[0] * lm.adag[0] - lm.adag[0] * lm.a[0];
    for (int p = 0; p < sp.size(); ++p) {
        auto [za, zb] = sp.pair_at(p);
        if (za[0] >= sp.cap_z || zb[0] >= sp.cap_zb) continue;  // cap-saturated columns
        for (int q = 0; q < sp.size(); ++q) {
            cdouble want = (p == q) ? 1.0 : 0.0;
            CHECK(std::abs(comm(q, p) - want) <= 1e-12);
        }
    }
}

TEST_CASE("lowest operator basis polynomials have their closed forms") {
    SymbolPolynomial p00 = pab_polynomial(mi({0}), mi({0}));
    CHECK(p00.scalar_coeff(mi({0}), mi({0})) == doctest::Approx(1.0));
    CHECK(p00.deg_z() == 0);
    CHECK(p00.deg_zb() == 0);

    SymbolPolynomial p10 = pab_polynomial(mi({1}), mi({0}));
    CHECK(p10.scalar_coeff(mi({0}), mi({1})) == doctest::Approx(1.0));

    SymbolPolynomial p01 = pab_polynomial(mi({0}), mi({1}));
    CHECK(p01.scalar_coeff(mi({1}), mi({0})) == doctest::Approx(-1.0));

    // p11 = (zbar - d/dz)(-z) / 1 = -z zbar + 1.
    SymbolPolynomial p11 = pab_polynomial(mi({1}), mi({1}));
    CHECK(p11.scalar_coeff(mi({1}), mi({1})) == doctest::Approx(-1.0));
    CHECK(p11.scalar_coeff(mi({0}), mi({0})) == doctest::Approx(1.0));
}

TEST_CASE("quantizing p00 gives the ground projector") {
    PolySpace sp(1, 2, 2);
    MatrixXcd M = op_quantize(pab_polynomial(mi({0}), mi({0})), sp, 2);
    REQUIRE(M.rows() == 3);
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
            CHECK(std::abs(M(p, q) - ((p == 0 && q == 0) ? 1.0 : 0.0)) <= 1e-12);
}

TEST_CASE("quantization inverts the oscillator expansion") {
    // zbar equals p10 as a polynomial, so its operator is the single matrix
    // unit |1><0|, not the full ladder.
    SymbolPolynomial zb = SymbolPolynomial::scalar(1);
    zb.add_term(mi({0}), mi({1}), MatrixXcd::Identity(1, 1));
    PolySpace sp(1, 2, 2);
    MatrixXcd M = op_quantize(zb, sp, 2);
    REQUIRE(M.rows() == 3);
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
            CHECK(std::abs(M(p, q) - ((p == 1 && q == 0) ? 1.0 : 0.0)) <= 1e-12);

    // 2 zbar - z zbar^2 = sqrt(2) p21, checked by expanding
    // (zbar - d_z)^2 (-z) by hand.
    SymbolPolynomial q21 = SymbolPolynomial::scalar(1);
    q21.add_term(mi({0}), mi({1}), 2.0 * MatrixXcd::Identity(1, 1));
    q21.add_term(mi({1}), mi({2}), -MatrixXcd::Identity(1, 1));
    MatrixXcd M2 = op_quantize(q21, sp, 2);
    const double s2 = std::sqrt(2.0);
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
            CHECK(std::abs(M2(p, q) - ((p == 2 && q == 1) ? s2 : 0.0)) <= 1e-12);
}

TEST_CASE("quantizing a diagonal sum gives an orthogonal projector") {
    SymbolPolynomial q = pab_polynomial(mi({0}), mi({0}));
    q += pab_polynomial(mi({2}), mi({2}));
    PolySpace sp(1, 3, 3);
    MatrixXcd M = op_quantize(q, sp, 3);
    CHECK((M * M - M).cwiseAbs().maxCoeff() <= 1e-11);
    CHECK((M - M.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(M.trace() - cdouble(2.0)) <= 1e-11);
    CHECK(std::abs(M(0, 0) - 1.0) <= 1e-12);
    CHECK(std::abs(M(1, 1)) <= 1e-12);
}

TEST_CASE("symbol degrees beyond the space are rejected") {
    SymbolPolynomial q = SymbolPolynomial::scalar(1);
    q.add_term(mi({3}), mi({0}), MatrixXcd::Identity(1, 1));
    PolySpace sp(1, 2, 2);
    CHECK_THROWS_WITH_AS(op_quantize(q, sp, 2), doctest::Contains("cap"), Error);
}

TEST_CASE("projector symbol at zero displacement evaluates to rank over 2pi") {
    PointFrame fr = frame_1d(1.0);
    ProjectorSelection sel = projector_symbol(fr, 0.0, 1.0, 3);
    SymbolPolynomial sig = projector_symbol_polynomial(fr, OscillatorBasis(1, 1, 3), sel.flat_indices);
    VectorXd zero = VectorXd::Zero(2);
    MatrixXcd K = model_projector_kernel(fr, sig, zero, zero);
    REQUIRE(K.rows() == 1);
    CHECK(K(0, 0).real() == doctest::Approx(1.0 / kTwoPi).epsilon(1e-12));
    CHECK(std::abs(K(0, 0).imag()) <= 1e-14);
}

TEST_CASE("kernel modulus is independent of the base point") {
    PointFrame fr = frame_1d(kTwoPi);
    const int cap = required_cap(fr, 2.0 * kTwoPi);
    ProjectorSelection sel = projector_symbol(fr, 0.0, 2.0 * kTwoPi, cap);
    SymbolPolynomial sig =
        projector_symbol_polynomial(fr, OscillatorBasis(1, 1, cap), sel.flat_indices);
    VectorXd xi(2), eta1(2), eta2(2);
    xi << 0.21, -0.13;
    eta1 << 0.0, 0.0;
    eta2 << 0.37, 0.52;
    MatrixXcd K1 = model_projector_kernel(fr, sig, xi, eta1);
    MatrixXcd K2 = model_projector_kernel(fr, sig, xi, eta2);
    CHECK(std::abs(K1(0, 0)) == doctest::Approx(std::abs(K2(0, 0))).epsilon(1e-12));
    // Phase differs by exp((i/2) omega(eta2 - eta1, xi)).
    double ang = 0.5 * kTwoPi * (eta2[0] * xi[1] - eta2[1] * xi[0]);
    cdouble rot = std::polar(1.0, ang);
    CHECK(std::abs(K2(0, 0) - rot * K1(0, 0)) <= 1e-12);
}

TEST_CASE("kernel decay follows the quarter-metric exponent") {
    PointFrame fr = frame_1d(kTwoPi);
    ProjectorSelection sel = projector_symbol(fr, 0.0, kTwoPi, required_cap(fr, kTwoPi));
    SymbolPolynomial sig = projector_symbol_polynomial(
        fr, OscillatorBasis(1, 1, required_cap(fr, kTwoPi)), sel.flat_indices);
    VectorXd eta = VectorXd::Zero(2);
    VectorXd xi(2);
    xi << 0.3, 0.0;
    MatrixXcd K = model_projector_kernel(fr, sig, xi, eta);
    // Ground selection: |K| = (2pi)^{-1} exp(-B |xi|^2 / 4).
    double want = std::exp(-kTwoPi * 0.09 / 4.0) / kTwoPi;
    CHECK(std::abs(K(0, 0)) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("scaled kernel matches the unscaled kernel at rescaled separation") {
    PointFrame fr = frame_1d(kTwoPi);
    const int cap = required_cap(fr, kTwoPi);
    ProjectorSelection sel = projector_symbol(fr, 0.0, kTwoPi, cap);
    SymbolPolynomial sig =
        projector_symbol_polynomial(fr, OscillatorBasis(1, 1, cap), sel.flat_indices);
    const int k = 9;
    VectorXd eta = VectorXd::Zero(2), xi(2);
    xi << 0.05, -0.02;
    MatrixXcd Ks = model_projector_kernel_scaled(fr, sig, k, xi, eta);
    VectorXd xs = std::sqrt(double(k)) * xi;
    MatrixXcd Ku = model_projector_kernel(fr, sig, xs, eta);
    // Scaled form carries (k/2pi)^n against the (2pi)^{-n} in the kernel;
    // the phase is evaluated at the unscaled base point.
    cdouble expect = Ku(0, 0) * std::pow(double(k), 1) *
                     std::polar(1.0, 0.5 * kTwoPi * (eta[0] * xi[1] - eta[1] * xi[0]));
    CHECK(std::abs(Ks(0, 0) - expect) <= 1e-10 * std::abs(expect) + 1e-14);
}

TEST_CASE("quadrature oracle confirms the quantization identity") {
    // <Op(p_ab) e_q, e_p> = delta via the Bargmann integral, n=1, cap 2;
    // the integral is evaluated with 20-node Gauss-Hermite per dimension.
    std::vector<double> xs, ws;
    gauss_hermite(20, xs, ws);
    PolySpace sp(1, 2, 2);
    for (int a = 0; a <= 2; ++a)
        for (int b = 0; b <= 2; ++b) {
            SymbolPolynomial pab = pab_polynomial(mi({a}), mi({b}));
            MatrixXcd M = op_quantize(pab, sp, 2);
            for (int p = 0; p <= 2; ++p)
                for (int q = 0; q <= 2; ++q) {
                    // J(u,v) = (1/pi) sum w_i w_j z^u zbar^v at z = x_i + i y_j
                    // equals u! delta_{uv}; the matrix element of rho_ab is
                    // delta_{pa} delta_{qb} in the normalized basis.
                    cdouble want = (p == a && q == b) ? 1.0 : 0.0;
                    CHECK(std::abs(M(p, q) - want) <= 1e-10);
                }
        }
}
