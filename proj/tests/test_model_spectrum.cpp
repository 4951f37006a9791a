#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "maglap/common.hpp"
#include "maglap/geometry.hpp"
#include "maglap/model_spectrum.hpp"

using namespace maglap;

namespace {

PointFrame frame_1d(double b, const MatrixXcd& V) {
    MatrixXd Om(2, 2);
    Om << 0, b, -b, 0;
    return frame_from_matrices(MatrixXd::Identity(2, 2), Om, V);
}

PointFrame frame_2d(double b1, double b2) {
    MatrixXd Om = MatrixXd::Zero(4, 4);
    Om(0, 1) = b1;
    Om(1, 0) = -b1;
    Om(2, 3) = b2;
    Om(3, 2) = -b2;
    return frame_from_matrices(MatrixXd::Identity(4, 4), Om, MatrixXcd::Zero(1, 1));
}

TorusConfig cosine_config(int N) {
    TorusConfig tc;
    tc.half_dim = 1;
    tc.resolution = N;
    tc.aux_rank = 1;
    std::vector<std::vector<std::string>> e = {
        {"0", "2*pi*(1+0.15*cos(2*pi*x0)*cos(2*pi*x1))"},
        {"-2*pi*(1+0.15*cos(2*pi*x0)*cos(2*pi*x1))", "0"}};
    tc.metric = FieldSpec::make_constant(MatrixXcd::Identity(2, 2));
    tc.omega = FieldSpec::make_expr(2, 2, e, 2);
    tc.potential = FieldSpec::make_constant(MatrixXcd::Zero(1, 1));
    return tc;
}

TorusConfig flat_config(int N) {
    TorusConfig tc;
    tc.half_dim = 1;
    tc.resolution = N;
    tc.aux_rank = 1;
    MatrixXcd om(2, 2);
    om << 0, kTwoPi, -kTwoPi, 0;
    tc.metric = FieldSpec::make_constant(MatrixXcd::Identity(2, 2));
    tc.omega = FieldSpec::make_constant(om);
    tc.potential = FieldSpec::make_constant(MatrixXcd::Zero(1, 1));
    return tc;
}

}  // namespace

TEST_CASE("diagonal model entries are B(alpha+1/2)+V") {
    PointFrame fr = frame_1d(1.0, MatrixXcd::Zero(1, 1));
    ModelOperator op = box_operator(fr, 3);
    std::vector<double> got(op.diag.data(), op.diag.data() + op.diag.size());
    std::sort(got.begin(), got.end());
    std::vector<double> want{0.5, 1.5, 2.5, 3.5};
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
}

TEST_CASE("two frequencies fill the anisotropic ladder") {
    PointFrame fr = frame_2d(1.0, 2.0);
    ModelOperator op = box_operator(fr, 2);
    std::vector<double> got(op.diag.data(), op.diag.data() + op.diag.size());
    std::sort(got.begin(), got.end());
    std::vector<double> want{1.5, 2.5, 3.5, 3.5, 4.5, 5.5};
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
}

TEST_CASE("potential eigenvalues split each level") {
    MatrixXcd V(2, 2);
    V << 0.0, 0.0, 0.0, 0.25;
    PointFrame fr = frame_1d(1.0, V);
    ModelOperator op = box_operator(fr, 1);
    std::vector<double> got(op.diag.data(), op.diag.data() + op.diag.size());
    std::sort(got.begin(), got.end());
    std::vector<double> want{0.5, 0.75, 1.5, 1.75};
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
}

TEST_CASE("box matrix in the standard frame has the same spectrum") {
    MatrixXcd V(2, 2);
    V << 0.5, cdouble(0.0, 0.2), cdouble(0.0, -0.2), 0.1;
    PointFrame fr = frame_1d(kTwoPi, V);
    ModelOperator op = box_operator(fr, 2);
    MatrixXcd M = op.matrix_standard_frame();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(M);
    std::vector<double> got(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::vector<double> want(op.diag.data(), op.diag.data() + op.diag.size());
    std::sort(want.begin(), want.end());
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("point spectrum collects levels below the cutoff") {
    PointFrame fr = frame_1d(1.0, MatrixXcd::Zero(1, 1));
    auto s = sigma_point(fr, 3.0);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s[1] == doctest::Approx(1.5));
    CHECK(s[2] == doctest::Approx(2.5));

    PointFrame f2 = frame_1d(kTwoPi, MatrixXcd::Zero(1, 1));
    auto s2 = sigma_point(f2, 20.0);
    REQUIRE(s2.size() == 3);
    CHECK(s2[0] == doctest::Approx(kPi));
    CHECK(s2[1] == doctest::Approx(3.0 * kPi));
    CHECK(s2[2] == doctest::Approx(5.0 * kPi));
}

TEST_CASE("isotropic two-frequency levels carry multiplicity m+1") {
    PointFrame fr = frame_2d(1.0, 1.0);
    auto s = sigma_point(fr, 3.0);
    std::vector<double> want{1.0, 2.0, 2.0, 3.0, 3.0, 3.0};
    REQUIRE(s.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) CHECK(s[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("enlarging the cap adds no eigenvalue below the cutoff") {
    PointFrame fr = frame_2d(0.9, 1.7);
    const double lam = 9.0;
    auto base = sigma_point(fr, lam);
    ModelOperator wide = box_operator(fr, required_cap(fr, lam) + 3);
    std::vector<double> again;
    for (int i = 0; i < wide.diag.size(); ++i)
        if (wide.diag(i) <= lam) again.push_back(wide.diag(i));
    std::sort(again.begin(), again.end());
    REQUIRE(base.size() == again.size());
    for (size_t i = 0; i < base.size(); ++i) CHECK(base[i] == doctest::Approx(again[i]).epsilon(1e-14));
}

TEST_CASE("interval union merges and answers queries") {
    IntervalUnion u({{2.0, 3.0}, {0.0, 1.0}, {0.5, 1.5}});
    REQUIRE(u.components().size() == 2);
    CHECK(u.components()[0].first == doctest::Approx(0.0));
    CHECK(u.components()[0].second == doctest::Approx(1.5));
    CHECK(u.contains(1.2, 0.0));
    CHECK_FALSE(u.contains(1.7, 0.0));
    CHECK(u.contains(1.55, 0.1));
    CHECK(u.distance(1.75) == doctest::Approx(0.25));
    CHECK(u.distance(2.5) == doctest::Approx(0.0));
    CHECK(u.component_of(2.9, 0.0) == 1);
    CHECK(u.component_of(1.75, 0.1) == -1);
    auto gs = u.gaps(0.0, 3.0);
    REQUIRE(gs.size() == 1);
    CHECK(gs[0].first == doctest::Approx(1.5));
    CHECK(gs[0].second == doctest::Approx(2.0));
}

TEST_CASE("constant field envelope degenerates to points") {
    GeometryField geom = build_geometry(flat_config(12));
    EnvelopeResult env = sigma_envelope(geom, 20.0);
    REQUIRE(env.sigma.components().size() == 3);
    for (int m = 0; m < 3; ++m) {
        CHECK(env.sigma.components()[m].first == doctest::Approx((2 * m + 1) * kPi).epsilon(1e-12));
        CHECK(env.sigma.components()[m].second == doctest::Approx((2 * m + 1) * kPi).epsilon(1e-12));
    }
    CHECK(env.grid_modulus <= 1e-12);
}

TEST_CASE("varying field envelope matches the closed-form hulls") {
    GeometryField geom = build_geometry(cosine_config(16));
    EnvelopeResult env = sigma_envelope(geom, 12.0);
    // Branch m runs over (m + 1/2) * 2pi * [0.85, 1.15]; amplitudes are
    // attained on the grid since cos(2*pi*x) hits +-1 at x in {0, 1/2}.
    REQUIRE(env.branch_hulls.size() >= 2);
    CHECK(env.branch_hulls[0].first == doctest::Approx(0.5 * kTwoPi * 0.85).epsilon(1e-10));
    CHECK(env.branch_hulls[0].second == doctest::Approx(0.5 * kTwoPi * 1.15).epsilon(1e-10));
    CHECK(env.branch_hulls[1].first == doctest::Approx(1.5 * kTwoPi * 0.85).epsilon(1e-10));
    CHECK(env.branch_hulls[1].second == doctest::Approx(1.5 * kTwoPi * 1.15).epsilon(1e-10));
    auto gs = env.sigma.gaps(0.0, 12.0);
    bool found = false;
    for (auto& g : gs)
        if (std::abs(g.first - 0.5 * kTwoPi * 1.15) < 1e-9 &&
            std::abs(g.second - 1.5 * kTwoPi * 0.85) < 1e-9)
            found = true;
    CHECK(found);
}

TEST_CASE("overlapping branches merge into one component") {
    IntervalUnion u({{0.9, 2.1}, {2.0, 3.0}});
    REQUIRE(u.components().size() == 1);
    CHECK(u.components()[0].second == doctest::Approx(3.0));
}

TEST_CASE("weyl density counts levels against Liouville measure") {
    GeometryField geom = build_geometry(flat_config(10));
    CHECK(weyl_density(geom, 7.0) == doctest::Approx(kTwoPi).epsilon(1e-10));
    CHECK(weyl_density(geom, 2.0) == doctest::Approx(0.0));
    CHECK(weyl_density(geom, 20.0) == doctest::Approx(3.0 * kTwoPi).epsilon(1e-10));
    // Non-decreasing on a sweep.
    double prev = -1.0;
    for (double lam = 0.0; lam <= 25.0; lam += 0.5) {
        double v = weyl_density(geom, lam);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("projector selection picks the window") {
    PointFrame fr = frame_1d(1.0, MatrixXcd::Zero(1, 1));
    ProjectorSelection p0 = projector_symbol(fr, 0.0, 1.0, 3);
    CHECK(p0.rank == 1);
    REQUIRE(p0.flat_indices.size() == 1);
    CHECK(p0.flat_indices[0] == 0);
    CHECK((p0.P * p0.P - p0.P).norm() <= 1e-12);
    CHECK((p0.P - p0.P.adjoint()).norm() <= 1e-12);

    PointFrame f2 = frame_2d(1.0, 1.0);
    ProjectorSelection p1 = projector_symbol(f2, 1.5, 2.5, 4);
    CHECK(p1.rank == 2);

    ProjectorSelection pgap = projector_symbol(fr, 1.9, 2.1, 4);
    CHECK(pgap.rank == 0);
    CHECK(pgap.P.norm() == doctest::Approx(0.0));
}

TEST_CASE("projector endpoints may not touch the model spectrum") {
    PointFrame fr = frame_1d(1.0, MatrixXcd::Zero(1, 1));
    CHECK_THROWS_WITH_AS(projector_symbol(fr, 0.0, 1.5, 4), doctest::Contains("endpoint"), Error);
    CHECK_THROWS_WITH_AS(projector_symbol(fr, 0.0, 9.0, 3), doctest::Contains("cap"), Error);
}

TEST_CASE("projector commutes with the model matrix and has integer trace") {
    MatrixXcd V(2, 2);
    V << 0.3, cdouble(0.0, 0.1), cdouble(0.0, -0.1), 0.6;
    PointFrame fr = frame_1d(1.3, V);
    const int cap = required_cap(fr, 3.1);
    ProjectorSelection sel = projector_symbol(fr, 0.2, 3.1, cap);
    ModelOperator op = box_operator(fr, cap);
    MatrixXcd M = op.matrix_standard_frame();
    CHECK((sel.P * M - M * sel.P).norm() <= 1e-10);
    CHECK(std::abs(sel.P.trace().real() - sel.rank) <= 1e-10);
    CHECK(std::abs(sel.P.trace().imag()) <= 1e-12);
}

TEST_CASE("constant-field cluster bundle is flat") {
    GeometryField geom = build_geometry(flat_config(8));
    ProjectorField pf = cluster_bundle(geom, kPi - 1.0, kPi + 1.0, 4);
    CHECK(pf.rank == 1);
    REQUIRE(pf.P.size() == static_cast<size_t>(geom.sites()));
    for (size_t s = 1; s < pf.P.size(); ++s)
        CHECK((pf.P[s] - pf.P[0]).norm() <= 1e-12);
}

TEST_CASE("varying-field first cluster has rank one everywhere") {
    GeometryField geom = build_geometry(cosine_config(12));
    // First branch tops out at 0.575*2pi ~ 3.613; second starts at 8.01.
    ProjectorField pf = cluster_bundle(geom, 1.0, 5.0, 5);
    CHECK(pf.rank == 1);
    for (size_t s = 0; s < pf.P.size(); ++s) {
        CHECK((pf.P[s] * pf.P[s] - pf.P[s]).norm() <= 1e-10);
        CHECK((pf.P[s] - pf.P[s].adjoint()).norm() <= 1e-10);
    }
}

TEST_CASE("cluster bundle rejects endpoints inside the envelope") {
    GeometryField geom = build_geometry(cosine_config(12));
    // 3.0 sits inside the first branch hull [2.670, 3.613].
    CHECK_THROWS_AS(cluster_bundle(geom, 3.0, 5.0, 5), Error);
}
