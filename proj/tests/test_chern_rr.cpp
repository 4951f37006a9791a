#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "maglap/chern_rr.hpp"
#include "maglap/common.hpp"
#include "maglap/geometry.hpp"
#include "maglap/model_spectrum.hpp"

using namespace maglap;

namespace {

// Two-band model P(k) = (I - n(k).sigma)/2 with
// n = d/|d|, d = (sin kx, sin ky, m - cos kx - cos ky).
// Lower band has |c1| = 1 for 0 < |m| < 2, c1 = 0 for |m| > 2, and the sign
// flips with the sign of m. These facts are orientation-free oracles.
MatrixXcd band_projector(double kx, double ky, double m, bool lower) {
    const double dx = std::sin(kx), dy = std::sin(ky);
    const double dz = m - std::cos(kx) - std::cos(ky);
    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    MatrixXcd nsig(2, 2);
    nsig << dz / r, cdouble(dx / r, -dy / r), cdouble(dx / r, dy / r), -dz / r;
    const double s = lower ? -1.0 : 1.0;
    return 0.5 * (MatrixXcd::Identity(2, 2) + s * nsig);
}

ProjectorField band_field(int N, double m, bool lower) {
    ProjectorField F;
    F.n = 1;
    F.r = 1;
    F.cap = 1;
    F.rank = 1;
    F.N = N;
    F.P.resize(static_cast<size_t>(N) * N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            F.P[static_cast<size_t>(i) + static_cast<size_t>(N) * j] =
                band_projector(kTwoPi * i / N, kTwoPi * j / N, m, lower);
    return F;
}

ProjectorField constant_field(int N, const MatrixXcd& P) {
    ProjectorField F;
    F.n = 1;
    F.r = 1;
    F.cap = static_cast<int>(P.rows()) - 1;
    F.rank = 0;
    F.N = N;
    F.P.assign(static_cast<size_t>(N) * N, P);
    return F;
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

}  // namespace

TEST_CASE("constant projector field is flat") {
    MatrixXcd P = MatrixXcd::Zero(3, 3);
    P(1, 1) = 1.0;
    ChernData cd = fhs_chern(constant_field(8, P));
    CHECK(cd.c1 == 0);
    CHECK(cd.rank == 1);
    CHECK(std::abs(cd.raw) <= 1e-12);
    CHECK(berry_chern_quadrature(constant_field(8, P)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("two band model carries a unit chern number") {
    ProjectorField lo = band_field(24, 1.0, true);
    ChernData cl = fhs_chern(lo);
    CHECK(cl.rank == 1);
    CHECK(std::abs(cl.c1) == 1);
    CHECK(cl.raw == doctest::Approx(double(cl.c1)).epsilon(1e-8));
    CHECK(cl.plaquette_phase.size() == 24u * 24u);

    // The complementary band cancels it.
    ChernData cu = fhs_chern(band_field(24, 1.0, false));
    CHECK(cu.c1 == -cl.c1);

    // Reflecting the mass flips the sign.
    ChernData cm = fhs_chern(band_field(24, -1.0, true));
    CHECK(cm.c1 == -cl.c1);

    // Outside the window the band is trivial.
    ChernData ct = fhs_chern(band_field(24, 3.0, true));
    CHECK(ct.c1 == 0);
}

TEST_CASE("berry quadrature tracks the loop product integer") {
    ProjectorField lo = band_field(24, 1.0, true);
    ChernData cd = fhs_chern(lo);
    double q = berry_chern_quadrature(lo);
    CHECK(std::abs(q - double(cd.c1)) <= 0.15);
}

TEST_CASE("direct sums add chern numbers") {
    const int N = 20;
    ProjectorField F;
    F.n = 1;
    F.r = 1;
    F.cap = 3;
    F.rank = 2;
    F.N = N;
    F.P.resize(static_cast<size_t>(N) * N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            MatrixXcd blk = MatrixXcd::Zero(4, 4);
            MatrixXcd p = band_projector(kTwoPi * i / N, kTwoPi * j / N, 1.0, true);
            blk.block(0, 0, 2, 2) = p;
            blk.block(2, 2, 2, 2) = p;
            F.P[static_cast<size_t>(i) + static_cast<size_t>(N) * j] = blk;
        }
    ChernData cd = fhs_chern(F);
    CHECK(cd.rank == 2);
    ChernData single = fhs_chern(band_field(N, 1.0, true));
    CHECK(cd.c1 == 2 * single.c1);
}

TEST_CASE("loop product rejects bad fields") {
    // Not a projector.
    ProjectorField half = constant_field(4, 0.5 * MatrixXcd::Identity(2, 2));
    CHECK_THROWS_WITH_AS(fhs_chern(half), doctest::Contains("projector"), Error);

    // Rank jump between sites.
    ProjectorField jump = constant_field(4, MatrixXcd::Identity(2, 2));
    MatrixXcd low = MatrixXcd::Zero(2, 2);
    low(0, 0) = 1.0;
    jump.P[1] = low;
    CHECK_THROWS_WITH_AS(fhs_chern(jump), doctest::Contains("rank"), Error);

    // Wrong base dimension.
    ProjectorField two = constant_field(4, MatrixXcd::Identity(2, 2));
    two.n = 2;
    CHECK_THROWS_WITH_AS(fhs_chern(two), doctest::Contains("n = 1"), Error);

    // Incomplete grid.
    ProjectorField part = constant_field(4, MatrixXcd::Identity(2, 2));
    part.P.pop_back();
    CHECK_THROWS_WITH_AS(fhs_chern(part), doctest::Contains("grid"), Error);
}

TEST_CASE("riemann roch arithmetic") {
    CHECK(riemann_roch_value(4, 1, 2, 0) == 8);
    CHECK(riemann_roch_value(3, 2, 1, -1) == 5);
    CHECK(riemann_roch_value(1, 1, 1, 7) == 8);
    CHECK(riemann_roch_value(0, 5, 3, 2) == 2);
}

TEST_CASE("riemann roch of a projector field uses its chern number") {
    ProjectorField lo = band_field(16, 1.0, true);
    long long c1 = fhs_chern(lo).c1;
    CHECK(riemann_roch(6, 1, lo) == riemann_roch_value(6, 1, 1, c1));

    MatrixXcd P = MatrixXcd::Identity(2, 2);
    ProjectorField full = constant_field(8, P);
    CHECK(riemann_roch(5, 1, full) == 10);  // rank 2, flat
}

TEST_CASE("model cluster bundles over a constant field are flat") {
    GeometryField geom = build_geometry(flat_config(12));
    ProjectorField F = cluster_bundle(geom, 1.0, 5.0, 4);
    CHECK(F.rank == 1);
    ChernData cd = fhs_chern(F);
    CHECK(cd.c1 == 0);
    CHECK(riemann_roch(5, 1, F) == 5);
}

TEST_CASE("model cluster bundles over the cosine field are flat") {
    // The ground selection varies with B but the family is a contractible
    // deformation of the constant one, so c1 = 0.
    GeometryField geom = build_geometry(cosine_config(16));
    ProjectorField F = cluster_bundle(geom, 1.0, 5.0, 5);
    CHECK(F.rank == 1);
    ChernData cd = fhs_chern(F);
    CHECK(cd.c1 == 0);
    double q = berry_chern_quadrature(F);
    CHECK(std::abs(q) <= 0.1);
}
