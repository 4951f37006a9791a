#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <tuple>
#include <vector>

#include "maglap/common.hpp"
#include "maglap/eigensolver.hpp"
#include "maglap/geometry.hpp"
#include "maglap/lattice_operator.hpp"

using namespace maglap;

namespace {

SparseHermitian diag_operator(const std::vector<double>& d) {
    std::vector<std::tuple<int64_t, int64_t, cdouble>> trips;
    for (size_t i = 0; i < d.size(); ++i) trips.emplace_back(i, i, d[i]);
    return SparseHermitian::from_triplets(static_cast<int64_t>(d.size()),
                                          std::vector<double>(d.size(), 1.0), trips);
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

TEST_CASE("dense solver reproduces a diagonal spectrum") {
    std::vector<double> d = {3.0, -1.0, 0.5, 2.0, 0.5};
    SparseHermitian H = diag_operator(d);
    EigenSystem es = dense_eig(H, 1);
    REQUIRE(es.eigenvalues.size() == 5);
    std::vector<double> want = {-1.0, 0.5, 0.5, 2.0, 3.0};
    for (int i = 0; i < 5; ++i) CHECK(es.eigenvalues[i] == doctest::Approx(want[i]).epsilon(1e-12));
    CHECK(es.method == "dense");
    REQUIRE(es.vectors.size() == 5);
    REQUIRE(es.residuals.size() == 5);
    for (double r : es.residuals) CHECK(r <= 1e-10);
    // rho-orthonormal vectors (unit weights here).
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j <= i; ++j) {
            cdouble g = H.weighted_dot(es.vectors[i], es.vectors[j]);
            CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-10);
        }
}

TEST_CASE("dense solver handles the weight matrix") {
    // H = R^{-1} A with R = diag(1, 2), A = [[2, 1], [1, 3]] is Hermitian for
    // the weighted product; det(A - lambda R) = 0 gives lambda in {1, 5/2}.
    std::vector<std::tuple<int64_t, int64_t, cdouble>> trips = {
        {0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 0.5}, {1, 1, 1.5}};
    SparseHermitian H = SparseHermitian::from_triplets(2, {1.0, 2.0}, trips);
    CHECK(H.hermitian_defect() <= 1e-14);
    EigenSystem es = dense_eig(H, 1);
    REQUIRE(es.eigenvalues.size() == 2);
    CHECK(es.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(es.eigenvalues[1] == doctest::Approx(2.5).epsilon(1e-12));
    cdouble g01 = H.weighted_dot(es.vectors[0], es.vectors[1]);
    CHECK(std::abs(g01) <= 1e-12);
}

TEST_CASE("dense solver divides by k") {
    std::vector<double> d = {0.0, 4.0, 8.0};
    EigenSystem es = dense_eig(diag_operator(d), 4);
    CHECK(es.k == 4);
    CHECK(es.eigenvalues[1] == doctest::Approx(1.0));
    CHECK(es.eigenvalues[2] == doctest::Approx(2.0));
}

TEST_CASE("dense solver refuses dimensions past the cap") {
    SolverOptions opts;
    opts.dense_cap = 4;
    SparseHermitian H = diag_operator({1, 2, 3, 4, 5});
    CHECK_THROWS_WITH_AS(dense_eig(H, 1, opts), doctest::Contains("dense"), Error);
}

TEST_CASE("lanczos matches a known diagonal spectrum below the cutoff") {
    const int D = 400;
    std::vector<double> d(D);
    for (int i = 0; i < D; ++i) d[i] = 0.05 * i;
    SparseHermitian H = diag_operator(d);
    SolverOptions opts;
    opts.seed = 0x12345678ull;
    EigenSystem es = lanczos_lowest(H, 1, 1.02, opts);
    CHECK(es.method == "lanczos");
    CHECK(es.lambda_cut >= 1.02);
    REQUIRE(es.eigenvalues.size() >= 21);
    int64_t below = es.count_below(1.02);
    CHECK(below == 21);
    for (int i = 0; i < 21; ++i) CHECK(es.eigenvalues[i] == doctest::Approx(0.05 * i).epsilon(1e-7));
    REQUIRE(es.vectors.size() == es.eigenvalues.size());
    for (size_t i = 0; i + 1 < es.vectors.size(); ++i) {
        CHECK(std::abs(H.weighted_dot(es.vectors[i], es.vectors[i]) - 1.0) <= 1e-8);
        CHECK(std::abs(H.weighted_dot(es.vectors[i], es.vectors[i + 1])) <= 1e-8);
    }
    for (double r : es.residuals) CHECK(r <= 1e-5);
}

TEST_CASE("lanczos is deterministic for a fixed seed") {
    std::vector<double> d(300);
    for (int i = 0; i < 300; ++i) d[i] = 0.1 * i;
    SparseHermitian H = diag_operator(d);
    SolverOptions opts;
    opts.seed = 0xfeedbeefull;
    opts.want_vectors = false;
    EigenSystem a = lanczos_lowest(H, 1, 2.05, opts);
    EigenSystem b = lanczos_lowest(H, 1, 2.05, opts);
    REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
    for (size_t i = 0; i < a.eigenvalues.size(); ++i) CHECK(a.eigenvalues[i] == b.eigenvalues[i]);
    CHECK(a.seed == opts.seed);
}

TEST_CASE("lanczos keeps multiplicities") {
    // Ten copies of 1.0 under the cutoff; a cluster, not a single value.
    std::vector<double> d;
    for (int i = 0; i < 10; ++i) d.push_back(1.0);
    for (int i = 0; i < 200; ++i) d.push_back(3.0 + 0.05 * i);
    SparseHermitian H = diag_operator(d);
    EigenSystem es = lanczos_lowest(H, 1, 2.0);
    CHECK(es.count_below(2.0) == 10);
    for (int i = 0; i < 10; ++i) CHECK(es.eigenvalues[i] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("lanczos agrees with dense on a magnetic laplacian") {
    GeometryField geom = build_geometry(flat_config(16));
    const int k = 2;
    GaugeLattice g = build_gauge(geom, k);
    SparseHermitian H = assemble_laplacian(geom, g, k);
    EigenSystem dn = dense_eig(H, k);
    SolverOptions opts;
    opts.want_vectors = false;
    EigenSystem lz = lanczos_lowest(H, k, kTwoPi, opts);
    int64_t nd = dn.count_below(kTwoPi);
    CHECK(nd == lz.count_below(kTwoPi));
    for (int64_t i = 0; i < nd; ++i)
        CHECK(lz.eigenvalues[i] == doctest::Approx(dn.eigenvalues[i]).epsilon(1e-7));
}

TEST_CASE("solve_low_spectrum dispatches on the dense cap") {
    std::vector<double> d(50);
    for (int i = 0; i < 50; ++i) d[i] = 0.2 * i;
    SparseHermitian H = diag_operator(d);
    SolverOptions opts;
    EigenSystem dn = solve_low_spectrum(H, 1, 3.1, opts);
    CHECK(dn.method == "dense");
    opts.dense_cap = 10;
    EigenSystem lz = solve_low_spectrum(H, 1, 3.1, opts);
    CHECK(lz.method == "lanczos");
    CHECK(dn.count_below(3.1) == lz.count_below(3.1));
}

TEST_CASE("counting function respects the certified range") {
    std::vector<double> d(120);
    for (int i = 0; i < 120; ++i) d[i] = 0.25 * i;
    SparseHermitian H = diag_operator(d);
    EigenSystem dn = dense_eig(H, 1);
    CHECK(counting_function(dn, 1.0) == 5);   // 0, .25, .5, .75, 1.0
    CHECK(counting_function(dn, 0.99) == 4);
    CHECK(counting_function(dn, 1e9) == 120);  // dense certifies everything
    SolverOptions opts;
    opts.want_vectors = false;
    EigenSystem lz = lanczos_lowest(H, 1, 2.1, opts);
    CHECK(counting_function(lz, 2.05) == 9);
    CHECK(counting_function(lz, 1.95) == 8);
    CHECK_THROWS_WITH_AS(counting_function(lz, lz.lambda_cut + 1.0), doctest::Contains("certified"),
                         Error);
}

TEST_CASE("eigen cache round-trips and rejects mismatched keys") {
    std::vector<double> d = {0.5, 1.5, 2.5};
    SparseHermitian H = diag_operator(d);
    EigenSystem es = dense_eig(H, 3);
    EigenCacheKey key;
    key.config_hash = 0xabcdef0123456789ull;
    key.k = 3;
    key.N = 16;
    key.lambda = 4.0;
    key.tol = 1e-9;
    key.seed = es.seed;
    key.want_vectors = true;
    const std::string path = "/tmp/maglap_test_cache.bin";
    std::remove(path.c_str());
    CHECK(!load_eigen_cache(path, key).has_value());
    save_eigen_cache(path, key, es, 1);
    auto back = load_eigen_cache(path, key);
    REQUIRE(back.has_value());
    CHECK(back->k == 3);
    CHECK(back->method == es.method);
    REQUIRE(back->eigenvalues.size() == es.eigenvalues.size());
    for (size_t i = 0; i < es.eigenvalues.size(); ++i)
        CHECK(back->eigenvalues[i] == es.eigenvalues[i]);
    REQUIRE(back->vectors.size() == es.vectors.size());
    for (size_t i = 0; i < es.vectors.size(); ++i)
        CHECK((back->vectors[i] - es.vectors[i]).norm() <= 1e-15);

    EigenCacheKey other = key;
    other.k = 4;
    CHECK(!load_eigen_cache(path, other).has_value());
    other = key;
    other.config_hash ^= 1;
    CHECK(!load_eigen_cache(path, other).has_value());
    std::remove(path.c_str());
}

TEST_CASE("corrupt cache files raise an error") {
    const std::string path = "/tmp/maglap_test_cache_bad.bin";
    {
        std::ofstream f(path, std::ios::binary);
        f << "not a cache";
    }
    EigenCacheKey key;
    CHECK_THROWS_WITH_AS(load_eigen_cache(path, key), doctest::Contains("cache"), Error);
    std::remove(path.c_str());
}
