#include "maglap/chern_rr.hpp"

#include <Eigen/Dense>

namespace maglap {

namespace {

// Orthonormal frame of range(P); rank by eigenvalue count above 1/2.
MatrixXcd range_frame(const MatrixXcd& P, int& rank) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(P);
    if (es.info() != Eigen::Success) throw Error("SingularOverlap", "projector eigensolve failed");
    rank = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double v = es.eigenvalues()[i];
        if (std::min(std::abs(v), std::abs(v - 1.0)) > 1e-6)
            throw Error("SingularOverlap", "field entry is not a projector");
        if (v > 0.5) ++rank;
    }
    // Ascending eigenvalues: range vectors are the trailing columns.
    return es.eigenvectors().rightCols(rank);
}

}  // namespace

ChernData fhs_chern(const ProjectorField& F) {
    if (F.n != 1) throw Error("UnsupportedDimension", "loop-product Chern number needs n = 1");
    const int N = F.N;
    if (N < 2 || static_cast<int64_t>(F.P.size()) != static_cast<int64_t>(N) * N)
        throw Error("BadArgument", "projector field grid is incomplete");

    ChernData out;
    std::vector<MatrixXcd> frames(F.P.size());
    int rank0 = -1;
    for (size_t s = 0; s < F.P.size(); ++s) {
        int rk = 0;
        frames[s] = range_frame(F.P[s], rk);
        if (rank0 < 0) rank0 = rk;
        if (rk != rank0) throw Error("SingularOverlap", "projector rank jumps across the grid");
    }
    out.rank = rank0;
    out.plaquette_phase.assign(F.P.size(), 0.0);
    if (rank0 == 0) return out;

    auto at = [N](int i, int j) {
        return static_cast<size_t>(((i % N) + N) % N) + static_cast<size_t>(N) * (((j % N) + N) % N);
    };
    double total = 0.0;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const MatrixXcd& f00 = frames[at(i, j)];
            const MatrixXcd& f10 = frames[at(i + 1, j)];
            const MatrixXcd& f11 = frames[at(i + 1, j + 1)];
            const MatrixXcd& f01 = frames[at(i, j + 1)];
            MatrixXcd W = (f00.adjoint() * f10) * (f10.adjoint() * f11) *
                          (f11.adjoint() * f01) * (f01.adjoint() * f00);
            const cdouble det = W.determinant();
            if (std::abs(det) < 1e-8)
                throw Error("SingularOverlap", "plaquette loop determinant too small; refine the grid");
            const double ph = std::arg(det);
            out.plaquette_phase[at(i, j)] = ph;
            total += ph;
        }
    out.raw = total / kTwoPi;
    out.c1 = std::llround(out.raw);
    if (std::abs(out.raw - static_cast<double>(out.c1)) > 1e-3)
        throw Error("NonIntegerChern", "loop-product total is not close to an integer");
    return out;
}

double berry_chern_quadrature(const ProjectorField& F) {
    if (F.n != 1) throw Error("UnsupportedDimension", "Berry quadrature needs n = 1");
    const int N = F.N;
    auto at = [N](int i, int j) {
        return static_cast<size_t>(((i % N) + N) % N) + static_cast<size_t>(N) * (((j % N) + N) % N);
    };
    const double inv2h = 0.5 * N;
    double total = 0.0;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            MatrixXcd d1 = (F.P[at(i + 1, j)] - F.P[at(i - 1, j)]) * inv2h;
            MatrixXcd d2 = (F.P[at(i, j + 1)] - F.P[at(i, j - 1)]) * inv2h;
            const cdouble tr = (F.P[at(i, j)] * (d1 * d2 - d2 * d1)).trace();
            total += tr.imag();
        }
    return total / (kTwoPi * static_cast<double>(N) * N);
}

long long riemann_roch_value(int k, long long d, int rank, long long c1) {
    return static_cast<long long>(rank) * static_cast<long long>(k) * d + c1;
}

long long riemann_roch(int k, long long d, const ProjectorField& F) {
    if (F.n != 1) throw Error("UnsupportedDimension", "Riemann-Roch count implemented for n = 1");
    ChernData cd = fhs_chern(F);
    return riemann_roch_value(k, d, cd.rank, cd.c1);
}

}  // namespace maglap
