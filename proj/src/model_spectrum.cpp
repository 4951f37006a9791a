#include "maglap/model_spectrum.hpp"

namespace maglap {

MatrixXcd ModelOperator::matrix_standard_frame() const {
    const int A = basis.alphas.size(), r = basis.r;
    MatrixXcd M = MatrixXcd::Zero(basis.size(), basis.size());
    for (int ai = 0; ai < A; ++ai) {
        VectorXcd lam(r);
        for (int l = 0; l < r; ++l) lam(l) = diag(basis.flat(ai, l));
        M.block(ai * r, ai * r, r, r) = frame.Zeta * lam.asDiagonal() * frame.Zeta.adjoint();
    }
    return M;
}

ModelOperator box_operator(const PointFrame& frame, int cap) {
    ModelOperator op;
    op.frame = frame;
    op.basis = OscillatorBasis(frame.n, frame.r, cap);
    op.diag = VectorXd(op.basis.size());
    for (int ai = 0; ai < op.basis.alphas.size(); ++ai) {
        const MIdx& al = op.basis.alphas.at(ai);
        double base = 0.0;
        for (int i = 0; i < frame.n; ++i) base += frame.B(i) * (al[i] + 0.5);
        for (int l = 0; l < frame.r; ++l) op.diag(op.basis.flat(ai, l)) = base + frame.Veig(l);
    }
    return op;
}

int required_cap(const PointFrame& frame, double lam) {
    double minB = frame.B.minCoeff();
    double minV = frame.Veig.minCoeff();
    double need = (lam - minV) / minB;
    int cap = need <= 0.0 ? 1 : static_cast<int>(std::ceil(need)) + 1;
    return std::max(cap, 1);
}

std::vector<double> sigma_point(const PointFrame& frame, double lam) {
    ModelOperator op = box_operator(frame, required_cap(frame, lam));
    std::vector<double> out;
    for (int i = 0; i < op.diag.size(); ++i)
        if (op.diag(i) <= lam) out.push_back(op.diag(i));
    std::sort(out.begin(), out.end());
    return out;
}

IntervalUnion::IntervalUnion(std::vector<std::pair<double, double>> intervals) {
    for (auto& [lo, hi] : intervals)
        if (hi < lo) throw Error("BadArgument", "interval with hi < lo");
    std::sort(intervals.begin(), intervals.end());
    for (const auto& it : intervals) {
        if (!iv_.empty() && it.first <= iv_.back().second)
            iv_.back().second = std::max(iv_.back().second, it.second);
        else
            iv_.push_back(it);
    }
}

bool IntervalUnion::contains(double x, double tol) const {
    for (const auto& [lo, hi] : iv_)
        if (x >= lo - tol && x <= hi + tol) return true;
    return false;
}

double IntervalUnion::distance(double x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : iv_) {
        if (x >= lo && x <= hi) return 0.0;
        best = std::min(best, std::min(std::abs(x - lo), std::abs(x - hi)));
    }
    return best;
}

int IntervalUnion::component_of(double x, double tol) const {
    int best = -1;
    double bestd = tol;
    for (size_t c = 0; c < iv_.size(); ++c) {
        double d = (x >= iv_[c].first && x <= iv_[c].second)
                       ? 0.0
                       : std::min(std::abs(x - iv_[c].first), std::abs(x - iv_[c].second));
        if (d <= bestd) {
            bestd = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<std::pair<double, double>> IntervalUnion::gaps(double lo, double hi) const {
    std::vector<std::pair<double, double>> out;
    double cur = lo;
    for (const auto& [l, h] : iv_) {
        if (h < lo) continue;
        if (l > hi) break;
        if (l > cur) out.emplace_back(cur, std::min(l, hi));
        cur = std::max(cur, h);
    }
    if (cur < hi) out.emplace_back(cur, hi);
    return out;
}

EnvelopeResult sigma_envelope(const GeometryField& geom, double lambda) {
    const int64_t S = geom.sites();
    // Sorted eigenvalue lists per site, computed to a margin above lambda so
    // that every branch crossing lambda has a full hull.
    std::vector<std::vector<double>> lists(S);
    size_t min_len = std::numeric_limits<size_t>::max();
    int64_t max_count = 0;
    for (int64_t s = 0; s < S; ++s) {
        PointFrame fr = frame_at(geom, s);
        double margin = 2.0 * fr.B.maxCoeff() + 1.0;
        lists[s] = sigma_point(fr, lambda + margin);
        int64_t cnt = 0;
        for (double v : lists[s])
            if (v <= lambda) ++cnt;
        max_count = std::max(max_count, cnt);
        min_len = std::min(min_len, lists[s].size());
    }
    int branches = static_cast<int>(max_count);
    if (static_cast<size_t>(branches) > min_len)
        throw Error("CapExceeded", "envelope margin too small for branch count");

    EnvelopeResult res;
    res.lambda = lambda;
    res.branches = branches;
    std::vector<std::pair<double, double>> hulls;
    for (int b = 0; b < branches; ++b) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int64_t s = 0; s < S; ++s) {
            lo = std::min(lo, lists[s][b]);
            hi = std::max(hi, lists[s][b]);
        }
        hulls.emplace_back(lo, hi);
    }
    res.branch_hulls = hulls;

    // Grid modulus of continuity: matched-branch increment across grid edges.
    double mod = 0.0;
    for (int64_t s = 0; s < S; ++s)
        for (int ax = 0; ax < geom.dim(); ++ax) {
            int64_t t = geom.neighbor(s, ax, 1);
            for (int b = 0; b < branches; ++b)
                mod = std::max(mod, std::abs(lists[s][b] - lists[t][b]));
        }
    res.grid_modulus = mod;

    // Truncate hulls at lambda and merge.
    std::vector<std::pair<double, double>> trunc;
    for (auto [lo, hi] : hulls) {
        if (lo > lambda) continue;
        trunc.emplace_back(lo, std::min(hi, lambda));
    }
    res.sigma = IntervalUnion(trunc);
    return res;
}

double weyl_density(const GeometryField& geom, double lam) {
    double cell = 1.0;
    for (int t = 0; t < geom.dim(); ++t) cell *= geom.a;
    double v = 0.0;
    for (int64_t s = 0; s < geom.sites(); ++s) {
        PointFrame fr = frame_at(geom, s);
        v += static_cast<double>(sigma_point(fr, lam).size()) * geom.rho[s] * cell;
    }
    return v;
}

ProjectorSelection projector_symbol(const PointFrame& frame, double lo, double hi, int cap,
                                    double endpoint_tol) {
    if (hi < lo) throw Error("BadArgument", "projector interval with hi < lo");
    // The cap must certify that no eigenvalue above it can fall below hi.
    if (cap < required_cap(frame, hi))
        throw Error("CapExceeded", "cap too small to certify the selection window");
    ModelOperator op = box_operator(frame, cap);
    ProjectorSelection sel;
    for (int i = 0; i < op.diag.size(); ++i) {
        double lambda = op.diag(i);
        if (std::min(std::abs(lambda - lo), std::abs(lambda - hi)) < endpoint_tol)
            throw Error("EndpointOnSpectrum", "interval endpoint touches a model eigenvalue");
        if (lambda >= lo && lambda <= hi) sel.flat_indices.push_back(i);
    }
    sel.rank = static_cast<int>(sel.flat_indices.size());
    const int A = op.basis.alphas.size(), r = frame.r;
    sel.P = MatrixXcd::Zero(op.basis.size(), op.basis.size());
    for (int idx : sel.flat_indices) {
        auto [ai, l] = op.basis.split(idx);
        // rank-one block zeta_l zeta_l^dag in the alpha block
        sel.P.block(ai * r, ai * r, r, r) += frame.Zeta.col(l) * frame.Zeta.col(l).adjoint();
    }
    (void)A;
    return sel;
}

ProjectorField cluster_bundle(const GeometryField& geom, double lo, double hi, int cap,
                              double endpoint_tol) {
    const int64_t S = geom.sites();
    // Endpoint clearance must beat the grid modulus of continuity, else the
    // selection could differ between sites of the same underlying cluster.
    EnvelopeResult env = sigma_envelope(geom, hi + 1.0);
    double clearance = std::max(endpoint_tol, 3.0 * env.grid_modulus);

    ProjectorField pf;
    pf.n = geom.n;
    pf.r = geom.r;
    pf.cap = cap;
    pf.N = geom.N;
    pf.P.resize(S);
    pf.selections.resize(S);
    int rank = -1;
    for (int64_t s = 0; s < S; ++s) {
        PointFrame fr = frame_at(geom, s);
        for (double lambda : sigma_point(fr, hi + 1.0))
            if (std::min(std::abs(lambda - lo), std::abs(lambda - hi)) < clearance)
                throw Error("EndpointOnSpectrum",
                            "interval endpoint within 3x grid modulus of a sampled eigenvalue");
        ProjectorSelection sel = projector_symbol(fr, lo, hi, cap, endpoint_tol);
        if (rank < 0) rank = sel.rank;
        if (sel.rank != rank) throw Error("RankJump", "projector rank varies over the grid");
        pf.P[s] = std::move(sel.P);
        pf.selections[s] = std::move(sel.flat_indices);
    }
    pf.rank = rank;
    return pf;
}

}  // namespace maglap
