#include "maglap/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>

namespace maglap {

double default_cluster_delta(const GeometryField& geom, int k) {
    const double maxB = max_frequency(geom);
    const double disc = 5.0 * geom.a * geom.a * static_cast<double>(k) * maxB;
    const double width = 3.0 / std::sqrt(static_cast<double>(k)) * maxB / kTwoPi;
    return std::max(disc, width);
}

ClusterReport detect_clusters(const EigenSystem& es, const IntervalUnion& sigma, double lambda,
                              double delta) {
    if (sigma.contains(lambda, 0.0))
        throw Error("CutoffInsideSigma", "analysis cutoff lies inside the envelope");
    ClusterReport rep;
    rep.k = es.k;
    rep.lambda = lambda;
    rep.delta = delta;
    const auto& comps = sigma.components();
    rep.components.resize(comps.size());
    for (size_t c = 0; c < comps.size(); ++c) {
        rep.components[c].lo = comps[c].first;
        rep.components[c].hi = comps[c].second;
    }
    for (double lam : es.eigenvalues) {
        if (lam > lambda) break;
        ++rep.total;
        const int c = sigma.component_of(lam, delta);
        if (c < 0) {
            rep.orphans.push_back(lam);
            continue;
        }
        auto& cc = rep.components[static_cast<size_t>(c)];
        if (cc.count == 0) {
            cc.min_eig = cc.max_eig = lam;
        } else {
            cc.min_eig = std::min(cc.min_eig, lam);
            cc.max_eig = std::max(cc.max_eig, lam);
        }
        cc.mean_eig += lam;
        double dist = 0.0;
        if (lam < cc.lo) dist = cc.lo - lam;
        if (lam > cc.hi) dist = lam - cc.hi;
        cc.max_dist = std::max(cc.max_dist, dist);
        ++cc.count;
    }
    for (auto& cc : rep.components)
        if (cc.count > 0) cc.mean_eig /= static_cast<double>(cc.count);
    return rep;
}

RrCheck counting_vs_rr(const ClusterReport& rep, const std::vector<long long>& rr) {
    if (rr.size() != rep.components.size())
        throw Error("BadArgument", "one prediction per component is required");
    RrCheck out;
    out.predicted = rr;
    out.pass = rep.orphans.empty();
    for (size_t c = 0; c < rr.size(); ++c) {
        out.observed.push_back(rep.components[c].count);
        if (rep.components[c].count != rr[c]) out.pass = false;
    }
    return out;
}

ScalingFit distance_scaling(const std::vector<double>& ks, const std::vector<double>& values) {
    if (ks.size() != values.size()) throw Error("BadArgument", "k grid and values differ in size");
    if (ks.size() < 4) throw Error("InsufficientKGrid", "scaling fit needs at least 4 values of k");
    ScalingFit fit;
    fit.ks = ks;
    fit.values = values;
    const size_t m = ks.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> lx(m), ly(m);
    for (size_t i = 0; i < m; ++i) {
        if (!(ks[i] > 0.0) || !(values[i] > 0.0))
            throw Error("BadArgument", "scaling fit needs positive k and values");
        lx[i] = std::log10(ks[i]);
        ly[i] = std::log10(values[i]);
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double dm = static_cast<double>(m);
    const double den = dm * sxx - sx * sx;
    if (std::abs(den) < 1e-15) throw Error("BadArgument", "degenerate k grid");
    fit.slope = (dm * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / dm;
    double rss = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double r = ly[i] - (fit.slope * lx[i] + fit.intercept);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / dm);
    return fit;
}

double max_distance_to_sigma(const EigenSystem& es, const IntervalUnion& sigma, double lambda) {
    double worst = 0.0;
    for (double lam : es.eigenvalues) {
        if (lam > lambda) break;
        worst = std::max(worst, sigma.distance(lam));
    }
    return worst;
}

WeylRatio global_weyl(const EigenSystem& es, const GeometryField& geom, const IntervalUnion& sigma,
                      double lambda) {
    if (sigma.contains(lambda, 0.0))
        throw Error("LambdaOnSigma", "Weyl ratio needs a continuity point of the density");
    WeylRatio out;
    out.count = counting_function(es, lambda);
    out.v = weyl_density(geom, lambda);
    const double denom = std::pow(static_cast<double>(es.k) / kTwoPi, geom.n) * out.v;
    if (denom <= 0.0) {
        out.valid = false;
        out.ratio = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.ratio = static_cast<double>(out.count) / denom;
    out.valid = true;
    return out;
}

LocalWeyl local_weyl(const EigenSystem& es, const GeometryField& geom, int64_t y_site, double a,
                     double b, double margin) {
    if (es.vectors.empty()) throw Error("BadArgument", "local count needs eigenvectors");
    if (b > es.lambda_cut)
        throw Error("AboveCertifiedCutoff", "window extends beyond the certified range");
    const PointFrame frame = frame_at(geom, y_site);
    const auto model = sigma_point(frame, b + 1.0 + margin);
    LocalWeyl out;
    for (double lam : model) {
        if (std::abs(lam - a) < margin || std::abs(lam - b) < margin)
            throw Error("EndpointOnSigmaY", "window endpoint touches the model spectrum at y");
        if (lam >= a && lam <= b) out.predicted += 1.0;
    }
    const int r = geom.r;
    for (size_t i = 0; i < es.eigenvalues.size(); ++i) {
        const double lam = es.eigenvalues[i];
        if (lam < a || lam > b) continue;
        for (int l = 0; l < r; ++l) out.raw += std::norm(es.vectors[i][y_site * r + l]);
    }
    out.scaled = std::pow(kTwoPi / static_cast<double>(es.k), geom.n) * out.raw;
    return out;
}

KernelSlice projector_kernel_slice(const EigenSystem& es, const GeometryField& geom, double lo,
                                   double hi, int64_t x_site, int axis, int radius) {
    if (es.vectors.empty()) throw Error("BadArgument", "kernel slice needs eigenvectors");
    if (hi > es.lambda_cut)
        throw Error("AboveCertifiedCutoff", "window extends beyond the certified range");
    if (axis < 0 || axis >= geom.dim()) throw Error("BadArgument", "axis out of range");
    radius = std::min(radius, geom.N / 2);
    const PointFrame frame = frame_at(geom, x_site);
    const int r = geom.r;
    std::vector<size_t> sel;
    for (size_t i = 0; i < es.eigenvalues.size(); ++i)
        if (es.eigenvalues[i] >= lo && es.eigenvalues[i] <= hi) sel.push_back(i);

    KernelSlice out;
    out.k = es.k;
    out.n = geom.n;
    int64_t cur = x_site;
    for (int t = 0; t <= radius; ++t) {
        MatrixXcd block = MatrixXcd::Zero(r, r);
        for (size_t i : sel)
            for (int l = 0; l < r; ++l)
                for (int m = 0; m < r; ++m)
                    block(l, m) += es.vectors[i][cur * r + l] * std::conj(es.vectors[i][x_site * r + m]);
        VectorXd xi = VectorXd::Zero(geom.dim());
        xi[axis] = geom.a * t;
        out.t.push_back(t);
        out.eu.push_back(xi.norm());
        out.sq.push_back(frame.xi_norm2(xi));
        out.value.push_back(block.norm());
        cur = geom.neighbor(cur, axis, +1);
    }
    out.peak = out.value.empty() ? 0.0 : out.value.front();
    return out;
}

GaussianFit gaussian_profile_fit(const KernelSlice& slice) {
    GaussianFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<std::pair<double, double>> pts;
    const double floor_val = slice.peak * 1e-12;
    for (size_t i = 0; i < slice.value.size(); ++i) {
        const double u = static_cast<double>(slice.k) * slice.sq[i];
        if (u > 8.0) continue;  // beyond two magnetic lengths
        if (!(slice.value[i] > floor_val)) continue;
        pts.emplace_back(u, std::log(slice.value[i]));
    }
    if (pts.size() < 6) throw Error("InsufficientSamples", "need 6 samples within two magnetic lengths");
    for (auto [u, lv] : pts) {
        sx += u;
        sy += lv;
        sxx += u * u;
        sxy += u * lv;
    }
    const double m = static_cast<double>(pts.size());
    const double den = m * sxx - sx * sx;
    if (std::abs(den) < 1e-15) throw Error("BadArgument", "degenerate radii");
    const double slope = (m * sxy - sx * sy) / den;
    fit.c = -slope;
    fit.log_peak = (sy - slope * sx) / m;
    double rss = 0.0;
    for (auto [u, lv] : pts) {
        const double rr = lv - (slope * u + fit.log_peak);
        rss += rr * rr;
    }
    fit.residual = std::sqrt(rss / m);
    fit.used = static_cast<int>(pts.size());
    return fit;
}

FunctionalDiag functional_calculus_diag(const EigenSystem& es, const GeometryField& geom,
                                        const std::function<double(double)>& g, double support_end,
                                        int64_t y_site) {
    if (es.vectors.empty()) throw Error("BadArgument", "diagonal comparison needs eigenvectors");
    if (support_end > es.lambda_cut)
        throw Error("SupportExceedsCertifiedRange", "test function is supported beyond the certified range");
    FunctionalDiag out;
    const int r = geom.r;
    for (size_t i = 0; i < es.eigenvalues.size(); ++i) {
        const double lam = es.eigenvalues[i];
        if (lam > support_end) continue;
        const double gv = g(lam);
        if (gv == 0.0) continue;
        double w = 0.0;
        for (int l = 0; l < r; ++l) w += std::norm(es.vectors[i][y_site * r + l]);
        out.lhs += gv * w;
    }
    out.lhs *= std::pow(kTwoPi / static_cast<double>(es.k), geom.n);
    const PointFrame frame = frame_at(geom, y_site);
    for (double lam : sigma_point(frame, support_end)) out.rhs += g(lam);
    const double scale = std::max(std::abs(out.rhs), 1e-12);
    out.rel_dev = std::abs(out.lhs - out.rhs) / scale;
    return out;
}

GardingCheck garding_bounds(const EigenSystem& es, std::pair<double, double> I, double f_lo,
                            double f_hi, double margin_allow) {
    GardingCheck out;
    out.f_lo = f_lo;
    out.f_hi = f_hi;
    out.margin_allow = margin_allow;
    for (double lam : es.eigenvalues) {
        if (lam < I.first || lam > I.second) continue;
        out.margin_lo = std::max(out.margin_lo, f_lo - lam);
        out.margin_hi = std::max(out.margin_hi, lam - f_hi);
    }
    out.ok = out.margin_lo <= margin_allow && out.margin_hi <= margin_allow;
    return out;
}

}  // namespace maglap
