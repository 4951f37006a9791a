#pragma once
// Confronts computed spectra and eigenvectors with the pointwise-model
// predictions: cluster detection and integer counting, distance-to-envelope
// scaling fits, global and local Weyl laws, projector-kernel profiles with
// Gaussian decay fits, functional-calculus diagonals, and spectral inclusion
// bounds for cluster windows.

#include <functional>

#include "maglap/eigensolver.hpp"
#include "maglap/model_spectrum.hpp"

namespace maglap {

struct ClusterComponent {
    double lo = 0.0, hi = 0.0;  // envelope component
    int64_t count = 0;
    double min_eig = 0.0, max_eig = 0.0, mean_eig = 0.0;
    double max_dist = 0.0;  // worst dist(lambda, [lo,hi]) among assigned eigenvalues
};

struct ClusterReport {
    int k = 1;
    double lambda = 0.0;  // analysis cutoff
    double delta = 0.0;   // assignment tolerance
    std::vector<ClusterComponent> components;
    std::vector<double> orphans;  // eigenvalues farther than delta from every component
    int64_t total = 0;            // eigenvalues at or below lambda
};

// Assignment tolerance: discretization error floor plus the k^{-1/2}
// containment scale, both proportional to the largest field frequency.
double default_cluster_delta(const GeometryField& geom, int k);

// Every eigenvalue <= lambda is assigned to the nearest envelope component
// within delta, else listed as an orphan. Errors: CutoffInsideSigma if
// lambda lies in the envelope.
ClusterReport detect_clusters(const EigenSystem& es, const IntervalUnion& sigma, double lambda,
                              double delta);

struct RrCheck {
    std::vector<long long> predicted;
    std::vector<int64_t> observed;
    bool pass = false;
};

// Integer equality of per-component counts against predictions (one entry
// per component, in order).
RrCheck counting_vs_rr(const ClusterReport& rep, const std::vector<long long>& rr);

struct ScalingFit {
    std::vector<double> ks, values;
    double slope = 0.0, intercept = 0.0;
    double residual = 0.0;  // root-mean-square misfit, log10 units
};

// Least-squares fit of log10(value) against log10(k). Errors:
// InsufficientKGrid below 4 points; BadArgument on non-positive values.
ScalingFit distance_scaling(const std::vector<double>& ks, const std::vector<double>& values);

double max_distance_to_sigma(const EigenSystem& es, const IntervalUnion& sigma, double lambda);

struct WeylRatio {
    int64_t count = 0;
    double v = 0.0;      // integrated density at lambda
    double ratio = 0.0;  // count / ((k/2pi)^n v)
    bool valid = false;  // false when the 0/0 guard fired
};

// Errors: LambdaOnSigma if lambda touches the envelope; AboveCertifiedCutoff
// through the counting function.
WeylRatio global_weyl(const EigenSystem& es, const GeometryField& geom, const IntervalUnion& sigma,
                      double lambda);

struct LocalWeyl {
    double raw = 0.0;        // sum of |Psi_i(y)|^2 over eigenvalues in [a, b]
    double scaled = 0.0;     // (2pi/k)^n * raw
    double predicted = 0.0;  // multiplicity of the model spectrum at y in [a, b]
};

// Errors: EndpointOnSigmaY if a or b is closer than margin to the model
// spectrum at y; AboveCertifiedCutoff if b exceeds the certified range;
// BadArgument without eigenvectors.
LocalWeyl local_weyl(const EigenSystem& es, const GeometryField& geom, int64_t y_site, double a,
                     double b, double margin = 1e-6);

struct KernelSlice {
    std::vector<int> t;          // lattice steps along the ray
    std::vector<double> eu;      // Euclidean |xi|
    std::vector<double> sq;      // |xi|_y^2 at the base point
    std::vector<double> value;   // Frobenius modulus of the A-fiber block
    double peak = 0.0;           // value at xi = 0
    int k = 1, n = 1;
};

// Spectral-window kernel Pi(x + t e_axis, x) = sum_{lambda_i in [lo,hi]}
// Psi_i(x') Psi_i(x)^dag, reported through its gauge-invariant modulus.
KernelSlice projector_kernel_slice(const EigenSystem& es, const GeometryField& geom, double lo,
                                   double hi, int64_t x_site, int axis, int radius);

struct GaussianFit {
    double c = 0.0;  // decay coefficient in value ~ exp(-c * k * |xi|_y^2)
    double log_peak = 0.0;
    double residual = 0.0;
    int used = 0;
};

// Fit over samples within two magnetic lengths (k |xi|_y^2 <= 8).
// Errors: InsufficientSamples below 6 usable points.
GaussianFit gaussian_profile_fit(const KernelSlice& slice);

struct FunctionalDiag {
    double lhs = 0.0;  // (2pi/k)^n sum_i g(lambda_i) |Psi_i(y)|^2
    double rhs = 0.0;  // trace of g on the model spectrum at y
    double rel_dev = 0.0;
};

// Errors: SupportExceedsCertifiedRange if support_end > certified cutoff;
// BadArgument without eigenvectors.
FunctionalDiag functional_calculus_diag(const EigenSystem& es, const GeometryField& geom,
                                        const std::function<double(double)>& g, double support_end,
                                        int64_t y_site);

struct GardingCheck {
    double f_lo = 0.0, f_hi = 0.0;
    double margin_lo = 0.0, margin_hi = 0.0;  // observed overshoot on each side
    double margin_allow = 0.0;
    bool ok = true;
};

// Eigenvalues inside the window I must fall in [f_lo, f_hi] up to the
// allowed margin; the observed overshoots are reported either way.
GardingCheck garding_bounds(const EigenSystem& es, std::pair<double, double> I, double f_lo,
                            double f_hi, double margin_allow);

}  // namespace maglap
