#include "maglap/eigensolver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>

namespace maglap {

namespace {

// Action of R^{1/2} H R^{-1/2} (standard-Hermitian conjugation of the
// weighted operator). Eigenvectors map back through R^{-1/2}.
struct StdOp {
    const SparseHermitian* H;
    int threads;
    VectorXcd sqw, isqw;
    double scale;

    explicit StdOp(const SparseHermitian& h, int th) : H(&h), threads(th) {
        sqw.resize(h.dim);
        isqw.resize(h.dim);
        for (int64_t i = 0; i < h.dim; ++i) {
            double s = std::sqrt(h.w[static_cast<size_t>(i)]);
            sqw[i] = s;
            isqw[i] = 1.0 / s;
        }
        scale = std::max(1.0, h.norm_estimate());
    }

    VectorXcd apply(const VectorXcd& x) const {
        VectorXcd t = x.cwiseProduct(isqw);
        VectorXcd y = H->matvec(t, threads);
        return y.cwiseProduct(sqw);
    }
};

struct PassResult {
    std::vector<double> theta;      // ascending after final sort
    std::vector<VectorXcd> ys;      // standardized-coordinates eigenvectors
    std::vector<double> resid;      // true residuals ||M y - theta y||
    int iterations = 0;
};

void ortho_against(const MatrixXcd& L, VectorXcd& v) {
    if (L.cols() == 0) return;
    v -= L * (L.adjoint() * v);
}

// One certification pass: restarted Lanczos with full reorthogonalization,
// locking converged Ritz pairs at or below cut_lock until two consecutive
// restarts add nothing.
PassResult run_pass(const StdOp& op, double cut_lock, double tol_abs, uint64_t seed,
                    const SolverOptions& opts) {
    const int64_t D = op.H->dim;
    Rng rng(seed);
    MatrixXcd L(D, 0);
    PassResult out;
    int stall = 0, conv_fail = 0;
    const int64_t restart_cap = std::max<int64_t>(opts.max_restarts, D + 2);
    const double breakdown_tol = 1e-12 * op.scale;
    // Krylov length per restart. The needed length scales like the square
    // root of (spectral range / target spacing), which is not known up
    // front; a restart that locks nothing while sub-cutoff Ritz values stay
    // unconverged doubles it, up to the full dimension.
    int64_t block = std::min<int64_t>(opts.block_len, D);

    for (int64_t rs = 0; rs < restart_cap; ++rs) {
        if (L.cols() == D) return out;
        VectorXcd v(D);
        bool have_seed = false;
        for (int attempt = 0; attempt < 3 && !have_seed; ++attempt) {
            for (int64_t i = 0; i < D; ++i)
                v[i] = cdouble(rng.uniform() - 0.5, rng.uniform() - 0.5);
            ortho_against(L, v);
            ortho_against(L, v);
            double nv = v.norm();
            if (nv > 1e-8) {
                v /= nv;
                have_seed = true;
            }
        }
        if (!have_seed) return out;  // locked space exhausts the relevant subspace

        const int m = static_cast<int>(std::min<int64_t>(block, D - L.cols()));
        MatrixXcd V(D, m + 1);
        V.col(0) = v;
        VectorXd alpha = VectorXd::Zero(m), beta = VectorXd::Zero(m);
        int used = 0;
        bool breakdown = false;

        for (int j = 0; j < m; ++j) {
            VectorXcd w = op.apply(V.col(j));
            ++out.iterations;
            if (j > 0) w -= beta[j - 1] * V.col(j - 1);
            const double aj = V.col(j).dot(w).real();
            alpha[j] = aj;
            w -= aj * V.col(j);
            for (int pass = 0; pass < 2; ++pass) {
                ortho_against(L, w);
                w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w);
            }
            const double bj = w.norm();
            beta[j] = bj;
            used = j + 1;
            if (bj < breakdown_tol) {
                breakdown = true;
                break;
            }
            V.col(j + 1) = w / bj;
            if ((j + 1) % 16 == 0 || j + 1 == m) {
                MatrixXd T = MatrixXd::Zero(used, used);
                for (int t = 0; t < used; ++t) {
                    T(t, t) = alpha[t];
                    if (t + 1 < used) T(t, t + 1) = T(t + 1, t) = beta[t];
                }
                Eigen::SelfAdjointEigenSolver<MatrixXd> small(T);
                bool all_conv = true, any_above = false;
                for (int i = 0; i < used; ++i) {
                    const double th = small.eigenvalues()[i];
                    if (th > cut_lock) {
                        any_above = true;
                        continue;
                    }
                    if (std::abs(beta[used - 1] * small.eigenvectors()(used - 1, i)) > tol_abs)
                        all_conv = false;
                }
                if (all_conv && (any_above || L.cols() + used == D)) break;
            }
        }

        MatrixXd T = MatrixXd::Zero(used, used);
        for (int t = 0; t < used; ++t) {
            T(t, t) = alpha[t];
            if (t + 1 < used) T(t, t + 1) = T(t + 1, t) = beta[t];
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> small(T);
        int added = 0;
        bool unconverged_below = false;
        std::vector<VectorXcd> fresh;
        for (int i = 0; i < used; ++i) {
            const double th = small.eigenvalues()[i];
            if (th > cut_lock) continue;
            const double bound =
                breakdown ? 0.0 : std::abs(beta[used - 1] * small.eigenvectors()(used - 1, i));
            if (bound > tol_abs) {
                unconverged_below = true;
                continue;
            }
            VectorXcd y = V.leftCols(used) * small.eigenvectors().col(i).cast<cdouble>();
            ortho_against(L, y);
            for (const auto& f : fresh) y -= f * f.dot(y);
            const double ny = y.norm();
            if (ny < 0.5) continue;  // ghost of an already-locked direction
            y /= ny;
            const double rres = (op.apply(y) - th * y).norm();
            if (rres > std::max(20.0 * tol_abs, 1e-13 * op.scale)) {
                unconverged_below = true;
                continue;
            }
            fresh.push_back(y);
            out.theta.push_back(th);
            out.resid.push_back(rres);
            ++added;
        }
        if (!fresh.empty()) {
            MatrixXcd L2(D, L.cols() + static_cast<int64_t>(fresh.size()));
            L2.leftCols(L.cols()) = L;
            for (size_t i = 0; i < fresh.size(); ++i) {
                L2.col(L.cols() + static_cast<int64_t>(i)) = fresh[i];
                out.ys.push_back(std::move(fresh[i]));
            }
            L = std::move(L2);
        }

        if (added == 0) {
            if (unconverged_below) {
                if (block < D) {
                    block = std::min<int64_t>(D, 2 * block);
                    conv_fail = 0;
                } else if (++conv_fail >= 2) {
                    throw Error("NoConvergence", "Ritz values below the cutoff failed to settle");
                }
            } else if (++stall >= 2) {
                return out;
            }
        } else {
            stall = 0;
            conv_fail = 0;
        }
    }
    throw Error("NoConvergence", "restart budget exhausted");
}

void sort_system(EigenSystem& es) {
    std::vector<size_t> idx(es.eigenvalues.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        return es.eigenvalues[a] < es.eigenvalues[b];
    });
    EigenSystem tmp = es;
    for (size_t i = 0; i < idx.size(); ++i) {
        es.eigenvalues[i] = tmp.eigenvalues[idx[i]];
        if (!tmp.residuals.empty()) es.residuals[i] = tmp.residuals[idx[i]];
        if (!tmp.vectors.empty()) es.vectors[i] = std::move(tmp.vectors[idx[i]]);
    }
}

}  // namespace

int64_t EigenSystem::count_below(double lam) const {
    return static_cast<int64_t>(
        std::upper_bound(eigenvalues.begin(), eigenvalues.end(), lam) - eigenvalues.begin());
}

EigenSystem dense_eig(const SparseHermitian& H, int k, const SolverOptions& opts) {
    if (k < 1) throw Error("BadArgument", "tensor power k must be >= 1");
    if (H.dim > opts.dense_cap)
        throw Error("DimensionTooLarge", "dimension exceeds the dense solver cap");
    MatrixXcd M = H.dense_standardized();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver;
    solver.compute(M, opts.want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error("NoConvergence", "dense solver failed");

    EigenSystem es;
    es.k = k;
    es.method = "dense";
    es.seed = opts.seed;
    es.lambda_cut = std::numeric_limits<double>::infinity();
    const int64_t D = H.dim;
    es.eigenvalues.resize(static_cast<size_t>(D));
    for (int64_t i = 0; i < D; ++i)
        es.eigenvalues[static_cast<size_t>(i)] = solver.eigenvalues()[i] / k;
    if (opts.want_vectors) {
        VectorXcd isqw(D);
        for (int64_t i = 0; i < D; ++i)
            isqw[i] = 1.0 / std::sqrt(H.w[static_cast<size_t>(i)]);
        es.vectors.resize(static_cast<size_t>(D));
        es.residuals.resize(static_cast<size_t>(D));
        for (int64_t i = 0; i < D; ++i) {
            VectorXcd y = solver.eigenvectors().col(i);
            VectorXcd r = M * y - solver.eigenvalues()[i] * y;
            es.residuals[static_cast<size_t>(i)] = r.norm();
            es.vectors[static_cast<size_t>(i)] = y.cwiseProduct(isqw);
        }
    }
    return es;
}

EigenSystem lanczos_lowest(const SparseHermitian& H, int k, double lambda,
                           const SolverOptions& opts) {
    if (k < 1) throw Error("BadArgument", "tensor power k must be >= 1");
    StdOp op(H, opts.threads);
    const double tol_abs = opts.tol * op.scale;
    const double cutH = static_cast<double>(k) * lambda;
    const double marginH = static_cast<double>(k) * std::max(0.2, 0.05 * lambda);

    PassResult p1 = run_pass(op, cutH + marginH, tol_abs, opts.seed, opts);
    PassResult p2 =
        run_pass(op, cutH + 2.0 * marginH, tol_abs, opts.seed ^ 0x9e3779b97f4a7c15ull, opts);

    std::vector<double> t1 = p1.theta, t2 = p2.theta;
    std::sort(t1.begin(), t1.end());
    std::sort(t2.begin(), t2.end());
    auto below = [cutH](const std::vector<double>& t) {
        return std::upper_bound(t.begin(), t.end(), cutH) - t.begin();
    };
    if (below(t1) != below(t2))
        throw Error("ClusterUnresolved", "independent starts disagree on the count below the cutoff");
    const double match_tol = 1e-8 * static_cast<double>(k) * std::max(1.0, std::abs(lambda));
    size_t q = 0;
    for (double th : t1) {
        if (th > cutH) break;
        while (q < t2.size() && t2[q] < th - match_tol) ++q;
        if (q == t2.size() || std::abs(t2[q] - th) > match_tol)
            throw Error("ClusterUnresolved", "shifted certification run is not a superset");
        ++q;
    }

    EigenSystem es;
    es.k = k;
    es.method = "lanczos";
    es.seed = opts.seed;
    es.lambda_cut = lambda;
    es.iterations = p1.iterations + p2.iterations;
    for (size_t i = 0; i < p1.theta.size(); ++i) {
        if (p1.theta[i] > cutH) continue;
        es.eigenvalues.push_back(p1.theta[i] / k);
        es.residuals.push_back(p1.resid[i]);
        if (opts.want_vectors) es.vectors.push_back(p1.ys[i].cwiseProduct(op.isqw));
    }
    sort_system(es);
    return es;
}

EigenSystem solve_low_spectrum(const SparseHermitian& H, int k, double lambda,
                               const SolverOptions& opts) {
    if (H.dim <= opts.dense_cap) return dense_eig(H, k, opts);
    return lanczos_lowest(H, k, lambda, opts);
}

int64_t counting_function(const EigenSystem& es, double lam) {
    if (lam > es.lambda_cut)
        throw Error("AboveCertifiedCutoff", "count requested beyond the certified range");
    return es.count_below(lam);
}

namespace {
constexpr char kCacheMagic[4] = {'M', 'L', 'E', 'C'};
constexpr uint32_t kCacheVersion = 1;

template <class T>
void put(std::ofstream& o, const T& v) {
    o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
bool get(std::ifstream& i, T& v) {
    i.read(reinterpret_cast<char*>(&v), sizeof v);
    return static_cast<bool>(i);
}
}  // namespace

void save_eigen_cache(const std::string& path, const EigenCacheKey& key, const EigenSystem& es,
                      int r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IoError", "cannot open " + path);
    out.write(kCacheMagic, 4);
    put(out, kCacheVersion);
    put(out, key.config_hash);
    put(out, static_cast<int32_t>(key.k));
    put(out, static_cast<int32_t>(key.N));
    put(out, key.lambda);
    put(out, key.tol);
    put(out, key.seed);
    put(out, static_cast<uint8_t>(es.vectors.empty() ? 0 : 1));
    put(out, static_cast<int32_t>(r));
    put(out, es.lambda_cut);
    put(out, es.seed);
    put(out, static_cast<int32_t>(es.iterations));
    uint8_t method = es.method == "lanczos" ? 1 : 0;
    put(out, method);
    int64_t dim = es.vectors.empty() ? 0 : es.vectors.front().size();
    int64_t count = static_cast<int64_t>(es.eigenvalues.size());
    put(out, dim);
    put(out, count);
    out.write(reinterpret_cast<const char*>(es.eigenvalues.data()),
              static_cast<std::streamsize>(count * static_cast<int64_t>(sizeof(double))));
    std::vector<double> res = es.residuals;
    res.resize(static_cast<size_t>(count), 0.0);
    out.write(reinterpret_cast<const char*>(res.data()),
              static_cast<std::streamsize>(count * static_cast<int64_t>(sizeof(double))));
    for (const auto& v : es.vectors)
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(dim * static_cast<int64_t>(sizeof(cdouble))));
    if (!out) throw Error("IoError", "short write to " + path);
}

std::optional<EigenSystem> load_eigen_cache(const std::string& path, const EigenCacheKey& key) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4];
    in.read(magic, 4);
    uint32_t version = 0;
    if (!in || std::memcmp(magic, kCacheMagic, 4) != 0 || !get(in, version) ||
        version != kCacheVersion)
        throw Error("CacheCorrupt", "bad cache header in " + path);
    uint64_t hash;
    int32_t k, N;
    double lambda, tol;
    uint64_t seed;
    uint8_t has_vec;
    int32_t r;
    if (!get(in, hash) || !get(in, k) || !get(in, N) || !get(in, lambda) || !get(in, tol) ||
        !get(in, seed) || !get(in, has_vec) || !get(in, r))
        throw Error("CacheCorrupt", "truncated cache header in " + path);
    if (hash != key.config_hash || k != key.k || N != key.N ||
        std::memcmp(&lambda, &key.lambda, sizeof lambda) != 0 ||
        std::memcmp(&tol, &key.tol, sizeof tol) != 0 || seed != key.seed ||
        (key.want_vectors && !has_vec))
        return std::nullopt;

    EigenSystem es;
    es.k = k;
    double lc;
    uint64_t es_seed;
    int32_t iters;
    uint8_t method;
    int64_t dim, count;
    if (!get(in, lc) || !get(in, es_seed) || !get(in, iters) || !get(in, method) ||
        !get(in, dim) || !get(in, count) || count < 0 || dim < 0)
        throw Error("CacheCorrupt", "truncated cache body in " + path);
    es.lambda_cut = lc;
    es.seed = es_seed;
    es.iterations = iters;
    es.method = method ? "lanczos" : "dense";
    es.eigenvalues.resize(static_cast<size_t>(count));
    es.residuals.resize(static_cast<size_t>(count));
    in.read(reinterpret_cast<char*>(es.eigenvalues.data()),
            static_cast<std::streamsize>(count * static_cast<int64_t>(sizeof(double))));
    in.read(reinterpret_cast<char*>(es.residuals.data()),
            static_cast<std::streamsize>(count * static_cast<int64_t>(sizeof(double))));
    if (!in) throw Error("CacheCorrupt", "truncated eigenvalue block in " + path);
    if (has_vec) {
        es.vectors.resize(static_cast<size_t>(count));
        for (int64_t i = 0; i < count; ++i) {
            es.vectors[static_cast<size_t>(i)].resize(dim);
            in.read(reinterpret_cast<char*>(es.vectors[static_cast<size_t>(i)].data()),
                    static_cast<std::streamsize>(dim * static_cast<int64_t>(sizeof(cdouble))));
        }
        if (!in) throw Error("CacheCorrupt", "truncated eigenvector block in " + path);
    }
    return es;
}

}  // namespace maglap
