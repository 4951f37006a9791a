#pragma once
// Shared small utilities: typed errors, multi-index tables, deterministic RNG,
// an index-parallel loop. Everything here is header-only.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace maglap {

using cdouble = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Error with a stable machine-readable code ("NonIntegralFlux", "RankJump", ...).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Multi-index alpha in N^n. Tables are in graded lexicographic order:
// primary key |alpha|, secondary plain lexicographic. The order is a fixed
// convention; projector matrices and oscillator labels rely on it being
// identical across call sites.
using MIdx = std::vector<int>;

inline int mi_weight(const MIdx& a) {
    int s = 0;
    for (int v : a) s += v;
    return s;
}

inline bool graded_lex_less(const MIdx& a, const MIdx& b) {
    int wa = mi_weight(a), wb = mi_weight(b);
    if (wa != wb) return wa < wb;
    return a < b;
}

inline double mi_factorial(const MIdx& a) {
    double f = 1.0;
    for (int v : a)
        for (int j = 2; j <= v; ++j) f *= j;
    return f;
}

// All alpha with |alpha| <= cap, graded-lex, with reverse lookup.
class MultiIndexTable {
public:
    MultiIndexTable() = default;
    MultiIndexTable(int n, int cap) : n_(n), cap_(cap) {
        if (n < 1) throw Error("BadArgument", "multi-index dimension must be >= 1");
        if (cap < 0) throw Error("BadArgument", "multi-index cap must be >= 0");
        MIdx cur(n, 0);
        emit(cur, 0, cap);
        std::sort(list_.begin(), list_.end(), graded_lex_less);
        for (size_t i = 0; i < list_.size(); ++i) pos_[list_[i]] = static_cast<int>(i);
    }
    int n() const { return n_; }
    int cap() const { return cap_; }
    int size() const { return static_cast<int>(list_.size()); }
    const MIdx& at(int i) const { return list_[i]; }
    int index_of(const MIdx& a) const {
        auto it = pos_.find(a);
        return it == pos_.end() ? -1 : it->second;
    }

private:
    void emit(MIdx& cur, int pos, int budget) {
        if (pos == n_) {
            list_.push_back(cur);
            return;
        }
        for (int v = 0; v <= budget; ++v) {
            cur[pos] = v;
            emit(cur, pos + 1, budget - v);
        }
        cur[pos] = 0;
    }
    int n_ = 0, cap_ = 0;
    std::vector<MIdx> list_;
    std::map<MIdx, int> pos_;
};

// Deterministic RNG independent of libstdc++ distribution internals.
// splitmix64 core; uniform doubles take the top 53 bits.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}
    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    cdouble unit_complex() {
        double t = uniform(0.0, 2.0 * 3.14159265358979323846);
        return {std::cos(t), std::sin(t)};
    }

private:
    uint64_t state_;
};

// Runs fn(i) for i in [0, count). Outputs must go to preallocated per-index
// slots so the result is identical for any thread count.
inline void parallel_for(int64_t count, int threads, const std::function<void(int64_t)>& fn) {
    if (threads <= 1 || count < 2) {
        for (int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    int nt = static_cast<int>(std::min<int64_t>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::exception_ptr err;
    std::mutex err_mx;
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (int64_t i = t; i < count; i += nt) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mx);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

// Pfaffian of a small antisymmetric matrix (2x2 or 4x4 suffices here).
inline double pfaffian(const MatrixXd& A) {
    const auto d = A.rows();
    if (d == 2) return A(0, 1);
    if (d == 4)
        return A(0, 1) * A(2, 3) - A(0, 2) * A(1, 3) + A(0, 3) * A(1, 2);
    throw Error("BadArgument", "pfaffian implemented for dim 2 and 4 only");
}

// FNV-1a 64-bit over a byte string; used for config hashing.
inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace maglap
