#pragma once

#include "dec/dec_suite.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace dec {

/// Values g[f][x] of a finite function class over a finite index set.
struct FunctionClassTable {
    std::size_t rows = 0; ///< |F|
    std::size_t cols = 0; ///< |X|
    std::vector<double> values;

    FunctionClassTable() = default;
    FunctionClassTable(std::size_t r, std::size_t c, double v = 0.0) : rows(r), cols(c), values(r * c, v) {}
    double& operator()(std::size_t f, std::size_t x) { return values[f * cols + x]; }
    double operator()(std::size_t f, std::size_t x) const { return values[f * cols + x]; }

    void validate() const {
        require(rows >= 1 && cols >= 1, "function class: empty table");
        require(values.size() == rows * cols, "function class: table has wrong size");
        for (double v : values) require(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12, "function class: entry outside [-1, 1]");
    }
};

/// Q-type Bellman errors g_h[M'][M] under the reference ref, one table per step.
/// The roll-in policy pi_M is M's optimal policy in pc.
inline std::vector<FunctionClassTable> qbe_tables(const ModelClass& cls, std::size_t ref, const PolicyClass& pc) {
    require(ref < cls.size(), "qbe: reference index out of range");
    const Shape& sh = cls.shape();
    const Model& Mb = cls[ref];
    const std::size_t K = cls.size();
    std::vector<std::vector<double>> occ(K);
    for (std::size_t m = 0; m < K; ++m) occ[m] = occupancy_measure(Mb, optimal_policy(cls[m], pc).policy);
    std::vector<FunctionClassTable> g(sh.H, FunctionClassTable(K, K));
    for (std::size_t mp = 0; mp < K; ++mp) {
        auto vi = value_iteration(cls[mp]);
        // Bellman residual of M' under the reference dynamics, per (h, s, a).
        std::vector<double> res(static_cast<std::size_t>(sh.H) * sh.S * sh.A);
        for (int h = 0; h < sh.H; ++h)
            for (int s = 0; s < sh.S; ++s)
                for (int a = 0; a < sh.A; ++a) {
                    std::size_t c = (static_cast<std::size_t>(h) * sh.S + s) * sh.A + a;
                    double next = 0.0;
                    if (h + 1 < sh.H)
                        for (int s2 = 0; s2 < sh.S; ++s2) next += Mb.p(h, s, a, s2) * vi.V[(h + 1) * sh.S + s2];
                    res[c] = vi.Q[c] - Mb.r(h, s, a) - next;
                }
        for (std::size_t m = 0; m < K; ++m)
            for (int h = 0; h < sh.H; ++h) {
                double v = 0.0;
                for (std::size_t c = static_cast<std::size_t>(h) * sh.S * sh.A; c < (h + 1u) * sh.S * sh.A; ++c)
                    v += occ[m][c] * res[c];
                g[h](mp, m) = std::clamp(v, -1.0, 1.0);
            }
    }
    return g;
}

namespace detail {

using XSet = std::vector<std::uint64_t>;

inline bool has(const XSet& s, std::size_t x) { return (s[x / 64] >> (x % 64)) & 1u; }
inline void put(XSet& s, std::size_t x) { s[x / 64] |= std::uint64_t{1} << (x % 64); }
inline std::size_t popcount(const XSet& s) {
    std::size_t n = 0;
    for (auto w : s) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

inline std::vector<double> thresholds(const FunctionClassTable& t, double delta) {
    std::set<double> th;
    for (double v : t.values)
        if (std::abs(v) >= delta && std::abs(v) > 0.0) th.insert(std::abs(v));
    return {th.begin(), th.end()};
}

inline void check_search(const FunctionClassTable& t, double delta, const char* what) {
    t.validate();
    require(delta > 0.0, std::string(what) + ": delta must be positive");
    require(t.rows * t.cols <= 400, std::string(what) + ": table exceeds 400 entries");
}

/// Longest sequence of distinct x at threshold tau. The next x is admissible
/// when some f has |f(x)| >= tau and Sum_{used x'} f(x')^2 <= tau^2, so
/// admissibility depends on the used set only and shrinks as it grows.
inline std::size_t eluder_at(const FunctionClassTable& t, double tau) {
    const std::size_t W = (t.cols + 63) / 64;
    std::map<XSet, std::size_t> memo;
    std::function<std::size_t(const XSet&, const std::vector<double>&)> rec = [&](const XSet& used,
                                                                                  const std::vector<double>& sums) {
        auto it = memo.find(used);
        if (it != memo.end()) return it->second;
        std::size_t best = 0;
        for (std::size_t x = 0; x < t.cols; ++x) {
            if (has(used, x)) continue;
            bool ok = false;
            for (std::size_t f = 0; f < t.rows && !ok; ++f)
                ok = std::abs(t(f, x)) >= tau && sums[f] <= tau * tau * (1.0 + 1e-12);
            if (!ok) continue;
            XSet next = used;
            put(next, x);
            std::vector<double> s2 = sums;
            for (std::size_t f = 0; f < t.rows; ++f) s2[f] += t(f, x) * t(f, x);
            best = std::max(best, 1 + rec(next, s2));
        }
        memo.emplace(used, best);
        return best;
    };
    return rec(XSet(W, 0), std::vector<double>(t.rows, 0.0));
}

/// Largest set of distinct x where each x has a witness f with |f(x)| >= tau
/// and Sum over the other members of f^2 <= tau^2. The property is hereditary.
inline std::size_t star_at(const FunctionClassTable& t, double tau) {
    std::vector<std::size_t> cand;
    for (std::size_t x = 0; x < t.cols; ++x)
        for (std::size_t f = 0; f < t.rows; ++f)
            if (std::abs(t(f, x)) >= tau) {
                cand.push_back(x);
                break;
            }
    std::vector<std::size_t> chosen;
    std::size_t best = 0;
    auto feasible = [&](const std::vector<std::size_t>& S) {
        for (std::size_t i : S) {
            bool ok = false;
            for (std::size_t f = 0; f < t.rows && !ok; ++f) {
                if (std::abs(t(f, i)) < tau) continue;
                double s = 0.0;
                for (std::size_t j : S)
                    if (j != i) s += t(f, j) * t(f, j);
                ok = s <= tau * tau * (1.0 + 1e-12);
            }
            if (!ok) return false;
        }
        return true;
    };
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (chosen.size() + (cand.size() - k) <= best) return;
        if (k == cand.size()) {
            best = chosen.size();
            return;
        }
        chosen.push_back(cand[k]);
        if (feasible(chosen)) rec(k + 1);
        chosen.pop_back();
        rec(k + 1);
    };
    rec(0);
    return best;
}

} // namespace detail

/// Eluder dimension with pairwise distinct x; scans every threshold Delta' >= delta.
inline std::size_t eluder_dim(const FunctionClassTable& t, double delta) {
    detail::check_search(t, delta, "eluder dimension");
    std::size_t best = 0;
    for (double tau : detail::thresholds(t, delta)) best = std::max(best, detail::eluder_at(t, tau));
    return best;
}

inline std::size_t star_number(const FunctionClassTable& t, double delta) {
    detail::check_search(t, delta, "star number");
    std::size_t best = 0;
    for (double tau : detail::thresholds(t, delta)) best = std::max(best, detail::star_at(t, tau));
    return best;
}

namespace detail {

inline void dc_terms(const FunctionClassTable& t, std::vector<double>& a, Matrix& Psi, double gamma) {
    const std::size_t n = t.rows * t.cols;
    a.assign(n, 0.0);
    Psi = Matrix(n, n);
    for (std::size_t f = 0; f < t.rows; ++f)
        for (std::size_t x = 0; x < t.cols; ++x) {
            a[f * t.cols + x] = std::abs(t(f, x));
            for (std::size_t f2 = 0; f2 < t.rows; ++f2)
                for (std::size_t x2 = 0; x2 < t.cols; ++x2)
                    Psi(f * t.cols + x, f2 * t.cols + x2) = gamma * t(f, x2) * t(f, x2);
        }
}

} // namespace detail

/// sup over nu in Delta(F x X) of E_nu|f(x)| - gamma E_{f~nu_F} E_{x~nu_X} f(x)^2.
/// Grid mode is refused above 9 cells.
template <class Mode>
ComplexityReport dc_estimate(const FunctionClassTable& t, double gamma, Mode mode) {
    detail::Stopwatch sw;
    t.validate();
    detail::check_gamma(gamma);
    std::vector<double> a;
    Matrix Psi;
    detail::dc_terms(t, a, Psi, gamma);
    if constexpr (std::is_same_v<Mode, GridMode>) {
        require(t.rows * t.cols <= 9, "dc: grid mode needs |F|*|X| <= 9");
        mode.max_dimension = 9;
    }
    auto s = simplex_quadratic_max(a, Psi, mode);
    ComplexityReport r;
    r.quantity = "dc";
    r.value = s.value;
    r.status = s.status;
    r.error_bound = s.error_bound;
    r.gamma = gamma;
    r.witness.emplace_back("nu", s.mixture());
    r.seconds = sw.seconds();
    return r;
}

} // namespace dec
