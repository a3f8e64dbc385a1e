#pragma once

#include "dec/support.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace dec::lp {

enum class Sense { Le, Eq, Ge };
enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

/// maximize c^T x subject to rows (a_i^T x  sense_i  b_i), x >= 0.
struct Problem {
    std::size_t n = 0;
    std::vector<double> c;
    std::vector<double> A; ///< row-major, rows() x n
    std::vector<Sense> sense;
    std::vector<double> b;

    explicit Problem(std::size_t num_vars = 0) : n(num_vars), c(num_vars, 0.0) {}

    std::size_t rows() const { return b.size(); }

    void add_row(const std::vector<double>& a, Sense s, double rhs) {
        require(a.size() == n, "lp: row has wrong length");
        A.insert(A.end(), a.begin(), a.end());
        sense.push_back(s);
        b.push_back(rhs);
    }
};

struct Solution {
    Status status = Status::IterationLimit;
    double objective = 0.0;
    std::vector<double> x; ///< primal values
    std::vector<double> y; ///< one multiplier per row, b^T y = c^T x at optimum
    std::size_t pivots = 0;
};

struct Options {
    double tol = 1e-10;       ///< reduced-cost and feasibility tolerance
    double pivot_tol = 1e-9;  ///< smallest admissible pivot magnitude
    std::size_t degenerate_switch = 50;
};

namespace detail {

class Tableau {
public:
    Tableau(std::size_t m, std::size_t cols) : m_(m), w_(cols + 1), T_((m + 1) * (cols + 1), 0.0) {}

    double& at(std::size_t i, std::size_t j) { return T_[i * w_ + j]; }
    double at(std::size_t i, std::size_t j) const { return T_[i * w_ + j]; }
    double& rhs(std::size_t i) { return T_[i * w_ + w_ - 1]; }
    double* row(std::size_t i) { return T_.data() + i * w_; }
    std::size_t width() const { return w_; }
    std::size_t obj() const { return m_; }

    void pivot(std::size_t r, std::size_t c) {
        double* pr = row(r);
        const double inv = 1.0 / pr[c];
        nz_.clear();
        for (std::size_t j = 0; j < w_; ++j) {
            if (pr[j] == 0.0) continue;
            pr[j] *= inv;
            if (std::abs(pr[j]) < 1e-15) pr[j] = 0.0;
            else nz_.push_back(j);
        }
        pr[c] = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            double* pi = row(i);
            const double f = pi[c];
            if (f == 0.0) continue;
            for (std::size_t j : nz_) {
                double v = pi[j] - f * pr[j];
                pi[j] = std::abs(v) < 1e-15 ? 0.0 : v;
            }
            pi[c] = 0.0;
        }
    }

private:
    std::size_t m_, w_;
    std::vector<double> T_;
    std::vector<std::size_t> nz_;
};

} // namespace detail

/// Dense two-phase tableau simplex. Entering column: most negative reduced
/// cost, lowest index on ties; after a run of degenerate pivots the phase
/// continues with Bland's rule. Leaving row: minimum ratio, lowest basic
/// index on ties.
inline Solution solve(const Problem& P, const Options& opt = {}) {
    const std::size_t m = P.rows(), n = P.n;
    require(P.A.size() == m * n && P.sense.size() == m && P.c.size() == n, "lp: inconsistent problem");

    std::vector<double> flip(m, 1.0);
    std::vector<Sense> sense = P.sense;
    for (std::size_t i = 0; i < m; ++i)
        if (P.b[i] < 0.0) {
            flip[i] = -1.0;
            if (sense[i] == Sense::Le) sense[i] = Sense::Ge;
            else if (sense[i] == Sense::Ge) sense[i] = Sense::Le;
        }

    std::size_t n_slack = 0, n_art = 0;
    for (auto s : sense) {
        if (s != Sense::Eq) ++n_slack;
        if (s != Sense::Le) ++n_art;
    }
    const std::size_t art0 = n + n_slack, cols = n + n_slack + n_art;
    detail::Tableau T(m, cols);
    std::vector<std::size_t> basis(m), unit(m);
    {
        std::size_t sl = n, ar = art0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) T.at(i, j) = flip[i] * P.A[i * n + j];
            T.rhs(i) = flip[i] * P.b[i];
            if (sense[i] == Sense::Le) {
                T.at(i, sl) = 1.0;
                basis[i] = unit[i] = sl++;
            } else {
                if (sense[i] == Sense::Ge) T.at(i, sl++) = -1.0;
                T.at(i, ar) = 1.0;
                basis[i] = unit[i] = ar++;
            }
        }
    }

    Solution sol;
    const std::size_t z = T.obj();
    const std::size_t limit = 200 * (m + cols) + 1000;

    auto run_phase = [&](std::size_t enter_limit) -> Status {
        bool bland = false;
        std::size_t degenerate = 0;
        for (;;) {
            if (sol.pivots > limit) return Status::IterationLimit;
            std::size_t c = cols;
            double best = -opt.tol;
            for (std::size_t j = 0; j < enter_limit; ++j) {
                double rc = T.at(z, j);
                if (rc < best) {
                    c = j;
                    if (bland) break;
                    best = rc;
                }
            }
            if (c == cols) return Status::Optimal;
            std::size_t r = m;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
                double a = T.at(i, c);
                if (a <= opt.pivot_tol) continue;
                double q = std::max(T.rhs(i), 0.0) / a;
                if (q < ratio - 1e-13 || (q <= ratio + 1e-13 && r < m && basis[i] < basis[r])) {
                    if (q < ratio) ratio = q;
                    r = i;
                }
            }
            if (r == m) return Status::Unbounded;
            double before = T.rhs(z);
            T.pivot(r, c);
            basis[r] = c;
            ++sol.pivots;
            if (std::abs(T.rhs(z) - before) <= 1e-14) {
                if (++degenerate >= opt.degenerate_switch) bland = true;
            } else {
                degenerate = 0;
            }
        }
    };

    if (n_art > 0) {
        // Phase 1: maximize -sum of artificials.
        for (std::size_t i = 0; i < m; ++i)
            if (basis[i] >= art0) {
                double* ri = T.row(i);
                double* rz = T.row(z);
                for (std::size_t j = 0; j < T.width(); ++j) rz[j] -= ri[j];
            }
        for (std::size_t j = art0; j < cols; ++j) T.at(z, j) = 0.0;
        Status st = run_phase(cols);
        if (st == Status::IterationLimit) {
            sol.status = st;
            return sol;
        }
        double scale = 1.0;
        for (double v : P.b) scale = std::max(scale, std::abs(v));
        if (T.rhs(z) < -1e-8 * scale) {
            sol.status = Status::Infeasible;
            return sol;
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (basis[i] < art0) continue;
            for (std::size_t j = 0; j < art0; ++j)
                if (std::abs(T.at(i, j)) > opt.pivot_tol) {
                    T.pivot(i, j);
                    basis[i] = j;
                    ++sol.pivots;
                    break;
                }
        }
    }

    // Phase 2 objective row: z_j = c_B B^{-1} a_j - c_j.
    {
        double* rz = T.row(z);
        std::fill(rz, rz + T.width(), 0.0);
        for (std::size_t j = 0; j < n; ++j) rz[j] = -P.c[j];
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t bj = basis[i];
            double cb = bj < n ? P.c[bj] : 0.0;
            if (cb == 0.0) continue;
            double* ri = T.row(i);
            for (std::size_t j = 0; j < T.width(); ++j) rz[j] += cb * ri[j];
        }
    }
    Status st = run_phase(art0);
    sol.status = st;
    if (st != Status::Optimal) return sol;

    sol.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) sol.x[basis[i]] = std::max(T.rhs(i), 0.0);
    sol.y.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) sol.y[i] = flip[i] * T.at(z, unit[i]);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.objective += P.c[j] * sol.x[j];
    return sol;
}

} // namespace dec::lp
