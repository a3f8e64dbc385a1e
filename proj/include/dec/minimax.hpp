#pragma once

#include "dec/lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace dec {

enum class SolveStatus { Exact, ExactToGrid, HeuristicLowerBound };

inline const char* status_name(SolveStatus s) {
    switch (s) {
    case SolveStatus::Exact: return "Exact";
    case SolveStatus::ExactToGrid: return "ExactToGrid";
    default: return "HeuristicLowerBound";
    }
}

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double v = 0.0) : rows(r), cols(c), data(r * c, v) {}
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Payoff matrix of a bilinear game: rows are the minimizer's pure actions.
struct LinearGame {
    Matrix C;
};

struct SolveReport {
    double value = 0.0;
    std::vector<std::vector<double>> mixtures; ///< one per block (minimizer side)
    std::vector<double> certificate;           ///< maximizer weights over constraints
    std::vector<std::size_t> active;           ///< constraints attaining the value
    SolveStatus status = SolveStatus::Exact;
    double residual = 0.0;
    double error_bound = 0.0; ///< certified gap for ExactToGrid
    std::size_t pivots = 0;

    const std::vector<double>& mixture() const { return mixtures.front(); }
};

/// min over x_b in Delta(n_b) for each block b of max_k sum_b <c_{k,b}, x_b>.
/// Each constraint row is dense over the concatenated blocks.
struct JointProgram {
    std::vector<std::size_t> block_sizes;
    std::vector<double> coef; ///< num_constraints() x total()

    explicit JointProgram(std::vector<std::size_t> sizes = {}) : block_sizes(std::move(sizes)) {}

    std::size_t total() const { return std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0}); }
    std::size_t offset(std::size_t b) const {
        return std::accumulate(block_sizes.begin(), block_sizes.begin() + static_cast<long>(b), std::size_t{0});
    }
    std::size_t num_constraints() const { return total() == 0 ? 0 : coef.size() / total(); }

    /// Appends a zero row and returns a pointer to it.
    double* add_constraint() {
        coef.resize(coef.size() + total(), 0.0);
        return coef.data() + coef.size() - total();
    }
    void add_constraint(const std::vector<double>& row) {
        require(row.size() == total(), "joint program: constraint has wrong length");
        coef.insert(coef.end(), row.begin(), row.end());
    }
};

namespace detail {

inline std::vector<double> clean_simplex(std::vector<double> x) {
    double s = 0.0;
    for (auto& v : x) {
        if (v < 0.0) {
            if (v < -1e-8) throw std::logic_error("minimax: solver returned a negative weight");
            v = 0.0;
        }
        s += v;
    }
    if (!(s > 0.0)) throw std::logic_error("minimax: solver returned an empty mixture");
    for (auto& v : x) v /= s;
    return x;
}

} // namespace detail

inline SolveReport solve_joint_simplices(const JointProgram& prog, const lp::Options& opt = {}) {
    const std::size_t B = prog.block_sizes.size(), N = prog.total(), K = prog.num_constraints();
    require(B > 0 && N > 0, "joint program: no variables");
    for (auto nb : prog.block_sizes) require(nb > 0, "joint program: empty block");
    require(K > 0 && prog.coef.size() == K * N, "joint program: dimension mismatch");

    std::vector<double> L(B, 0.0);
    std::vector<std::size_t> blk(N);
    for (std::size_t b = 0, j0 = 0; b < B; j0 += prog.block_sizes[b++]) {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t j = j0; j < j0 + prog.block_sizes[b]; ++j) lo = std::min(lo, prog.coef[k * N + j]);
        L[b] = lo;
        for (std::size_t j = j0; j < j0 + prog.block_sizes[b]; ++j) blk[j] = b;
    }
    const double shift = std::accumulate(L.begin(), L.end(), 0.0);
    auto cp = [&](std::size_t k, std::size_t j) { return prog.coef[k * N + j] - L[blk[j]]; };

    std::vector<double> x, lambda;
    lp::Solution s;
    if (N + 1 < K + B) {
        // Dual form: variables lambda (K), u (B).
        lp::Problem P(K + B);
        for (std::size_t b = 0; b < B; ++b) P.c[K + b] = 1.0;
        std::vector<double> row(K + B);
        for (std::size_t j = 0; j < N; ++j) {
            std::fill(row.begin(), row.end(), 0.0);
            for (std::size_t k = 0; k < K; ++k) row[k] = -cp(k, j);
            row[K + blk[j]] = 1.0;
            P.add_row(row, lp::Sense::Le, 0.0);
        }
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t k = 0; k < K; ++k) row[k] = 1.0;
        P.add_row(row, lp::Sense::Eq, 1.0);
        s = lp::solve(P, opt);
        if (s.status != lp::Status::Optimal) throw std::logic_error("minimax: dual LP did not solve");
        x.assign(s.y.begin(), s.y.begin() + static_cast<long>(N));
        lambda.assign(s.x.begin(), s.x.begin() + static_cast<long>(K));
    } else {
        // Primal form: variables x (N), t' (1).
        lp::Problem P(N + 1);
        P.c[N] = -1.0;
        std::vector<double> row(N + 1);
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t j = 0; j < N; ++j) row[j] = cp(k, j);
            row[N] = -1.0;
            P.add_row(row, lp::Sense::Le, 0.0);
        }
        for (std::size_t b = 0; b < B; ++b) {
            std::fill(row.begin(), row.end(), 0.0);
            for (std::size_t j = 0; j < N; ++j)
                if (blk[j] == b) row[j] = 1.0;
            P.add_row(row, lp::Sense::Eq, 1.0);
        }
        s = lp::solve(P, opt);
        if (s.status != lp::Status::Optimal) throw std::logic_error("minimax: primal LP did not solve");
        x.assign(s.x.begin(), s.x.begin() + static_cast<long>(N));
        lambda.assign(s.y.begin(), s.y.begin() + static_cast<long>(K));
    }
    const double lp_value = (N + 1 < K + B ? s.objective : -s.objective) + shift;

    SolveReport rep;
    rep.pivots = s.pivots;
    for (std::size_t b = 0, j0 = 0; b < B; j0 += prog.block_sizes[b++])
        rep.mixtures.push_back(detail::clean_simplex(
            std::vector<double>(x.begin() + static_cast<long>(j0),
                                x.begin() + static_cast<long>(j0 + prog.block_sizes[b]))));
    for (auto& l : lambda) l = std::max(l, 0.0);
    double ls = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    if (ls > 0.0)
        for (auto& l : lambda) l /= ls;
    rep.certificate = std::move(lambda);

    std::vector<double> flat;
    for (const auto& m : rep.mixtures) flat.insert(flat.end(), m.begin(), m.end());
    std::vector<double> vals(K, 0.0);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
        double v = 0.0;
        for (std::size_t j = 0; j < N; ++j) v += prog.coef[k * N + j] * flat[j];
        vals[k] = v;
        best = std::max(best, v);
    }
    for (std::size_t k = 0; k < K; ++k)
        if (vals[k] >= best - 1e-9) rep.active.push_back(k);
    rep.value = best;
    rep.residual = std::abs(best - lp_value);
    rep.status = SolveStatus::Exact;
    return rep;
}

/// min_{p in Delta(rows)} max_j (C^T p)_j.
inline SolveReport solve_min_simplex_max_columns(const Matrix& C) {
    require(C.rows > 0 && C.cols > 0, "matrix game: empty payoff matrix");
    for (double v : C.data) require(std::isfinite(v), "matrix game: non-finite payoff");
    JointProgram prog({C.rows});
    for (std::size_t j = 0; j < C.cols; ++j) {
        double* row = prog.add_constraint();
        for (std::size_t i = 0; i < C.rows; ++i) row[i] = C(i, j);
    }
    return solve_joint_simplices(prog);
}

inline SolveReport solve_min_simplex_max_columns(const LinearGame& g) {
    return solve_min_simplex_max_columns(g.C);
}

struct GridMode {
    double step = 0.01;
    std::size_t max_dimension = 4;
};

struct MultiStartMode {
    std::size_t starts = 16;
    std::size_t iters = 400;
    std::uint64_t seed = 0;
};

namespace detail {

inline double quad_objective(const std::vector<double>& a, const Matrix& Psi, const std::vector<double>& mu) {
    const std::size_t d = a.size();
    double v = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        if (mu[i] == 0.0) continue;
        v += mu[i] * a[i];
        double q = 0.0;
        for (std::size_t j = 0; j < d; ++j) q += Psi(i, j) * mu[j];
        v -= mu[i] * q;
    }
    return v;
}

/// Euclidean projection onto the probability simplex.
inline std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    for (auto& x : v) x = std::max(x - theta, 0.0);
    return v;
}

} // namespace detail

/// max over the simplex of mu^T a - mu^T Psi mu, exhaustively on the lattice
/// of the given step. The certified error bound covers the distance from the
/// continuous maximum to the best lattice point.
inline SolveReport simplex_quadratic_max(const std::vector<double>& a, const Matrix& Psi, GridMode mode) {
    const std::size_t d = a.size();
    require(d > 0 && Psi.rows == d && Psi.cols == d, "quadratic max: dimension mismatch");
    require(d <= mode.max_dimension, "quadratic max: grid mode refused for dimension " + std::to_string(d) +
                                         " (limit " + std::to_string(mode.max_dimension) + ")");
    require(mode.step > 0.0 && mode.step <= 1.0, "quadratic max: step must lie in (0, 1]");
    const long N = std::lround(1.0 / mode.step);
    require(std::abs(N * mode.step - 1.0) < 1e-9, "quadratic max: 1/step must be an integer");

    SolveReport rep;
    rep.status = SolveStatus::ExactToGrid;
    rep.value = -std::numeric_limits<double>::infinity();
    std::vector<long> k(d, 0);
    std::vector<double> mu(d);
    std::function<void(std::size_t, long)> rec = [&](std::size_t i, long left) {
        if (i + 1 == d) {
            k[i] = left;
            for (std::size_t j = 0; j < d; ++j) mu[j] = static_cast<double>(k[j]) / static_cast<double>(N);
            double v = detail::quad_objective(a, Psi, mu);
            if (v > rep.value) {
                rep.value = v;
                rep.mixtures = {mu};
            }
            return;
        }
        for (long c = left; c >= 0; --c) {
            k[i] = c;
            rec(i + 1, left - c);
        }
    };
    rec(0, N);

    double osc = 0.0;
    for (std::size_t v = 0; v < d; ++v) {
        double hi = -std::numeric_limits<double>::infinity(), lo = -hi;
        for (std::size_t i = 0; i < d; ++i) {
            double g = a[i] - Psi(i, v) - Psi(v, i);
            hi = std::max(hi, g);
            lo = std::min(lo, g);
        }
        osc = std::max(osc, 0.5 * (hi - lo));
    }
    rep.error_bound = osc * static_cast<double>(d) * mode.step;
    return rep;
}

/// Projected gradient ascent from several starts; a lower bound.
inline SolveReport simplex_quadratic_max(const std::vector<double>& a, const Matrix& Psi, MultiStartMode mode) {
    const std::size_t d = a.size();
    require(d > 0 && Psi.rows == d && Psi.cols == d, "quadratic max: dimension mismatch");
    double lip = 1e-12;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) lip = std::max(lip, std::abs(Psi(i, j) + Psi(j, i)));
    const double eta = 1.0 / (lip * static_cast<double>(d));

    SolveReport rep;
    rep.status = SolveStatus::HeuristicLowerBound;
    rep.value = -std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<double>& mu) {
        double v = detail::quad_objective(a, Psi, mu);
        if (v > rep.value) {
            rep.value = v;
            rep.mixtures = {mu};
        }
    };
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> e(d, 0.0);
        e[i] = 1.0;
        consider(e);
    }
    Rng rng(mode.seed);
    for (std::size_t st = 0; st < mode.starts; ++st) {
        std::vector<double> mu = st == 0 ? std::vector<double>(d, 1.0 / static_cast<double>(d))
                                         : rng.dirichlet(d, 1.0);
        std::vector<double> g(d);
        for (std::size_t it = 0; it < mode.iters; ++it) {
            for (std::size_t i = 0; i < d; ++i) {
                double q = 0.0;
                for (std::size_t j = 0; j < d; ++j) q += (Psi(i, j) + Psi(j, i)) * mu[j];
                g[i] = a[i] - q;
            }
            for (std::size_t i = 0; i < d; ++i) mu[i] += eta * g[i];
            mu = detail::project_simplex(std::move(mu));
        }
        consider(mu);
    }
    return rep;
}

} // namespace dec
