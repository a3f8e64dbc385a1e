#pragma once

#include "dec/dynamics.hpp"
#include "dec/worlds.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

namespace dec {

/// Representatives M0 with their un-normalized optimistic tables. The
/// representative models are the renormalized tables; rewards are shared
/// between the two views.
struct OptimisticCover {
    ModelClass representatives;
    std::vector<std::vector<double>> optimistic_initial;
    std::vector<std::vector<double>> optimistic_transitions; ///< same layout as Model::transitions
    double rho = 0.0;                                     ///< cover radius rho_1
    double grid_step = 0.0;
    std::vector<std::size_t> assignment;                  ///< member -> representative
    std::vector<std::vector<std::size_t>> covers;         ///< representative -> members
    std::size_t grid_cells = 0;                           ///< before deduplication
    double log_full_grid = 0.0;                           ///< log of the unrestricted grid size

    std::size_t size() const { return optimistic_transitions.size(); }
};

/// step * ceil(p / step), never below p.
inline double optimistic_round(double p, double step) {
    double k = std::ceil(p / step - 1e-9);
    return std::max(k * step, p);
}

/// log P~^{M0,pi}(o); the policy factor is the indicator that o's actions follow pi.
inline double optimistic_log_likelihood(const OptimisticCover& cover, std::size_t k, const Policy& pi,
                                        const Trajectory& tr) {
    const Shape& sh = cover.representatives.shape();
    check_trajectory(tr, sh);
    for (int h = 0; h < sh.H; ++h)
        require(tr.actions[h] == pi.at(sh, h, tr.states[h]),
                "trajectory: actions are inconsistent with the executed policy");
    const auto& init = cover.optimistic_initial[k];
    const auto& P = cover.optimistic_transitions[k];
    double p = init[tr.states[0]];
    if (p <= 0.0) return kNegInf;
    double ll = std::log(p);
    for (int h = 0; h + 1 < sh.H; ++h) {
        double q = P[((static_cast<std::size_t>(h) * sh.S + tr.states[h]) * sh.A + tr.actions[h]) * sh.S +
                     tr.states[h + 1]];
        if (q <= 0.0) return kNegInf;
        ll += std::log(q);
    }
    return ll;
}

namespace detail {

inline std::vector<double> renormalize_rows(const std::vector<double>& v, int width) {
    std::vector<double> out(v.size());
    for (std::size_t c = 0; c * width < v.size(); ++c) {
        double s = 0.0;
        for (int j = 0; j < width; ++j) s += v[c * width + j];
        require(s > 0.0, "cover: optimistic row has zero mass");
        for (int j = 0; j < width; ++j) out[c * width + j] = v[c * width + j] / s;
    }
    return out;
}

struct CoverBuilder {
    Shape shape;
    RewardChannel channel = RewardChannel::DeterministicMean;
    std::map<std::vector<double>, std::size_t> index;
    std::vector<Model> reps;
    OptimisticCover cover;

    std::size_t add(const std::vector<double>& init, const std::vector<double>& P,
                    const std::vector<double>& R) {
        std::vector<double> key = init;
        key.insert(key.end(), P.begin(), P.end());
        key.insert(key.end(), R.begin(), R.end());
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        std::size_t k = reps.size();
        reps.emplace_back(shape, renormalize_rows(init, shape.S), renormalize_rows(P, shape.S), R, channel);
        cover.optimistic_initial.push_back(init);
        cover.optimistic_transitions.push_back(P);
        cover.covers.emplace_back();
        index.emplace(std::move(key), k);
        return k;
    }

    void assign(std::size_t member, std::size_t k) {
        cover.assignment[member] = k;
        cover.covers[k].push_back(member);
    }

    OptimisticCover finish() {
        cover.representatives = ModelClass(std::move(reps));
        return std::move(cover);
    }
};

} // namespace detail

/// The class as its own cover with P~ = P, at radius 0.
inline OptimisticCover exact_cover(const ModelClass& cls) {
    detail::CoverBuilder b{cls.shape(), cls[0].channel(), {}, {}, {}};
    b.cover.assignment.resize(cls.size());
    b.cover.grid_cells = cls.size();
    for (std::size_t m = 0; m < cls.size(); ++m)
        b.assign(m, b.add(cls[m].initial(), cls[m].transitions(), cls[m].rewards()));
    b.cover.log_full_grid = std::log(static_cast<double>(b.reps.size()));
    return b.finish();
}

/// Rounds every kernel and initial entry up to the grid rho1^2/(e H S) and
/// every mean reward down to the grid rho1/H.
inline OptimisticCover tabular_cover(const ModelClass& cls, double rho1) {
    require(rho1 > 0.0 && rho1 <= 1.0, "tabular cover: rho1 must lie in (0, 1]");
    const Shape& sh = cls.shape();
    const double step = rho1 * rho1 / (std::numbers::e * sh.H * sh.S);
    const double rstep = rho1 / sh.H;
    detail::CoverBuilder b{sh, cls[0].channel(), {}, {}, {}};
    b.cover.rho = rho1;
    b.cover.grid_step = step;
    b.cover.assignment.resize(cls.size());
    b.cover.grid_cells = cls.size();
    const double entries = static_cast<double>(sh.S) * (1.0 + static_cast<double>(sh.H - 1) * sh.S * sh.A);
    b.cover.log_full_grid = entries * std::log(std::ceil(1.0 / step)) +
                            static_cast<double>(sh.H) * sh.S * sh.A * std::log(std::floor(1.0 / rstep) + 1.0);
    for (std::size_t m = 0; m < cls.size(); ++m) {
        const Model& M = cls[m];
        std::vector<double> init = M.initial(), P = M.transitions(), R = M.rewards();
        for (auto& x : init) x = optimistic_round(x, step);
        for (auto& x : P) x = optimistic_round(x, step);
        for (auto& x : R) x = std::min(x, rstep * std::floor(x / rstep + 1e-9));
        b.assign(m, b.add(init, P, R));
    }
    return b.finish();
}

/// Parameter grid of step rho1^2/(2 e H d) over [-B, B]^d for each kernel.
/// Each cell's optimistic entry is the max of <theta, phi> over the cell's
/// corners coordinatewise. When members are given, only their cells are
/// materialized; otherwise every cell with nonnegative entries is.
inline OptimisticCover linear_mixture_cover(const LinearMixtureFeatures& f, double B, double rho1,
                                            const std::vector<std::vector<double>>& members = {},
                                            std::size_t cap = 1u << 20) {
    f.validate();
    require(rho1 > 0.0 && rho1 <= 1.0, "linear mixture cover: rho1 must lie in (0, 1]");
    require(B >= 0.0, "linear mixture cover: B must be nonnegative");
    const Shape& sh = f.shape;
    const int d = f.d, K = sh.H - 1;
    const double step = rho1 * rho1 / (2.0 * std::numbers::e * sh.H * d);
    const long N = static_cast<long>(std::ceil(B / step - 1e-9));
    const long lo = N > 0 ? -N : 0, width = N > 0 ? 2 * N : 1;
    const double log_cells = static_cast<double>(d) * K * std::log(static_cast<double>(width));

    detail::CoverBuilder b{sh, RewardChannel::DeterministicMean, {}, {}, {}};
    b.cover.rho = rho1;
    b.cover.grid_step = step;
    b.cover.log_full_grid = log_cells;
    b.cover.assignment.resize(members.size());

    // Optimistic kernel of the cell with lower corners c (flat [h*d + j], grid units).
    auto kernel = [&](const std::vector<long>& c, std::vector<double>& P) {
        P.assign(static_cast<std::size_t>(K) * sh.S * sh.A * sh.S, 0.0);
        for (int h = 0; h < K; ++h)
            for (int s = 0; s < sh.S; ++s)
                for (int a = 0; a < sh.A; ++a)
                    for (int s2 = 0; s2 < sh.S; ++s2) {
                        double v = 0.0;
                        for (int j = 0; j < d; ++j) {
                            double phi = f.feature(h, s, a, s2, j), x = c[h * d + j] * step;
                            v += std::max(x * phi, (x + step) * phi);
                        }
                        if (std::abs(v) < 1e-14) v = 0.0;
                        P[((static_cast<std::size_t>(h) * sh.S + s) * sh.A + a) * sh.S + s2] = v;
                    }
        for (double v : P)
            if (v < 0.0) return false;
        return true;
    };

    std::vector<double> P;
    if (!members.empty()) {
        b.cover.grid_cells = log_cells < std::log(1e18) ? static_cast<std::size_t>(std::llround(std::exp(log_cells)))
                                                        : static_cast<std::size_t>(-1);
        for (std::size_t m = 0; m < members.size(); ++m) {
            const auto& theta = members[m];
            require(theta.size() == static_cast<std::size_t>(K) * d, "linear mixture cover: bad parameter size");
            std::vector<long> c(theta.size());
            for (std::size_t i = 0; i < theta.size(); ++i) {
                require(std::abs(theta[i]) <= B + 1e-12, "linear mixture cover: parameter outside [-B, B]");
                long k = static_cast<long>(std::floor(theta[i] / step));
                c[i] = std::clamp(k, lo, lo + width - 1);
            }
            require(kernel(c, P), "linear mixture cover: cell of a valid parameter has a negative entry");
            b.assign(m, b.add(f.initial, P, f.rewards));
        }
        return b.finish();
    }

    require(log_cells <= std::log(static_cast<double>(cap)),
            "linear mixture cover: grid exceeds the cap of " + std::to_string(cap) + " cells");
    const std::size_t dims = static_cast<std::size_t>(K) * d;
    std::size_t total = 1;
    for (std::size_t i = 0; i < dims; ++i) total *= static_cast<std::size_t>(width);
    b.cover.grid_cells = total;
    std::vector<long> c(dims, lo);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rest = idx;
        for (std::size_t i = 0; i < dims; ++i) {
            c[i] = lo + static_cast<long>(rest % width);
            rest /= width;
        }
        if (!kernel(c, P)) continue;
        bool usable = true;
        for (std::size_t r = 0; r * sh.S < P.size() && usable; ++r) {
            double s = 0.0;
            for (int j = 0; j < sh.S; ++j) s += P[r * sh.S + j];
            usable = s >= 1.0 - 1e-12; // P~ >= P forces mass >= 1 on cells holding a parameter
        }
        if (usable) b.add(f.initial, P, f.rewards);
    }
    if (b.reps.empty()) return std::move(b.cover); // no cell can hold a valid parameter
    return b.finish();
}

struct CoverReport {
    bool ok = true;
    std::vector<std::string> violations;
    std::vector<std::size_t> covering;   ///< member -> a representative that covers it
    double max_mass_excess = 0.0;        ///< max over (rep, pi) of Sum_o P~ - 1
    double max_reward_gap = 0.0;         ///< max over members of max_o ||R^M - R^M0||_1
};

namespace detail {

/// Sum_o P~^{pi}(o), forward pass with the un-normalized tables.
inline double optimistic_mass(const OptimisticCover& c, std::size_t k, const Policy& pi) {
    const Shape& sh = c.representatives.shape();
    std::vector<double> rho = c.optimistic_initial[k], next(sh.S);
    const auto& P = c.optimistic_transitions[k];
    for (int h = 0; h + 1 < sh.H; ++h) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < sh.S; ++s) {
            int a = pi.at(sh, h, s);
            for (int s2 = 0; s2 < sh.S; ++s2)
                next[s2] += rho[s] * P[((static_cast<std::size_t>(h) * sh.S + s) * sh.A + a) * sh.S + s2];
        }
        rho.swap(next);
    }
    double m = 0.0;
    for (double x : rho) m += x;
    return m;
}

/// max over all o of ||R^M(o) - R^M0(o)||_1.
inline double max_reward_gap(const Model& m, const Model& m0) {
    const Shape& sh = m.shape();
    double g = 0.0;
    for (int h = 0; h < sh.H; ++h) {
        double best = 0.0;
        for (int s = 0; s < sh.S; ++s)
            for (int a = 0; a < sh.A; ++a) best = std::max(best, std::abs(m.r(h, s, a) - m0.r(h, s, a)));
        g += best;
    }
    return g;
}

/// First coordinate where P~ < P, or the empty string.
inline std::string domination_failure(const OptimisticCover& c, std::size_t k, const Model& m) {
    const Shape& sh = m.shape();
    const auto& init = c.optimistic_initial[k];
    for (int s = 0; s < sh.S; ++s)
        if (init[s] < m.init(s) - 1e-15) return "initial (s=" + std::to_string(s) + ")";
    const auto& P = c.optimistic_transitions[k];
    for (int h = 0; h + 1 < sh.H; ++h)
        for (int s = 0; s < sh.S; ++s)
            for (int a = 0; a < sh.A; ++a)
                for (int s2 = 0; s2 < sh.S; ++s2)
                    if (P[((static_cast<std::size_t>(h) * sh.S + s) * sh.A + a) * sh.S + s2] <
                        m.p(h, s, a, s2) - 1e-15)
                        return "transition (h=" + std::to_string(h) + ", s=" + std::to_string(s) +
                               ", a=" + std::to_string(a) + ", s'=" + std::to_string(s2) + ")";
    return {};
}

} // namespace detail

/// Checks both cover conditions against a class and a policy class.
inline CoverReport verify_cover(const OptimisticCover& cover, const ModelClass& cls, const PolicyClass& pc) {
    require(cover.size() > 0, "cover has no representatives");
    require(cover.representatives.shape() == cls.shape(), "cover and class shapes differ");
    pc.validate();
    const double rho = cover.rho;
    CoverReport rep;
    for (std::size_t k = 0; k < cover.size(); ++k) {
        std::string own = detail::domination_failure(cover, k, cover.representatives[k]);
        if (!own.empty()) {
            rep.ok = false;
            rep.violations.push_back("representative " + std::to_string(k) + " is not dominated at " + own);
        }
        for (std::size_t i = 0; i < pc.size(); ++i) {
            double excess = detail::optimistic_mass(cover, k, pc[i]) - 1.0;
            rep.max_mass_excess = std::max(rep.max_mass_excess, excess);
            if (excess > rho * rho + 1e-12) {
                rep.ok = false;
                rep.violations.push_back("representative " + std::to_string(k) + ": optimistic mass exceeds 1 by " +
                                         fmt17(excess) + " under policy " + std::to_string(i));
                break;
            }
        }
    }
    rep.covering.assign(cls.size(), cover.size());
    for (std::size_t m = 0; m < cls.size(); ++m) {
        std::size_t first = m < cover.assignment.size() ? cover.assignment[m] : 0;
        std::vector<std::size_t> order{first};
        for (std::size_t k = 0; k < cover.size(); ++k)
            if (k != first) order.push_back(k);
        std::string first_failure;
        for (std::size_t k : order) {
            std::string why = detail::domination_failure(cover, k, cls[m]);
            double gap = detail::max_reward_gap(cls[m], cover.representatives[k]);
            if (why.empty() && gap > rho + 1e-12) why = "reward gap " + fmt17(gap);
            if (why.empty()) {
                rep.covering[m] = k;
                rep.max_reward_gap = std::max(rep.max_reward_gap, gap);
                break;
            }
            if (k == first) first_failure = "representative " + std::to_string(k) + " fails at " + why;
        }
        if (rep.covering[m] == cover.size()) {
            rep.ok = false;
            rep.violations.push_back("member " + std::to_string(m) + " is not covered; " + first_failure);
        }
    }
    return rep;
}

} // namespace dec
