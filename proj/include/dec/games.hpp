#pragma once

#include "dec/dec_suite.hpp"
#include "dec/estimation.hpp"
#include "dec/lp.hpp"
#include "dec/worlds.hpp"

#include <string>
#include <vector>

namespace dec {

enum class EquilibriumKind { NE2pZeroSum, CE, CCE };

inline const char* kind_name(EquilibriumKind k) {
    switch (k) {
    case EquilibriumKind::NE2pZeroSum: return "ne";
    case EquilibriumKind::CE: return "ce";
    case EquilibriumKind::CCE: return "cce";
    }
    return "?";
}

inline EquilibriumKind parse_kind(const std::string& s) {
    if (s == "ne") return EquilibriumKind::NE2pZeroSum;
    if (s == "ce") return EquilibriumKind::CE;
    if (s == "cce") return EquilibriumKind::CCE;
    throw ValidationError("unknown equilibrium kind '" + s + "' (expected ne, ce or cce)");
}

/// Markov correlated policy: a distribution over joint actions per (h, s).
struct CorrelatedPolicy {
    Shape shape;
    std::vector<double> probs; ///< [(h*S + s)*A + a]

    const double* dist(int h, int s) const {
        return probs.data() + (static_cast<std::size_t>(h) * shape.S + s) * shape.A;
    }
    double* dist(int h, int s) { return probs.data() + (static_cast<std::size_t>(h) * shape.S + s) * shape.A; }

    static CorrelatedPolicy from_deterministic(const Shape& sh, const Policy& pi) {
        CorrelatedPolicy c{sh, std::vector<double>(static_cast<std::size_t>(sh.H) * sh.S * sh.A, 0.0)};
        for (int h = 0; h < sh.H; ++h)
            for (int s = 0; s < sh.S; ++s) c.dist(h, s)[pi.at(sh, h, s)] = 1.0;
        return c;
    }
};

/// V_i^{mg}(pi) for a Markov correlated policy, per player.
inline std::vector<double> mg_values(const TabularMG& mg, const CorrelatedPolicy& pi) {
    const Shape& sh = mg.shape();
    require(pi.shape == sh, "game: policy shape differs from the game");
    std::vector<double> out(mg.num_players());
    for (int i = 0; i < mg.num_players(); ++i) {
        const Model& M = mg.player(i);
        std::vector<double> V(sh.S, 0.0), next(sh.S, 0.0);
        for (int h = sh.H - 1; h >= 0; --h) {
            for (int s = 0; s < sh.S; ++s) {
                const double* x = pi.dist(h, s);
                double v = 0.0;
                for (int a = 0; a < sh.A; ++a) {
                    if (x[a] == 0.0) continue;
                    double q = M.r(h, s, a);
                    if (h + 1 < sh.H)
                        for (int s2 = 0; s2 < sh.S; ++s2) q += M.p(h, s, a, s2) * next[s2];
                    v += x[a] * q;
                }
                V[s] = v;
            }
            next = V;
        }
        double v0 = 0.0;
        for (int s = 0; s < sh.S; ++s) v0 += M.init(s) * next[s];
        out[i] = v0;
    }
    return out;
}

namespace detail {

/// E_{o ~ M(pi)} max_i Sum_h |R_i^M - R_i^Mb|^q, by enumeration over M's support.
inline double mg_reward_term(const TabularMG& M, const TabularMG& Mb, const Policy& pi, int q, double* tv,
                             std::size_t cap) {
    const int m = M.num_players();
    double term = 0.0, diff = 0.0;
    for_each_trajectory(
        {&M.player(0), &Mb.player(0)}, pi,
        [&](const std::vector<int>& states, const double* p) {
            diff += std::abs(p[0] - p[1]);
            if (p[0] == 0.0) return;
            double best = 0.0;
            for (int i = 0; i < m; ++i) best = std::max(best, reward_gap_along(M.player(i), Mb.player(i), pi, states, q));
            term += p[0] * best;
        },
        cap);
    if (tv) *tv = std::clamp(0.5 * diff, 0.0, 1.0);
    return term;
}

inline void check_games(const TabularMG& a, const TabularMG& b) {
    require(a.action_counts() == b.action_counts() && a.shape() == b.shape(), "game: shapes differ");
}

} // namespace detail

/// D_H^2 of the joint trajectory laws plus E_o max_i ||R_i^M(o) - R_i^Mb(o)||^2.
inline double mg_d_rl_sq(const TabularMG& M, const TabularMG& Mb, const Policy& pi,
                         std::size_t cap = kEnumerationCap) {
    detail::check_games(M, Mb);
    return hellinger_traj(M.player(0), Mb.player(0), pi) + detail::mg_reward_term(M, Mb, pi, 2, nullptr, cap);
}

/// TV of the joint trajectory laws plus E_o max_i ||R_i^M(o) - R_i^Mb(o)||_1.
inline double mg_d_tilde(const TabularMG& M, const TabularMG& Mb, const Policy& pi,
                         std::size_t cap = kEnumerationCap) {
    detail::check_games(M, Mb);
    double tv = 0.0;
    double r = detail::mg_reward_term(M, Mb, pi, 1, &tv, cap);
    return tv + r;
}

/// Draws a joint trajectory; rewards are flat [h*m + i].
inline Trajectory simulate_mg(const TabularMG& mg, const Policy& pi, Rng& rng) {
    const Shape& sh = mg.shape();
    const int m = mg.num_players();
    Trajectory tr;
    tr.states.resize(sh.H);
    tr.actions.resize(sh.H);
    tr.rewards.resize(static_cast<std::size_t>(sh.H) * m);
    const Model& M0 = mg.player(0);
    int s = static_cast<int>(rng.categorical(M0.initial()));
    for (int h = 0; h < sh.H; ++h) {
        int a = pi.at(sh, h, s);
        tr.states[h] = s;
        tr.actions[h] = a;
        for (int i = 0; i < m; ++i) {
            const Model& Mi = mg.player(i);
            double mean = Mi.r(h, s, a);
            tr.rewards[h * m + i] =
                Mi.channel() == RewardChannel::BernoulliScaled ? (rng.bernoulli(mean) ? 1.0 : 0.0) : mean;
        }
        if (h + 1 < sh.H) s = static_cast<int>(rng.categorical(M0.row(h, s, a)));
    }
    return tr;
}

inline double mg_log_likelihood(const TabularMG& mg, const Policy& pi, const Trajectory& tr) {
    Trajectory o{tr.states, tr.actions, std::vector<double>(tr.states.size(), 0.0)};
    return log_likelihood(mg.player(0), pi, o);
}

/// Sum_i ||r_i - R_i(o)||^2.
inline double mg_reward_sq_loss(const TabularMG& mg, const Trajectory& tr) {
    const int m = mg.num_players(), H = mg.shape().H;
    require(tr.rewards.size() == static_cast<std::size_t>(H) * m, "game trajectory: wrong reward count");
    double l = 0.0;
    for (int h = 0; h < H; ++h)
        for (int i = 0; i < m; ++i) {
            double d = tr.rewards[h * m + i] - mg.player(i).r(h, tr.states[h], tr.actions[h]);
            l += d * d;
        }
    return l;
}

inline Belief mg_ta_update(const Belief& belief, const std::vector<TabularMG>& games, const Policy& pi,
                           const Trajectory& tr, const LearningRates& rates) {
    rates.validate();
    belief.validate(games.size());
    std::vector<double> extra(games.size());
    for (std::size_t k = 0; k < games.size(); ++k)
        extra[k] = detail::tempered_term(rates.eta_p, mg_log_likelihood(games[k], pi, tr), rates.eta_r,
                                         mg_reward_sq_loss(games[k], tr));
    return detail::reweight(belief, extra, "tempered aggregation over games");
}

/// Values (player 0) and MG divergence tables over a finite joint policy class.
inline ClassTables build_mg_tables(const std::vector<TabularMG>& games, const PolicyClass& pc,
                                   std::size_t cap = kEnumerationCap) {
    require(!games.empty(), "game class is empty");
    pc.validate();
    for (const auto& g : games) {
        detail::check_games(g, games.front());
        require(pc.shape == g.shape(), "game tables: policy class shape differs from the games");
    }
    ClassTables t;
    t.K = games.size();
    t.N = pc.size();
    t.value.resize(t.K * t.N);
    t.opt.assign(t.K, 0);
    t.opt_value.assign(t.K, kNegInf);
    for (std::size_t m = 0; m < t.K; ++m)
        for (std::size_t i = 0; i < t.N; ++i) {
            double v = policy_value(games[m].player(0), pc[i]);
            t.value[m * t.N + i] = v;
            if (v > t.opt_value[m]) {
                t.opt_value[m] = v;
                t.opt[m] = i;
            }
        }
    const std::size_t cells = t.K * t.K * t.N;
    t.drl.assign(cells, 0.0);
    t.dtilde.assign(cells, 0.0);
    for (std::size_t m = 0; m < t.K; ++m)
        for (std::size_t mb = 0; mb < t.K; ++mb) {
            if (m == mb) continue;
            for (std::size_t i = 0; i < t.N; ++i) {
                t.drl[(m * t.K + mb) * t.N + i] = mg_d_rl_sq(games[m], games[mb], pc[i], cap);
                t.dtilde[(m * t.K + mb) * t.N + i] = mg_d_tilde(games[m], games[mb], pc[i], cap);
            }
        }
    return t;
}

namespace detail {

/// Q_i(a) = R_i(h,s,a) + E[V_i(h+1, s')], flat [i*A + a].
inline std::vector<double> stage_q(const TabularMG& mg, int h, int s, const std::vector<std::vector<double>>& next) {
    const Shape& sh = mg.shape();
    const int m = mg.num_players();
    std::vector<double> Q(static_cast<std::size_t>(m) * sh.A);
    for (int i = 0; i < m; ++i) {
        const Model& M = mg.player(i);
        for (int a = 0; a < sh.A; ++a) {
            double q = M.r(h, s, a);
            if (h + 1 < sh.H)
                for (int s2 = 0; s2 < sh.S; ++s2) q += M.p(h, s, a, s2) * next[i][s2];
            Q[i * sh.A + a] = q;
        }
    }
    return Q;
}

inline void check_zero_sum(const TabularMG& mg) {
    require(mg.num_players() == 2, "zero-sum equilibrium needs exactly two players");
    const Shape& sh = mg.shape();
    for (int h = 0; h < sh.H; ++h) {
        double c = mg.player(0).r(h, 0, 0) + mg.player(1).r(h, 0, 0);
        for (int s = 0; s < sh.S; ++s)
            for (int a = 0; a < sh.A; ++a)
                require(std::abs(mg.player(0).r(h, s, a) + mg.player(1).r(h, s, a) - c) <= 1e-9,
                        "zero-sum equilibrium: R_1 + R_2 is not constant at step " + std::to_string(h + 1));
    }
}

inline std::vector<double> stage_zero_sum(const TabularMG& mg, const std::vector<double>& Q) {
    const int A0 = mg.action_counts()[0], A1 = mg.action_counts()[1], A = A0 * A1;
    Matrix row(A0, A1), col(A1, A0);
    for (int x = 0; x < A0; ++x)
        for (int y = 0; y < A1; ++y) {
            double g = Q[mg.encode({x, y})] - Q[A + mg.encode({x, y})];
            row(x, y) = -g;
            col(y, x) = g;
        }
    auto px = solve_min_simplex_max_columns(row).mixture();
    auto py = solve_min_simplex_max_columns(col).mixture();
    std::vector<double> out(A);
    for (int x = 0; x < A0; ++x)
        for (int y = 0; y < A1; ++y) out[mg.encode({x, y})] = px[x] * py[y];
    return out;
}

/// Correlated (CE) or coarse correlated (CCE) stage equilibrium maximizing Sum_i E_x Q_i.
inline std::vector<double> stage_correlated(const TabularMG& mg, const std::vector<double>& Q, bool ce) {
    const int A = mg.shape().A, m = mg.num_players();
    lp::Problem P(A);
    for (int i = 0; i < m; ++i)
        for (int a = 0; a < A; ++a) P.c[a] += Q[i * A + a];
    P.add_row(std::vector<double>(A, 1.0), lp::Sense::Eq, 1.0);
    for (int i = 0; i < m; ++i) {
        const int Ai = mg.action_counts()[i];
        if (ce) {
            for (int rec = 0; rec < Ai; ++rec)
                for (int b = 0; b < Ai; ++b) {
                    if (b == rec) continue;
                    std::vector<double> row(A, 0.0);
                    for (int a = 0; a < A; ++a)
                        if (mg.decode(a)[i] == rec) row[a] = Q[i * A + mg.replace(a, i, b)] - Q[i * A + a];
                    P.add_row(row, lp::Sense::Le, 0.0);
                }
        } else {
            for (int b = 0; b < Ai; ++b) {
                std::vector<double> row(A);
                for (int a = 0; a < A; ++a) row[a] = Q[i * A + mg.replace(a, i, b)] - Q[i * A + a];
                P.add_row(row, lp::Sense::Le, 0.0);
            }
        }
    }
    auto sol = lp::solve(P);
    require(sol.status == lp::Status::Optimal, "stage equilibrium LP did not reach optimality");
    return clean_simplex(sol.x);
}

} // namespace detail

/// Backward induction with a stage equilibrium at every (h, s) on continuation values.
inline CorrelatedPolicy solve_equilibrium(const TabularMG& mg, EquilibriumKind kind) {
    if (kind == EquilibriumKind::NE2pZeroSum) detail::check_zero_sum(mg);
    const Shape& sh = mg.shape();
    const int m = mg.num_players();
    CorrelatedPolicy pi{sh, std::vector<double>(static_cast<std::size_t>(sh.H) * sh.S * sh.A, 0.0)};
    std::vector<std::vector<double>> next(m, std::vector<double>(sh.S, 0.0)), cur = next;
    for (int h = sh.H - 1; h >= 0; --h) {
        for (int s = 0; s < sh.S; ++s) {
            auto Q = detail::stage_q(mg, h, s, next);
            std::vector<double> x = kind == EquilibriumKind::NE2pZeroSum
                                        ? detail::stage_zero_sum(mg, Q)
                                        : detail::stage_correlated(mg, Q, kind == EquilibriumKind::CE);
            std::copy(x.begin(), x.end(), pi.dist(h, s));
            for (int i = 0; i < m; ++i) {
                double v = 0.0;
                for (int a = 0; a < sh.A; ++a) v += x[a] * Q[i * sh.A + a];
                cur[i][s] = v;
            }
        }
        next = cur;
    }
    return pi;
}

/// Largest gain of a Markov unilateral deviation (NE, CCE) or of a Markov
/// recommendation-dependent modification (CE), over players.
inline double equilibrium_gap(const CorrelatedPolicy& pi, const TabularMG& mg, EquilibriumKind kind) {
    const Shape& sh = mg.shape();
    require(pi.shape == sh, "equilibrium gap: policy shape differs from the game");
    auto on = mg_values(mg, pi);
    double gap = kNegInf;
    for (int i = 0; i < mg.num_players(); ++i) {
        const Model& M = mg.player(i);
        const int Ai = mg.action_counts()[i];
        std::vector<double> W(sh.S, 0.0), next(sh.S, 0.0);
        for (int h = sh.H - 1; h >= 0; --h) {
            for (int s = 0; s < sh.S; ++s) {
                const double* x = pi.dist(h, s);
                auto payoff = [&](int a, int b) {
                    int j = mg.replace(a, i, b);
                    double q = M.r(h, s, j);
                    if (h + 1 < sh.H)
                        for (int s2 = 0; s2 < sh.S; ++s2) q += M.p(h, s, j, s2) * next[s2];
                    return q;
                };
                double w = 0.0;
                if (kind == EquilibriumKind::CE) {
                    for (int rec = 0; rec < Ai; ++rec) {
                        double best = kNegInf;
                        for (int b = 0; b < Ai; ++b) {
                            double v = 0.0;
                            for (int a = 0; a < sh.A; ++a)
                                if (x[a] != 0.0 && mg.decode(a)[i] == rec) v += x[a] * payoff(a, b);
                            best = std::max(best, v);
                        }
                        w += best;
                    }
                } else {
                    w = kNegInf;
                    for (int b = 0; b < Ai; ++b) {
                        double v = 0.0;
                        for (int a = 0; a < sh.A; ++a)
                            if (x[a] != 0.0) v += x[a] * payoff(a, b);
                        w = std::max(w, v);
                    }
                }
                W[s] = w;
            }
            next = W;
        }
        double dev = 0.0;
        for (int s = 0; s < sh.S; ++s) dev += M.init(s) * next[s];
        gap = std::max(gap, dev - on[i]);
    }
    return gap;
}

} // namespace dec
