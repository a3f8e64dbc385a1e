#pragma once

#include "dec/core.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dec {

inline constexpr std::size_t kEnumerationCap = 65536;

inline void check_shapes(const Model& a, const Model& b) {
    require(a.shape() == b.shape(), "models have different shapes");
}

/// d_h(s,a) under (m, pi) by a forward pass, flat [(h*S + s)*A + a].
inline std::vector<double> occupancy_measure(const Model& m, const Policy& pi) {
    const Shape& sh = m.shape();
    check_policy(pi, sh);
    const int S = sh.S, A = sh.A, H = sh.H;
    std::vector<double> d(static_cast<std::size_t>(H) * S * A, 0.0);
    std::vector<double> rho = m.initial(), next(S);
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) d[(static_cast<std::size_t>(h) * S + s) * A + pi.at(sh, h, s)] = rho[s];
        if (h + 1 == H) break;
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < S; ++s) {
            if (rho[s] == 0.0) continue;
            auto row = m.row(h, s, pi.at(sh, h, s));
            for (int s2 = 0; s2 < S; ++s2) next[s2] += rho[s] * row[s2];
        }
        rho.swap(next);
    }
    return d;
}

/// f^M(pi) by backward induction.
inline double policy_value(const Model& m, const Policy& pi) {
    const Shape& sh = m.shape();
    check_policy(pi, sh);
    const int S = sh.S;
    std::vector<double> V(S, 0.0), W(S);
    for (int h = sh.H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            int a = pi.at(sh, h, s);
            double v = m.r(h, s, a);
            if (h + 1 < sh.H) {
                auto row = m.row(h, s, a);
                for (int s2 = 0; s2 < S; ++s2) v += row[s2] * V[s2];
            }
            W[s] = v;
        }
        V.swap(W);
    }
    double f = 0.0;
    for (int s = 0; s < S; ++s) f += m.init(s) * V[s];
    return f;
}

struct ValueIteration {
    std::vector<double> Q; ///< [(h*S + s)*A + a]
    std::vector<double> V; ///< [h*S + s], with V at h = H equal to 0 implied
    Policy greedy;         ///< lowest-index argmax
    double value = 0.0;
};

inline ValueIteration value_iteration(const Model& m) {
    const Shape& sh = m.shape();
    const int S = sh.S, A = sh.A, H = sh.H;
    ValueIteration out;
    out.Q.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    out.V.assign(static_cast<std::size_t>(H) * S, 0.0);
    out.greedy.actions.assign(static_cast<std::size_t>(H) * S, 0);
    for (int h = H - 1; h >= 0; --h)
        for (int s = 0; s < S; ++s) {
            double best = kNegInf;
            for (int a = 0; a < A; ++a) {
                double q = m.r(h, s, a);
                if (h + 1 < H) {
                    auto row = m.row(h, s, a);
                    for (int s2 = 0; s2 < S; ++s2) q += row[s2] * out.V[(h + 1) * S + s2];
                }
                out.Q[(static_cast<std::size_t>(h) * S + s) * A + a] = q;
                if (q > best) {
                    best = q;
                    out.greedy.actions[h * S + s] = a;
                }
            }
            out.V[h * S + s] = best;
        }
    for (int s = 0; s < S; ++s) out.value += m.init(s) * out.V[s];
    return out;
}

struct OptimalChoice {
    std::size_t index = 0;
    Policy policy;
    double value = 0.0;
};

/// argmax over the class, lowest index on ties.
inline OptimalChoice optimal_policy(const Model& m, const PolicyClass& pc) {
    require(pc.size() > 0, "optimal_policy: empty policy class");
    OptimalChoice best;
    best.value = kNegInf;
    for (std::size_t i = 0; i < pc.size(); ++i) {
        double v = policy_value(m, pc[i]);
        if (v > best.value) {
            best.value = v;
            best.index = i;
        }
    }
    best.policy = pc[best.index];
    return best;
}

/// Sum_o sqrt(P1(o) P2(o)) over trajectory laws under a shared policy.
inline double bhattacharyya_dp(const Model& m1, const Model& m2, const Policy& pi) {
    check_shapes(m1, m2);
    const Shape& sh = m1.shape();
    check_policy(pi, sh);
    const int S = sh.S;
    std::vector<double> alpha(S), next(S);
    for (int s = 0; s < S; ++s) alpha[s] = std::sqrt(m1.init(s) * m2.init(s));
    for (int h = 0; h + 1 < sh.H; ++h) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < S; ++s) {
            if (alpha[s] == 0.0) continue;
            int a = pi.at(sh, h, s);
            auto r1 = m1.row(h, s, a);
            auto r2 = m2.row(h, s, a);
            for (int s2 = 0; s2 < S; ++s2) next[s2] += alpha[s] * std::sqrt(r1[s2] * r2[s2]);
        }
        alpha.swap(next);
    }
    double bc = 0.0;
    for (double x : alpha) bc += x;
    return std::clamp(bc, 0.0, 1.0);
}

/// Squared Hellinger distance between the trajectory laws.
inline double hellinger_traj(const Model& m1, const Model& m2, const Policy& pi) {
    return std::clamp(2.0 - 2.0 * bhattacharyya_dp(m1, m2, pi), 0.0, 2.0);
}

/// Visits every state sequence that has positive probability under at least
/// one of the models, passing the per-model probabilities. Throws once more
/// than cap sequences have been visited.
template <class Fn>
void for_each_trajectory(const std::vector<const Model*>& models, const Policy& pi, Fn&& fn,
                         std::size_t cap = kEnumerationCap) {
    require(!models.empty(), "enumeration: no models");
    const Shape& sh = models.front()->shape();
    for (auto* m : models) require(m->shape() == sh, "enumeration: shapes differ");
    check_policy(pi, sh);
    const std::size_t K = models.size();
    const int S = sh.S, H = sh.H;
    std::vector<int> states(H);
    std::vector<double> probs(static_cast<std::size_t>(H) * K);
    std::size_t visited = 0;
    std::function<void(int)> rec = [&](int h) {
        for (int s = 0; s < S; ++s) {
            bool any = false;
            for (std::size_t k = 0; k < K; ++k) {
                double p = h == 0 ? models[k]->init(s)
                                  : probs[(h - 1) * K + k] *
                                        models[k]->p(h - 1, states[h - 1],
                                                     pi.at(sh, h - 1, states[h - 1]), s);
                probs[h * K + k] = p;
                any = any || p > 0.0;
            }
            if (!any) continue;
            states[h] = s;
            if (h + 1 == H) {
                if (++visited > cap)
                    throw CapacityError("trajectory enumeration exceeded the cap of " +
                                        std::to_string(cap) + " trajectories");
                fn(static_cast<const std::vector<int>&>(states),
                   static_cast<const double*>(probs.data() + static_cast<std::size_t>(h) * K));
            } else {
                rec(h + 1);
            }
        }
    };
    rec(0);
}

/// Sum_h |R1_h - R2_h|^q along a state sequence under a deterministic policy.
inline double reward_gap_along(const Model& m1, const Model& m2, const Policy& pi,
                               const std::vector<int>& states, int q) {
    const Shape& sh = m1.shape();
    double g = 0.0;
    for (int h = 0; h < sh.H; ++h) {
        int a = pi.at(sh, h, states[h]);
        double d = std::abs(m1.r(h, states[h], a) - m2.r(h, states[h], a));
        g += q == 1 ? d : d * d;
    }
    return g;
}

/// E_{o ~ M(pi)} Sum_h |R^M_h - R^Mref_h|^q via the occupancy of M.
inline double reward_term(const Model& m, const Model& mref, const Policy& pi, int q) {
    const Shape& sh = m.shape();
    auto d = occupancy_measure(m, pi);
    double t = 0.0;
    for (int h = 0; h < sh.H; ++h)
        for (int s = 0; s < sh.S; ++s) {
            int a = pi.at(sh, h, s);
            double w = d[(static_cast<std::size_t>(h) * sh.S + s) * sh.A + a];
            if (w == 0.0) continue;
            double x = std::abs(m.r(h, s, a) - mref.r(h, s, a));
            t += w * (q == 1 ? x : x * x);
        }
    return t;
}

/// D_H^2 of trajectory laws plus the expected squared reward gap under m.
inline double d_rl_sq(const Model& m, const Model& mref, const Policy& pi) {
    check_shapes(m, mref);
    return hellinger_traj(m, mref, pi) + reward_term(m, mref, pi, 2);
}

/// TV of trajectory laws (by enumeration) plus the expected l1 reward gap under m.
inline double d_tilde(const Model& m, const Model& mref, const Policy& pi,
                      std::size_t cap = kEnumerationCap) {
    check_shapes(m, mref);
    double tv = 0.0;
    for_each_trajectory({&m, &mref}, pi,
                        [&](const std::vector<int>&, const double* p) { tv += std::abs(p[0] - p[1]); },
                        cap);
    return std::clamp(0.5 * tv, 0.0, 1.0) + reward_term(m, mref, pi, 1);
}

/// Total variation only (no reward part).
inline double tv_traj(const Model& m, const Model& mref, const Policy& pi,
                      std::size_t cap = kEnumerationCap) {
    double tv = 0.0;
    for_each_trajectory({&m, &mref}, pi,
                        [&](const std::vector<int>&, const double* p) { tv += std::abs(p[0] - p[1]); },
                        cap);
    return std::clamp(0.5 * tv, 0.0, 1.0);
}

/// Draws (o, r) from M(pi).
inline Trajectory simulate(const Model& m, const Policy& pi, Rng& rng) {
    const Shape& sh = m.shape();
    Trajectory tr;
    tr.states.resize(sh.H);
    tr.actions.resize(sh.H);
    tr.rewards.resize(sh.H);
    int s = static_cast<int>(rng.categorical(m.initial()));
    for (int h = 0; h < sh.H; ++h) {
        int a = pi.at(sh, h, s);
        tr.states[h] = s;
        tr.actions[h] = a;
        double mean = m.r(h, s, a);
        tr.rewards[h] = m.channel() == RewardChannel::BernoulliScaled ? (rng.bernoulli(mean) ? 1.0 : 0.0)
                                                                      : mean;
        if (h + 1 < sh.H) s = static_cast<int>(rng.categorical(m.row(h, s, a)));
    }
    return tr;
}

inline void check_trajectory(const Trajectory& tr, const Shape& sh) {
    const std::size_t H = sh.H;
    require(tr.states.size() == H && tr.actions.size() == H && tr.rewards.size() == H,
            "trajectory: lengths must equal H");
    for (std::size_t h = 0; h < H; ++h) {
        require(tr.states[h] >= 0 && tr.states[h] < sh.S, "trajectory: state out of range");
        require(tr.actions[h] >= 0 && tr.actions[h] < sh.A, "trajectory: action out of range");
    }
}

/// log P^{M,pi}(o). The policy factor is 1 when the actions agree with pi.
inline double log_likelihood(const Model& m, const Policy& pi, const Trajectory& tr) {
    const Shape& sh = m.shape();
    check_trajectory(tr, sh);
    for (int h = 0; h < sh.H; ++h)
        require(tr.actions[h] == pi.at(sh, h, tr.states[h]),
                "trajectory: actions are inconsistent with the executed policy");
    double p = m.init(tr.states[0]);
    if (p <= 0.0) return kNegInf;
    double ll = std::log(p);
    for (int h = 0; h + 1 < sh.H; ++h) {
        double q = m.p(h, tr.states[h], tr.actions[h], tr.states[h + 1]);
        if (q <= 0.0) return kNegInf;
        ll += std::log(q);
    }
    return ll;
}

/// ||r - R^M(o)||_2^2.
inline double reward_sq_loss(const Model& m, const Trajectory& tr) {
    double l = 0.0;
    for (int h = 0; h < m.shape().H; ++h) {
        double d = tr.rewards[h] - m.r(h, tr.states[h], tr.actions[h]);
        l += d * d;
    }
    return l;
}

} // namespace dec
