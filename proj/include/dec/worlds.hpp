#pragma once

#include "dec/dynamics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dec {

inline ModelClass make_random_class(std::uint64_t seed, int S, int A, int H, int K, double smoothing) {
    Shape sh{S, A, H};
    sh.validate();
    require(K >= 1, "random class: K must be >= 1");
    require(smoothing > 0.0, "random class: smoothing must be positive");
    Rng rng(seed);
    std::vector<Model> ms;
    for (int k = 0; k < K; ++k) {
        auto init = rng.dirichlet(S, smoothing);
        std::vector<double> P;
        P.reserve(static_cast<std::size_t>(H - 1) * S * A * S);
        for (int c = 0; c < (H - 1) * S * A; ++c) {
            auto row = rng.dirichlet(S, smoothing);
            P.insert(P.end(), row.begin(), row.end());
        }
        std::vector<double> R(static_cast<std::size_t>(H) * S * A);
        for (auto& r : R) r = rng.uniform() / H;
        ms.emplace_back(sh, std::move(init), std::move(P), std::move(R));
    }
    return ModelClass(std::move(ms));
}

/// Random P x R class; transition and reward parts drawn as in make_random_class.
inline ModelClass make_random_factorized(std::uint64_t seed, int S, int A, int H, int num_p, int num_r,
                                         double smoothing) {
    auto ps = make_random_class(seed, S, A, H, num_p, smoothing);
    Rng rng(splitmix64(seed ^ 0x5eedULL));
    std::vector<std::vector<double>> rs(num_r, std::vector<double>(static_cast<std::size_t>(H) * S * A));
    for (auto& R : rs)
        for (auto& r : R) r = rng.uniform() / H;
    return ModelClass::factorized(ps.models(), rs);
}

/// One-step bandit: S=1, H=1, one model per row of means.
inline ModelClass make_bandit_class(const std::vector<std::vector<double>>& means) {
    require(!means.empty(), "bandit class: no models");
    const int A = static_cast<int>(means.front().size());
    std::vector<Model> ms;
    for (const auto& m : means) {
        require(static_cast<int>(m.size()) == A, "bandit class: arm counts differ");
        ms.emplace_back(Shape{1, A, 1}, std::vector<double>{1.0}, std::vector<double>{}, m);
    }
    return ModelClass(std::move(ms));
}

/// Means (0.5, 0) and (0.5, 1).
inline ModelClass make_two_bandit() { return make_bandit_class({{0.5, 0.0}, {0.5, 1.0}}); }

struct TreeCell {
    int step = 0; ///< 1-based step at which the leaf action is taken
    int leaf = 0; ///< state index of the leaf
    int action = 0;
};

struct TreeInstance {
    ModelClass models;           ///< factorized with a single reward part
    std::size_t reference = 0;   ///< index of the unperturbed model
    PolicyClass policies;        ///< canonical leaf-and-trigger policies
    std::vector<TreeCell> cells; ///< cells[k] is perturbed in model k+1
    int n = 0, A = 0, H = 0;
    double delta = 0.0;
    int s_plus = 0, s_minus = 0;

    int h_prime() const { return H - n; }
    int s_prime() const { return 1 << n; }
    int a_prime() const { return A - 1; }
    /// Delta - Delta (1 + 3 gamma Delta) / (H'S'A').
    double edec_lower_bound(double gamma) const {
        return delta - delta * (1.0 + 3.0 * gamma * delta) / (h_prime() * s_prime() * a_prime());
    }
};

/// Binary tree of depth n+1 over states 0..2^{n+1}-2 (heap order, root 0),
/// then s_plus and s_minus. Internal nodes: action 1 goes right, any other
/// action goes left. Leaves: action 0 waits; other actions reach s_plus with
/// probability 1/2, or 1/2 + delta at the perturbed cell. s_plus pays 1 and
/// moves to the absorbing s_minus. The horizon is H + 1 so that arrival after
/// a step-H leaf action is observed.
inline TreeInstance make_tree_instance(int n, int A, int H, double delta) {
    require(n >= 1, "tree instance: n must be >= 1");
    require(A >= 2, "tree instance: A must be >= 2");
    require(H > n && H >= 2 * n, "tree instance: H must satisfy H > n and H >= 2n");
    require(delta > 0.0 && delta <= 1.0 / 3.0 + 1e-15, "tree instance: delta must lie in (0, 1/3]");
    const int nodes = (1 << (n + 1)) - 1;
    const int S = nodes + 2, sp = nodes, sm = nodes + 1;
    const int first_leaf = (1 << n) - 1;
    const int Hi = H + 1;
    Shape sh{S, A, Hi};

    std::vector<TreeCell> cells;
    for (int h = n + 1; h <= H; ++h)
        for (int leaf = first_leaf; leaf < nodes; ++leaf)
            for (int a = 1; a < A; ++a) cells.push_back({h, leaf, a});

    auto build = [&](const TreeCell* cell) {
        std::vector<double> init(S, 0.0);
        init[0] = 1.0;
        std::vector<double> P(static_cast<std::size_t>(Hi - 1) * S * A * S, 0.0);
        auto at = [&](int h, int s, int a, int s2) -> double& {
            return P[((static_cast<std::size_t>(h) * S + s) * A + a) * S + s2];
        };
        for (int h = 0; h < Hi - 1; ++h)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    if (s == sp || s == sm) {
                        at(h, s, a, sm) = 1.0;
                    } else if (s < first_leaf) {
                        at(h, s, a, a == 1 ? 2 * s + 2 : 2 * s + 1) = 1.0;
                    } else if (a == 0) {
                        at(h, s, a, s) = 1.0;
                    } else {
                        double up = 0.5;
                        if (cell && cell->step == h + 1 && cell->leaf == s && cell->action == a) up += delta;
                        at(h, s, a, sp) = up;
                        at(h, s, a, sm) = 1.0 - up;
                    }
                }
        return Model(sh, init, P, std::vector<double>(static_cast<std::size_t>(Hi) * S * A, 0.0));
    };

    std::vector<Model> ps;
    ps.push_back(build(nullptr));
    for (const auto& c : cells) ps.push_back(build(&c));

    std::vector<double> R(static_cast<std::size_t>(Hi) * S * A, 0.0);
    for (int h = 0; h < Hi; ++h)
        for (int a = 0; a < A; ++a) R[(static_cast<std::size_t>(h) * S + sp) * A + a] = 1.0;

    TreeInstance ti;
    ti.models = ModelClass::factorized(ps, {R});
    ti.reference = 0;
    ti.cells = cells;
    ti.n = n;
    ti.A = A;
    ti.H = H;
    ti.delta = delta;
    ti.s_plus = sp;
    ti.s_minus = sm;

    // Leaf x trigger (step, action) or never trigger.
    ti.policies.shape = sh;
    auto route = [&](int leaf) {
        std::vector<int> path_action(nodes, 0);
        for (int v = leaf; v > 0; v = (v - 1) / 2) {
            int parent = (v - 1) / 2;
            path_action[parent] = (v == 2 * parent + 2) ? 1 : 0;
        }
        return path_action;
    };
    for (int leaf = first_leaf; leaf < nodes; ++leaf) {
        auto path = route(leaf);
        auto make = [&](int trig_step, int trig_action) {
            Policy p;
            p.actions.assign(static_cast<std::size_t>(Hi) * S, 0);
            for (int h = 0; h < Hi; ++h)
                for (int s = 0; s < first_leaf; ++s) p.actions[h * S + s] = path[s];
            if (trig_step > 0) p.actions[(trig_step - 1) * S + leaf] = trig_action;
            return p;
        };
        ti.policies.policies.push_back(make(0, 0));
        for (int h = n + 1; h <= H; ++h)
            for (int a = 1; a < A; ++a) ti.policies.policies.push_back(make(h, a));
    }
    return ti;
}

/// Probability under m of being at (step, leaf) and taking action there at
/// that step, for deterministic pi.
inline double reach_probability(const Model& m, const Policy& pi, int step, int s, int a) {
    auto d = occupancy_measure(m, pi);
    const Shape& sh = m.shape();
    return d[(static_cast<std::size_t>(step - 1) * sh.S + s) * sh.A + a];
}

/// Features phi_h(s'|s,a) in R^d for the H-1 kernels, plus the fixed initial
/// law and mean rewards shared by every member.
struct LinearMixtureFeatures {
    Shape shape;
    int d = 1;
    std::vector<double> initial;
    std::vector<double> rewards;
    std::vector<double> phi; ///< [(((h*S + s)*A + a)*S + s2)*d + j]

    double feature(int h, int s, int a, int s2, int j) const {
        return phi[((((static_cast<std::size_t>(h) * shape.S + s) * shape.A + a) * shape.S + s2) * d) + j];
    }
    void validate() const {
        shape.validate();
        require(d >= 1, "linear mixture: d must be >= 1");
        require(phi.size() == static_cast<std::size_t>(shape.H - 1) * shape.S * shape.A * shape.S * d,
                "linear mixture: feature table has wrong size");
    }
};

/// Kernel P_h(s'|s,a) = <theta_h, phi_h(s'|s,a)>; theta is flat [h*d + j].
inline std::vector<double> linear_mixture_kernel(const LinearMixtureFeatures& f,
                                                 const std::vector<double>& theta) {
    const Shape& sh = f.shape;
    require(theta.size() == static_cast<std::size_t>(sh.H - 1) * f.d,
            "linear mixture: parameter stack has wrong size");
    std::vector<double> P(static_cast<std::size_t>(sh.H - 1) * sh.S * sh.A * sh.S);
    for (int h = 0; h + 1 < sh.H; ++h)
        for (int s = 0; s < sh.S; ++s)
            for (int a = 0; a < sh.A; ++a)
                for (int s2 = 0; s2 < sh.S; ++s2) {
                    double v = 0.0;
                    for (int j = 0; j < f.d; ++j) v += theta[h * f.d + j] * f.feature(h, s, a, s2, j);
                    if (std::abs(v) < 1e-14) v = 0.0;
                    P[((static_cast<std::size_t>(h) * sh.S + s) * sh.A + a) * sh.S + s2] = v;
                }
    return P;
}

inline ModelClass make_linear_mixture_class(const LinearMixtureFeatures& f,
                                            const std::vector<std::vector<double>>& thetas) {
    f.validate();
    require(!thetas.empty(), "linear mixture: no parameters");
    std::vector<Model> ms;
    const Shape& sh = f.shape;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        auto P = linear_mixture_kernel(f, thetas[k]);
        for (int c = 0; c < (sh.H - 1) * sh.S * sh.A; ++c) {
            double sum = 0.0;
            for (int s2 = 0; s2 < sh.S; ++s2) {
                double v = P[static_cast<std::size_t>(c) * sh.S + s2];
                require(v >= 0.0, "linear mixture: parameter " + std::to_string(k) +
                                      " induces a negative probability");
                sum += v;
            }
            require(std::abs(sum - 1.0) <= kDistTol,
                    "linear mixture: parameter " + std::to_string(k) + " induces a row summing to " +
                        fmt17(sum));
        }
        ms.emplace_back(sh, f.initial, std::move(P), f.rewards);
    }
    return ModelClass(std::move(ms));
}

/// m-player episodic Markov game over joint actions. Joint index uses mixed
/// radix with player 0 most significant.
class TabularMG {
public:
    TabularMG() = default;
    TabularMG(std::vector<int> action_counts, int S, int H, std::vector<double> initial,
              std::vector<double> transitions, const std::vector<std::vector<double>>& rewards)
        : counts_(std::move(action_counts)) {
        require(!counts_.empty(), "game: no players");
        require(rewards.size() == counts_.size(), "game: one reward table per player is required");
        int A = 1;
        for (int c : counts_) {
            require(c >= 1, "game: action counts must be >= 1");
            A *= c;
        }
        Shape sh{S, A, H};
        for (std::size_t i = 0; i < counts_.size(); ++i)
            players_.emplace_back(sh, initial, transitions, rewards[i]);
    }

    int num_players() const { return static_cast<int>(counts_.size()); }
    const std::vector<int>& action_counts() const { return counts_; }
    const Shape& shape() const { return players_.front().shape(); }
    /// Dynamics with player i's rewards.
    const Model& player(int i) const { return players_[i]; }

    int encode(const std::vector<int>& a) const {
        int j = 0;
        for (std::size_t i = 0; i < counts_.size(); ++i) j = j * counts_[i] + a[i];
        return j;
    }
    std::vector<int> decode(int j) const {
        std::vector<int> a(counts_.size());
        for (std::size_t i = counts_.size(); i-- > 0;) {
            a[i] = j % counts_[i];
            j /= counts_[i];
        }
        return a;
    }
    /// Joint index with player i's action replaced.
    int replace(int j, int i, int ai) const {
        auto a = decode(j);
        a[i] = ai;
        return encode(a);
    }

    friend bool operator==(const TabularMG&, const TabularMG&) = default;

private:
    std::vector<int> counts_;
    std::vector<Model> players_;
};

inline TabularMG make_random_mg(std::uint64_t seed, int S, std::vector<int> counts, int H, double smoothing,
                                bool zero_sum = false) {
    int A = 1;
    for (int c : counts) A *= c;
    require(!zero_sum || counts.size() == 2, "random game: zero-sum games need two players");
    auto base = make_random_class(seed, S, A, H, 1, smoothing)[0];
    Rng rng(splitmix64(seed ^ 0x6a4eULL));
    std::vector<std::vector<double>> R(counts.size(),
                                       std::vector<double>(static_cast<std::size_t>(H) * S * A));
    for (auto& table : R)
        for (auto& r : table) r = rng.uniform() / H;
    if (zero_sum)
        for (std::size_t k = 0; k < R[0].size(); ++k) R[1][k] = 1.0 / H - R[0][k];
    return TabularMG(std::move(counts), S, H, base.initial(), base.transitions(), R);
}

} // namespace dec
