#pragma once

#include "dec/support.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dec {

struct Shape {
    int S = 1;
    int A = 1;
    int H = 1;

    void validate() const {
        require(S >= 1 && A >= 1 && H >= 1, "shape: S, A, H must all be >= 1");
    }
    std::size_t cells() const { return static_cast<std::size_t>(S) * A; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

enum class RewardChannel { DeterministicMean, BernoulliScaled };

/// Checks that p is a probability vector within kDistTol. Never renormalizes.
inline void check_distribution(std::span<const double> p, const std::string& what) {
    double s = 0.0;
    for (double x : p) {
        if (!(x >= 0.0)) throw ValidationError(what + ": negative or NaN entry");
        s += x;
    }
    if (std::abs(s - 1.0) > kDistTol)
        throw ValidationError(what + ": entries sum to " + fmt17(s) + ", expected 1");
}

/// Tabular episodic environment. Holds the initial law, the H-1 kernels
/// P_h(s'|s,a) for h < H, and mean rewards R_h(s,a) for h <= H.
class Model {
public:
    Model() = default;

    /// transitions: flat [(h*S + s)*A + a]*S + s' for h in [0, H-1).
    /// rewards: flat [(h*S + s)*A + a] for h in [0, H).
    Model(Shape shape, std::vector<double> initial, std::vector<double> transitions,
          std::vector<double> rewards, RewardChannel channel = RewardChannel::DeterministicMean)
        : shape_(shape), initial_(std::move(initial)), P_(std::move(transitions)),
          R_(std::move(rewards)), channel_(channel) {
        validate();
    }

    const Shape& shape() const { return shape_; }
    RewardChannel channel() const { return channel_; }

    double init(int s) const { return initial_[s]; }
    const std::vector<double>& initial() const { return initial_; }

    std::span<const double> row(int h, int s, int a) const {
        return {P_.data() + row_offset(h, s, a), static_cast<std::size_t>(shape_.S)};
    }
    double p(int h, int s, int a, int s2) const { return P_[row_offset(h, s, a) + s2]; }
    double r(int h, int s, int a) const {
        return R_[(static_cast<std::size_t>(h) * shape_.S + s) * shape_.A + a];
    }

    const std::vector<double>& transitions() const { return P_; }
    const std::vector<double>& rewards() const { return R_; }

    /// Largest total mean reward along any positive-probability trajectory.
    double max_reward_sum() const {
        const int S = shape_.S, A = shape_.A, H = shape_.H;
        std::vector<double> W(S, 0.0), next(S, 0.0);
        for (int h = H - 1; h >= 0; --h) {
            for (int s = 0; s < S; ++s) {
                double best = -1.0;
                for (int a = 0; a < A; ++a) {
                    double cont = 0.0;
                    if (h + 1 < H) {
                        cont = kNegInf;
                        for (int s2 = 0; s2 < S; ++s2)
                            if (p(h, s, a, s2) > 0.0) cont = std::max(cont, next[s2]);
                    }
                    best = std::max(best, r(h, s, a) + cont);
                }
                W[s] = best;
            }
            next = W;
        }
        double m = 0.0;
        for (int s = 0; s < S; ++s)
            if (initial_[s] > 0.0) m = std::max(m, W[s]);
        return m;
    }

    friend bool operator==(const Model&, const Model&) = default;

private:
    std::size_t row_offset(int h, int s, int a) const {
        return ((static_cast<std::size_t>(h) * shape_.S + s) * shape_.A + a) * shape_.S;
    }

    void validate() const {
        shape_.validate();
        const std::size_t S = shape_.S, A = shape_.A, H = shape_.H;
        require(initial_.size() == S, "model: initial has wrong length");
        require(P_.size() == (H - 1) * S * A * S, "model: transitions have wrong size");
        require(R_.size() == H * S * A, "model: rewards have wrong size");
        check_distribution(initial_, "model: initial");
        for (int h = 0; h + 1 < shape_.H; ++h)
            for (int s = 0; s < shape_.S; ++s)
                for (int a = 0; a < shape_.A; ++a)
                    check_distribution(row(h, s, a), "model: transition row (h=" +
                                                         std::to_string(h) + ", s=" +
                                                         std::to_string(s) + ", a=" +
                                                         std::to_string(a) + ")");
        for (double x : R_)
            require(x >= 0.0 && x <= 1.0, "model: mean reward outside [0,1]");
        require(max_reward_sum() <= 1.0 + 1e-12,
                "model: some trajectory has total mean reward above 1");
    }

    Shape shape_;
    std::vector<double> initial_;
    std::vector<double> P_;
    std::vector<double> R_;
    RewardChannel channel_ = RewardChannel::DeterministicMean;
};

/// Deterministic Markov policy, actions[h*S + s].
struct Policy {
    std::vector<int> actions;

    int at(const Shape& sh, int h, int s) const { return actions[static_cast<std::size_t>(h) * sh.S + s]; }
    friend bool operator==(const Policy&, const Policy&) = default;
};

inline void check_policy(const Policy& pi, const Shape& sh) {
    require(pi.actions.size() == static_cast<std::size_t>(sh.S) * sh.H, "policy: wrong table size");
    for (int a : pi.actions) require(a >= 0 && a < sh.A, "policy: action out of range");
}

struct PolicyClass {
    Shape shape;
    std::vector<Policy> policies;

    std::size_t size() const { return policies.size(); }
    const Policy& operator[](std::size_t i) const { return policies[i]; }

    void validate() const {
        shape.validate();
        require(!policies.empty(), "policy class is empty");
        for (const auto& p : policies) check_policy(p, shape);
    }

    /// Number of deterministic Markov policies, saturating at cap + 1.
    static std::size_t count_all(const Shape& sh, std::size_t cap) {
        std::size_t n = 1;
        for (int k = 0; k < sh.S * sh.H; ++k) {
            n *= static_cast<std::size_t>(sh.A);
            if (n > cap) return cap + 1;
        }
        return n;
    }

    /// All A^{S*H} deterministic Markov policies. Entry h*S+s is the least
    /// significant digit first, so index 0 plays action 0 everywhere.
    static PolicyClass all(const Shape& sh, std::size_t cap = 65536) {
        sh.validate();
        std::size_t n = count_all(sh, cap);
        if (n > cap)
            throw CapacityError("policy class: A^(S*H) exceeds the cap of " + std::to_string(cap));
        PolicyClass pc{sh, {}};
        pc.policies.reserve(n);
        const std::size_t cells = static_cast<std::size_t>(sh.S) * sh.H;
        for (std::size_t idx = 0; idx < n; ++idx) {
            Policy p;
            p.actions.resize(cells);
            std::size_t rest = idx;
            for (std::size_t c = 0; c < cells; ++c) {
                p.actions[c] = static_cast<int>(rest % sh.A);
                rest /= sh.A;
            }
            pc.policies.push_back(std::move(p));
        }
        return pc;
    }
};

/// p in Delta(Pi); pairs with the PolicyClass at each call site.
struct PolicyMixture {
    std::vector<double> weights;

    static PolicyMixture point(std::size_t n, std::size_t i) {
        PolicyMixture m{std::vector<double>(n, 0.0)};
        m.weights[i] = 1.0;
        return m;
    }
    void validate(std::size_t n) const {
        require(weights.size() == n, "policy mixture: size does not match the policy class");
        check_distribution(weights, "policy mixture");
    }
};

/// A probability vector over a ModelClass (or over a cover's representatives).
struct Belief {
    std::vector<double> weights;

    static Belief uniform(std::size_t n) {
        return Belief{std::vector<double>(n, 1.0 / static_cast<double>(n))};
    }
    static Belief point(std::size_t n, std::size_t i) {
        Belief b{std::vector<double>(n, 0.0)};
        b.weights[i] = 1.0;
        return b;
    }
    void validate(std::size_t n) const {
        require(weights.size() == n, "belief: size does not match the model class");
        check_distribution(weights, "belief");
    }
};

struct Trajectory {
    std::vector<int> states;
    std::vector<int> actions;
    std::vector<double> rewards;
};

/// Ordered finite set of models with a shared shape. When factorized, the
/// models are the row-major product of num_p transition parts and num_r
/// reward parts: models[p*num_r + r].
class ModelClass {
public:
    struct Factorization {
        std::size_t num_p = 0;
        std::size_t num_r = 0;
    };

    ModelClass() = default;
    explicit ModelClass(std::vector<Model> models, std::optional<Factorization> fac = std::nullopt)
        : models_(std::move(models)), fac_(fac) {
        require(!models_.empty(), "model class is empty");
        for (const auto& m : models_)
            require(m.shape() == models_.front().shape(), "model class: shapes differ");
        if (fac_) check_factorization();
    }

    /// Builds P x R from transition carriers (their rewards are ignored) and
    /// reward tables.
    static ModelClass factorized(const std::vector<Model>& transitions,
                                 const std::vector<std::vector<double>>& rewards,
                                 RewardChannel channel = RewardChannel::DeterministicMean) {
        require(!transitions.empty() && !rewards.empty(), "factorized class: empty factor");
        std::vector<Model> ms;
        for (const auto& P : transitions)
            for (const auto& R : rewards)
                ms.emplace_back(P.shape(), P.initial(), P.transitions(), R, channel);
        return ModelClass(std::move(ms), Factorization{transitions.size(), rewards.size()});
    }

    std::size_t size() const { return models_.size(); }
    const Model& operator[](std::size_t i) const { return models_[i]; }
    const std::vector<Model>& models() const { return models_; }
    const Shape& shape() const { return models_.front().shape(); }

    bool is_factorized() const { return fac_.has_value(); }
    const Factorization& factorization() const {
        require(fac_.has_value(), "model class carries no reward-free factorization");
        return *fac_;
    }
    std::size_t index(std::size_t p, std::size_t r) const {
        return p * factorization().num_r + r;
    }

    /// The transition factor as a class with null rewards.
    ModelClass transition_class() const {
        const auto& f = factorization();
        std::vector<Model> ps;
        for (std::size_t p = 0; p < f.num_p; ++p) {
            const Model& m = models_[index(p, 0)];
            ps.emplace_back(m.shape(), m.initial(), m.transitions(),
                            std::vector<double>(m.rewards().size(), 0.0), m.channel());
        }
        return ModelClass(std::move(ps));
    }

    /// The reward factor as raw tables.
    std::vector<std::vector<double>> reward_tables() const {
        const auto& f = factorization();
        std::vector<std::vector<double>> rs;
        for (std::size_t r = 0; r < f.num_r; ++r) rs.push_back(models_[index(0, r)].rewards());
        return rs;
    }

private:
    void check_factorization() const {
        require(fac_->num_p * fac_->num_r == models_.size(),
                "factorization: |P|*|R| does not match the number of models");
        for (std::size_t p = 0; p < fac_->num_p; ++p)
            for (std::size_t r = 0; r < fac_->num_r; ++r) {
                const Model& m = models_[p * fac_->num_r + r];
                const Model& mp = models_[p * fac_->num_r];
                const Model& mr = models_[r];
                require(m.initial() == mp.initial() && m.transitions() == mp.transitions(),
                        "factorization: transition part not shared along a row");
                require(m.rewards() == mr.rewards(),
                        "factorization: reward part not shared along a column");
            }
    }

    std::vector<Model> models_;
    std::optional<Factorization> fac_;
};

inline void check_pair(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), "distributions have different lengths");
    check_distribution(p, "first distribution");
    check_distribution(q, "second distribution");
}

/// Sum_i (sqrt p_i - sqrt q_i)^2, in [0, 2].
inline double hellinger_sq(std::span<const double> p, std::span<const double> q) {
    check_pair(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        s += d * d;
    }
    return std::clamp(s, 0.0, 2.0);
}

inline double tv_dist(std::span<const double> p, std::span<const double> q) {
    check_pair(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return std::clamp(0.5 * s, 0.0, 1.0);
}

} // namespace dec
