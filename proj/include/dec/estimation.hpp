#pragma once

#include "dec/covering.hpp"
#include "dec/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace dec {

/// sigma^2 of the reward noise: 1/4 for Bernoulli draws, 0 for means.
inline double channel_variance(RewardChannel c) {
    return c == RewardChannel::BernoulliScaled ? 0.25 : 0.0;
}

struct LearningRates {
    double eta_p = 1.0 / 3.0;
    double eta_r = 1.0 / 3.0;

    void validate() const {
        require(eta_p >= 0.0 && eta_p < 0.5, "learning rates: eta_p must lie in [0, 1/2)");
        require(eta_r >= 0.0, "learning rates: eta_r must be nonnegative");
    }
    /// 4 eta_p + eta_r < 2.
    bool in_guarantee_regime() const { return 4.0 * eta_p + eta_r < 2.0; }
    /// 2 eta_p + 2 sigma^2 eta_r < 1 for the channel's sigma^2.
    bool subgaussian_valid(RewardChannel c) const {
        return 2.0 * eta_p + 2.0 * channel_variance(c) * eta_r < 1.0;
    }
};

/// Per-round exact estimation errors and their running sums.
struct EstimationLedger {
    std::vector<double> est_rl;
    std::vector<double> est_h;
    double cum_rl = 0.0;
    double cum_h = 0.0;

    void push(double rl, double h) {
        require(rl >= -1e-12 && h >= -1e-12, "estimation ledger: negative increment");
        rl = std::max(rl, 0.0);
        h = std::max(h, 0.0);
        est_rl.push_back(rl);
        est_h.push_back(h);
        cum_rl += rl;
        cum_h += h;
    }
    std::size_t rounds() const { return est_rl.size(); }
};

namespace detail {

/// Adds extra[k] to log weights, max-shifts, exponentiates and renormalizes.
/// Weights below 1e-300 become exact zeros.
inline Belief reweight(const Belief& b, const std::vector<double>& extra, const char* what) {
    const std::size_t n = b.weights.size();
    std::vector<double> lw(n, kNegInf);
    double top = kNegInf;
    for (std::size_t k = 0; k < n; ++k) {
        if (b.weights[k] <= 0.0 || extra[k] == kNegInf) continue;
        lw[k] = std::log(b.weights[k]) + extra[k];
        top = std::max(top, lw[k]);
    }
    if (top == kNegInf) throw ValidationError(std::string(what) + ": the observation has zero likelihood under every model");
    Belief out{std::vector<double>(n, 0.0)};
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (lw[k] == kNegInf) continue;
        out.weights[k] = std::exp(lw[k] - top);
        z += out.weights[k];
    }
    for (auto& w : out.weights) {
        w /= z;
        if (w < 1e-300) w = 0.0;
    }
    double s = 0.0;
    for (double w : out.weights) s += w;
    for (auto& w : out.weights) w /= s;
    return out;
}

inline double tempered_term(double eta_p, double ll, double eta_r, double loss) {
    if (eta_p == 0.0) return -eta_r * loss; // L^0 = 1, also for L = 0
    if (ll == kNegInf) return kNegInf;
    return eta_p * ll - eta_r * loss;
}

} // namespace detail

/// Tempered Aggregation over a finite class.
inline Belief ta_update(const Belief& belief, const ModelClass& cls, const Policy& pi, const Trajectory& tr,
                        const LearningRates& rates) {
    rates.validate();
    belief.validate(cls.size());
    std::vector<double> extra(cls.size());
    for (std::size_t k = 0; k < cls.size(); ++k)
        extra[k] = detail::tempered_term(rates.eta_p, log_likelihood(cls[k], pi, tr), rates.eta_r,
                                         reward_sq_loss(cls[k], tr));
    return detail::reweight(belief, extra, "tempered aggregation");
}

/// Tempered Aggregation over a cover's representatives with the optimistic likelihood.
inline Belief ta_update(const Belief& belief, const OptimisticCover& cover, const Policy& pi, const Trajectory& tr,
                        const LearningRates& rates) {
    rates.validate();
    belief.validate(cover.size());
    std::vector<double> extra(cover.size());
    for (std::size_t k = 0; k < cover.size(); ++k)
        extra[k] = detail::tempered_term(rates.eta_p, optimistic_log_likelihood(cover, k, pi, tr), rates.eta_r,
                                         reward_sq_loss(cover.representatives[k], tr));
    return detail::reweight(belief, extra, "tempered aggregation with covering");
}

/// Optimistic posterior sampling step: TA with an extra factor exp(f^M(pi_M) / gamma).
inline Belief ops_update(const Belief& belief, const ModelClass& cls, const Policy& pi, const Trajectory& tr,
                         const LearningRates& rates, double gamma, const std::vector<double>& optimal_values) {
    rates.validate();
    belief.validate(cls.size());
    require(gamma > 0.0, "ops update: gamma must be positive");
    require(optimal_values.size() == cls.size(), "ops update: one optimal value per model is required");
    std::vector<double> extra(cls.size());
    for (std::size_t k = 0; k < cls.size(); ++k) {
        extra[k] = detail::tempered_term(rates.eta_p, log_likelihood(cls[k], pi, tr), rates.eta_r,
                                         reward_sq_loss(cls[k], tr));
        if (extra[k] != kNegInf) extra[k] += optimal_values[k] / gamma;
    }
    return detail::reweight(belief, extra, "optimistic posterior sampling");
}

struct Observation {
    Policy pi;
    Trajectory traj;
};

/// Sum over the history of log P^{M,pi}(o) - ||r - R^M(o)||^2.
inline double omle_loglik(const Model& m, const std::vector<Observation>& history) {
    double L = 0.0;
    for (const auto& ob : history) {
        double ll = log_likelihood(m, ob.pi, ob.traj);
        if (ll == kNegInf) return kNegInf;
        L += ll - reward_sq_loss(m, ob.traj);
    }
    return L;
}

/// {k : L[k] >= max L - beta}.
inline std::vector<std::size_t> confidence_set_from(const std::vector<double>& L, double beta) {
    require(beta >= 0.0, "confidence set: beta must be nonnegative");
    require(!L.empty(), "confidence set: no models");
    double top = *std::max_element(L.begin(), L.end());
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < L.size(); ++k)
        if (top == kNegInf || L[k] >= top - beta) out.push_back(k);
    return out;
}

inline std::vector<std::size_t> omle_confidence_set(const ModelClass& cls, const std::vector<Observation>& history,
                                                    double beta) {
    std::vector<double> L(cls.size());
    for (std::size_t k = 0; k < cls.size(); ++k) L[k] = omle_loglik(cls[k], history);
    return confidence_set_from(L, beta);
}

} // namespace dec
