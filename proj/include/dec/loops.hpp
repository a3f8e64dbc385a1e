#pragma once

#include "dec/covering.hpp"
#include "dec/dec_suite.hpp"
#include "dec/estimation.hpp"
#include "dec/games.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dec {

struct RunConfig {
    double gamma = 1.0;
    std::optional<LearningRates> rates; ///< the algorithm's default when empty
    std::size_t T = 0;
    std::uint64_t seed = 0;
    double delta = 0.1;
    double beta = 0.0; ///< OMLE confidence radius
    ModelClass cls;
    std::size_t truth = 0;
    PolicyClass policies; ///< all deterministic Markov policies when empty
    std::optional<OptimisticCover> cover;

    void validate() const {
        require(gamma > 0.0, "run: gamma must be positive");
        require(truth < cls.size(), "run: truth index " + std::to_string(truth) + " is not in the class");
        require(delta > 0.0 && delta < 1.0, "run: delta must lie in (0, 1)");
        require(beta >= 0.0, "run: beta must be nonnegative");
        if (!policies.policies.empty()) {
            policies.validate();
            require(policies.shape == cls.shape(), "run: policy class shape differs from the class");
        }
    }
    PolicyClass policy_class() const { return policies.policies.empty() ? PolicyClass::all(cls.shape()) : policies; }
    LearningRates rates_or(LearningRates fallback) const {
        LearningRates r = rates.value_or(fallback);
        r.validate();
        return r;
    }
};

struct RoundRecord {
    std::size_t t = 0; ///< 1-based round
    std::vector<std::pair<std::string, std::vector<double>>> mixtures;
    double dec_value = 0.0;   ///< the round's complexity at mu^t
    double bound_value = 0.0; ///< term summed by the path-wise audit
    std::size_t policy = 0;   ///< index of pi^t in the policy class
    Trajectory traj;
    std::vector<double> belief; ///< mu^t
    std::string belief_hash;
    double est_increment = 0.0;
    double regret_increment = 0.0;
    double cum_regret = 0.0;
    double cum_est = 0.0;
    double audit_slack = 0.0;
    bool truth_in_set = true;

    const std::vector<double>& mixture(const std::string& name) const {
        for (const auto& [k, v] : mixtures)
            if (k == name) return v;
        throw ValidationError("round " + std::to_string(t) + ": no mixture named " + name);
    }
};

/// Per-round records plus terminal metrics. Row slack is
/// audit_scale * (Sum_{s<=t} bound_value + audit_gamma * cum_est) - cum_regret.
struct RunLedger {
    std::string algorithm;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    std::size_t truth = 0;
    double audit_scale = 1.0;
    double audit_gamma = 0.0;
    std::vector<RoundRecord> rounds;

    double reg_dm = 0.0;
    double subopt = 0.0;
    double subopt_rf = 0.0;
    double model_error = 0.0;
    double est_rl = 0.0;
    double est_h = 0.0;
    double audit_lhs = 0.0;
    double audit_rhs = 0.0;
    bool audit_applies = true; ///< false when the stated inequality is conditional and its event failed
    std::size_t estimate = 0;  ///< model-estimation output index
    bool contained = true;     ///< OMLE: M* stayed in every confidence set

    double min_slack() const {
        double s = std::numeric_limits<double>::infinity();
        for (const auto& r : rounds) s = std::min(s, r.audit_slack);
        return rounds.empty() ? 0.0 : s;
    }
    double terminal_slack() const { return audit_rhs - audit_lhs; }
    bool audit_ok(double tol = 1e-9) const {
        return min_slack() >= -tol && (!audit_applies || terminal_slack() >= -tol);
    }
};

namespace detail {

inline std::string belief_hash(const std::vector<double>& w) { return hex64(hash_doubles(w)); }

/// E_{i~p}[f^{M*}(pi_{M*}) - f^{M*}(pi_i)].
inline double expected_regret(const ClassTables& t, std::size_t truth, const std::vector<double>& p) {
    double r = 0.0;
    for (std::size_t i = 0; i < t.N; ++i)
        if (p[i] != 0.0) r += p[i] * t.subopt(truth, i);
    return r;
}

/// E_{i~p} E_{mb~mu} D(M*, mb, pi_i).
inline double expected_div(const std::vector<double>& D, std::size_t K, std::size_t N, std::size_t truth,
                           const std::vector<double>& p, const std::vector<double>& mu) {
    double e = 0.0;
    for (std::size_t mb = 0; mb < K; ++mb) {
        if (mu[mb] == 0.0) continue;
        const double* row = D.data() + (truth * K + mb) * N;
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            if (p[i] != 0.0) s += p[i] * row[i];
        e += mu[mb] * s;
    }
    return e;
}

/// Fills the cumulative columns and the row slack, returning the updated bound sum.
inline double close_row(RunLedger& L, RoundRecord& row, double bound_sum) {
    const RoundRecord* prev = L.rounds.empty() ? nullptr : &L.rounds.back();
    bound_sum += row.bound_value;
    row.cum_est = (prev ? prev->cum_est : 0.0) + row.est_increment;
    row.cum_regret = (prev ? prev->cum_regret : 0.0) + row.regret_increment;
    row.audit_slack = L.audit_scale * (bound_sum + L.audit_gamma * row.cum_est) - row.cum_regret;
    return bound_sum;
}

inline void add_to(std::vector<double>& acc, const std::vector<double>& v) {
    if (acc.empty()) acc.assign(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

inline std::vector<double> scaled(std::vector<double> v, double c) {
    for (auto& x : v) x *= c;
    return v;
}

} // namespace detail

/// E2D with Tempered Aggregation: play the exact DEC minimizer at mu^t.
/// With a cover the belief lives on its representatives.
inline RunLedger run_e2d_ta(const RunConfig& cfg) {
    cfg.validate();
    const auto rates = cfg.rates_or(LearningRates{});
    const auto pc = cfg.policy_class();
    const std::size_t K = cfg.cls.size();
    std::vector<Model> all = cfg.cls.models();
    std::size_t B = K; // size of the belief
    if (cfg.cover) {
        require(cfg.cover->size() >= 1 && cfg.cover->representatives.shape() == cfg.cls.shape(),
                "e2d: cover does not match the class");
        for (const auto& m : cfg.cover->representatives.models()) all.push_back(m);
        B = cfg.cover->size();
    }
    const auto t = build_tables(ModelClass(all), pc);
    RunLedger L;
    L.algorithm = "e2d_ta";
    L.gamma = cfg.gamma;
    L.seed = cfg.seed;
    L.truth = cfg.truth;
    L.audit_gamma = cfg.gamma;
    Belief mu = Belief::uniform(B);
    double bound_sum = 0.0;
    for (std::size_t r = 1; r <= cfg.T; ++r) {
        Rng rng = Rng::for_round(cfg.seed, r);
        Belief ref = mu;
        if (cfg.cover) {
            ref.weights.assign(t.K, 0.0);
            std::copy(mu.weights.begin(), mu.weights.end(), ref.weights.begin() + K);
        }
        auto rep = dec_at(t, ref, cfg.gamma, cfg.cover ? K : 0);
        const auto& p = rep.witness_of("p");
        RoundRecord row;
        row.t = r;
        row.mixtures = {{"p", p}};
        row.dec_value = row.bound_value = rep.value;
        row.policy = rng.categorical(p);
        row.traj = simulate(cfg.cls[cfg.truth], pc[row.policy], rng);
        row.belief = mu.weights;
        row.belief_hash = detail::belief_hash(mu.weights);
        row.est_increment = detail::expected_div(t.drl, t.K, t.N, cfg.truth, p, ref.weights);
        row.regret_increment = detail::expected_regret(t, cfg.truth, p);
        bound_sum = detail::close_row(L, row, bound_sum);
        mu = cfg.cover ? ta_update(mu, *cfg.cover, pc[row.policy], row.traj, rates)
                       : ta_update(mu, cfg.cls, pc[row.policy], row.traj, rates);
        L.rounds.push_back(std::move(row));
    }
    if (!L.rounds.empty()) {
        L.reg_dm = L.rounds.back().cum_regret;
        L.est_rl = L.rounds.back().cum_est;
    }
    L.audit_lhs = L.reg_dm;
    L.audit_rhs = bound_sum + cfg.gamma * L.est_rl;
    return L;
}

struct ExplorativeResult {
    RunLedger ledger;
    std::vector<double> p_out; ///< average of the per-round output mixtures
};

/// Explorative E2D: explore with p_exp^t, output the average of p_out^t.
/// hellinger_only drops the reward part of the information term.
inline ExplorativeResult run_explorative_e2d(const RunConfig& cfg, bool hellinger_only = false) {
    cfg.validate();
    const auto rates = cfg.rates_or(LearningRates{});
    const auto pc = cfg.policy_class();
    TableOptions opt;
    opt.drl = !hellinger_only;
    opt.dh = hellinger_only;
    const auto t = build_tables(cfg.cls, pc, opt);
    ExplorativeResult res;
    RunLedger& L = res.ledger;
    L.algorithm = "explorative_e2d";
    L.gamma = cfg.gamma;
    L.seed = cfg.seed;
    L.truth = cfg.truth;
    L.audit_gamma = cfg.gamma;
    Belief mu = Belief::uniform(t.K);
    double bound_sum = 0.0;
    std::vector<double> acc;
    for (std::size_t r = 1; r <= cfg.T; ++r) {
        Rng rng = Rng::for_round(cfg.seed, r);
        auto rep = edec_at(t, mu, cfg.gamma, hellinger_only);
        const auto& pe = rep.witness_of("p_exp");
        const auto& po = rep.witness_of("p_out");
        RoundRecord row;
        row.t = r;
        row.mixtures = {{"p_exp", pe}, {"p_out", po}};
        row.dec_value = row.bound_value = rep.value;
        row.policy = rng.categorical(pe);
        row.traj = simulate(cfg.cls[cfg.truth], pc[row.policy], rng);
        row.belief = mu.weights;
        row.belief_hash = detail::belief_hash(mu.weights);
        row.est_increment = detail::expected_div(hellinger_only ? t.dh : t.drl, t.K, t.N, cfg.truth, pe, mu.weights);
        row.regret_increment = detail::expected_regret(t, cfg.truth, po);
        bound_sum = detail::close_row(L, row, bound_sum);
        detail::add_to(acc, po);
        mu = ta_update(mu, cfg.cls, pc[row.policy], row.traj, rates);
        L.rounds.push_back(std::move(row));
    }
    if (!L.rounds.empty()) {
        const double T = static_cast<double>(cfg.T);
        res.p_out = detail::scaled(acc, 1.0 / T);
        L.subopt = detail::expected_regret(t, cfg.truth, res.p_out);
        L.reg_dm = L.rounds.back().cum_regret;
        (hellinger_only ? L.est_h : L.est_rl) = L.rounds.back().cum_est;
        L.audit_lhs = L.subopt;
        L.audit_rhs = (bound_sum + cfg.gamma * L.rounds.back().cum_est) / T;
    }
    return res;
}

struct RewardFreeResult {
    RunLedger ledger;
    std::vector<std::vector<double>> p_out; ///< per reward index, averaged over rounds

    /// p_out(R) for the reward part with index r.
    const std::vector<double>& plan(std::size_t r) const {
        require(r < p_out.size(), "reward-free planner: reward index out of range");
        return p_out[r];
    }
};

/// Reward-Free E2D over a P x R class: explore with the rfdec minimizer and
/// Hellinger-only TA on the transition part.
inline RewardFreeResult run_reward_free_e2d(const RunConfig& cfg) {
    cfg.validate();
    require(cfg.cls.is_factorized(), "reward-free: the class must carry a P x R factorization");
    auto rates = cfg.rates_or(LearningRates{1.0 / 3.0, 0.0});
    require(rates.eta_r == 0.0, "reward-free: exploration observes no rewards, eta_r must be 0");
    const auto pc = cfg.policy_class();
    const auto ft = build_factorized_tables(cfg.cls, pc);
    const auto trans = cfg.cls.transition_class();
    const std::size_t P = ft.num_p, R = ft.num_r, N = ft.full.N;
    const std::size_t p_star = cfg.truth / R;
    RewardFreeResult res;
    RunLedger& L = res.ledger;
    L.algorithm = "reward_free_e2d";
    L.gamma = cfg.gamma;
    L.seed = cfg.seed;
    L.truth = cfg.truth;
    L.audit_gamma = cfg.gamma;
    Belief mu = Belief::uniform(P);
    double bound_sum = 0.0;
    std::vector<std::vector<double>> acc(R);
    auto subopt_r = [&](std::size_t r, const std::vector<double>& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            if (p[i] != 0.0) s += p[i] * ft.full.subopt(p_star * R + r, i);
        return s;
    };
    for (std::size_t t = 1; t <= cfg.T; ++t) {
        Rng rng = Rng::for_round(cfg.seed, t);
        auto rep = rfdec_at(ft, mu, cfg.gamma);
        const auto& pe = rep.witness_of("p_exp");
        RoundRecord row;
        row.t = t;
        row.mixtures.emplace_back("p_exp", pe);
        double worst = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            const auto& po = rep.witness_of("p_out_" + std::to_string(r));
            row.mixtures.emplace_back("p_out_" + std::to_string(r), po);
            worst = std::max(worst, subopt_r(r, po));
            detail::add_to(acc[r], po);
        }
        row.dec_value = row.bound_value = rep.value;
        row.policy = rng.categorical(pe);
        row.traj = simulate(cfg.cls[cfg.truth], pc[row.policy], rng);
        row.belief = mu.weights;
        row.belief_hash = detail::belief_hash(mu.weights);
        row.est_increment = detail::expected_div(ft.trans.dh, P, N, p_star, pe, mu.weights);
        row.regret_increment = worst;
        bound_sum = detail::close_row(L, row, bound_sum);
        mu = ta_update(mu, trans, pc[row.policy], row.traj, rates);
        L.rounds.push_back(std::move(row));
    }
    if (!L.rounds.empty()) {
        const double T = static_cast<double>(cfg.T);
        for (std::size_t r = 0; r < R; ++r) {
            res.p_out.push_back(detail::scaled(acc[r], 1.0 / T));
            L.subopt_rf = std::max(L.subopt_rf, subopt_r(r, res.p_out.back()));
        }
        L.est_h = L.rounds.back().cum_est;
        L.reg_dm = L.rounds.back().cum_regret;
        L.audit_lhs = L.subopt_rf;
        L.audit_rhs = (bound_sum + cfg.gamma * L.est_h) / T;
    }
    return res;
}

/// Optimistic posterior sampling: play the optimal policy of M^t ~ mu^t.
/// The audit bound is the realized risk of the played mixture, which is at
/// least the DEC value recorded alongside it.
inline RunLedger run_mops(const RunConfig& cfg) {
    cfg.validate();
    const auto rates = cfg.rates_or(LearningRates{1.0 / 6.0, 0.6});
    const auto pc = cfg.policy_class();
    const auto t = build_tables(cfg.cls, pc);
    RunLedger L;
    L.algorithm = "mops";
    L.gamma = cfg.gamma;
    L.seed = cfg.seed;
    L.truth = cfg.truth;
    L.audit_gamma = cfg.gamma;
    Belief mu = Belief::uniform(t.K);
    double bound_sum = 0.0;
    for (std::size_t r = 1; r <= cfg.T; ++r) {
        Rng rng = Rng::for_round(cfg.seed, r);
        std::vector<double> p(t.N, 0.0);
        for (std::size_t m = 0; m < t.K; ++m) p[t.opt[m]] += mu.weights[m];
        auto e = t.expected(t.drl, mu.weights);
        double risk = kNegInf;
        for (std::size_t m = 0; m < t.K; ++m) {
            double v = 0.0;
            for (std::size_t i = 0; i < t.N; ++i)
                if (p[i] != 0.0) v += p[i] * (t.subopt(m, i) - cfg.gamma * e[m * t.N + i]);
            risk = std::max(risk, v);
        }
        RoundRecord row;
        row.t = r;
        row.mixtures = {{"p", p}};
        row.dec_value = dec_at(t, mu, cfg.gamma).value;
        row.bound_value = risk;
        const std::size_t sampled = rng.categorical(mu.weights);
        row.policy = t.opt[sampled];
        row.traj = simulate(cfg.cls[cfg.truth], pc[row.policy], rng);
        row.belief = mu.weights;
        row.belief_hash = detail::belief_hash(mu.weights);
        row.est_increment = detail::expected_div(t.drl, t.K, t.N, cfg.truth, p, mu.weights);
        row.regret_increment = detail::expected_regret(t, cfg.truth, p);
        bound_sum = detail::close_row(L, row, bound_sum);
        mu = ops_update(mu, cfg.cls, pc[row.policy], row.traj, rates, cfg.gamma, t.opt_value);
        L.rounds.push_back(std::move(row));
    }
    if (!L.rounds.empty()) {
        L.reg_dm = L.rounds.back().cum_regret;
        L.est_rl = L.rounds.back().cum_est;
    }
    L.audit_lhs = L.reg_dm;
    L.audit_rhs = bound_sum + cfg.gamma * L.est_rl;
    return L;
}

/// Optimistic MLE: play the greedy policy of the most optimistic model in the
/// confidence set (lowest index on ties). Rows audit optimism on the rounds
/// where M* is in the set.
inline RunLedger run_omle(const RunConfig& cfg) {
    cfg.validate();
    const auto pc = cfg.policy_class();
    const auto t = build_tables(cfg.cls, pc, TableOptions{false, false, false});
    RunLedger L;
    L.algorithm = "omle";
    L.gamma = cfg.gamma;
    L.seed = cfg.seed;
    L.truth = cfg.truth;
    L.audit_gamma = 0.0;
    std::vector<double> loglik(t.K, 0.0);
    double bound_sum = 0.0;
    for (std::size_t r = 1; r <= cfg.T; ++r) {
        Rng rng = Rng::for_round(cfg.seed, r);
        auto set = confidence_set_from(loglik, cfg.beta);
        std::size_t pick = set.front();
        for (std::size_t m : set)
            if (t.opt_value[m] > t.opt_value[pick]) pick = m;
        RoundRecord row;
        row.t = r;
        row.policy = t.opt[pick];
        row.mixtures = {{"p", std::vector<double>(t.N, 0.0)}};
        row.mixtures[0].second[row.policy] = 1.0;
        row.truth_in_set = std::find(set.begin(), set.end(), cfg.truth) != set.end();
        row.belief.assign(t.K, 0.0);
        for (std::size_t m : set) row.belief[m] = 1.0 / static_cast<double>(set.size());
        row.belief_hash = detail::belief_hash(row.belief);
        row.regret_increment = t.subopt(cfg.truth, row.policy);
        row.dec_value = t.opt_value[pick] - t.f(cfg.truth, row.policy);
        row.bound_value = row.truth_in_set ? row.dec_value : row.regret_increment;
        row.traj = simulate(cfg.cls[cfg.truth], pc[row.policy], rng);
        row.est_increment = d_rl_sq(cfg.cls[cfg.truth], cfg.cls[pick], pc[row.policy]);
        bound_sum = detail::close_row(L, row, bound_sum);
        L.contained = L.contained && row.truth_in_set;
        std::vector<Observation> ob{{pc[row.policy], row.traj}};
        for (std::size_t m = 0; m < t.K; ++m) loglik[m] += omle_loglik(cfg.cls[m], ob);
        L.rounds.push_back(std::move(row));
    }
    if (!L.rounds.empty()) {
        L.reg_dm = L.rounds.back().cum_regret;
        L.est_rl = L.rounds.back().cum_est;
    }
    L.audit_lhs = L.reg_dm;
    L.audit_rhs = bound_sum;
    L.audit_applies = L.contained;
    return L;
}

namespace detail {

/// argmin_M max_pibar E_{mb ~ mubar} d_tilde(M, mb, pibar), lowest index on ties.
inline std::size_t me_output_rule(const ClassTables& t, const std::vector<double>& mubar) {
    auto e = t.expected(t.dtilde, mubar);
    std::size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < t.K; ++m) {
        double v = *std::max_element(e.begin() + m * t.N, e.begin() + (m + 1) * t.N);
        if (v < best_v) {
            best_v = v;
            best = m;
        }
    }
    return best;
}

inline double me_error(const ClassTables& t, std::size_t truth, std::size_t est) {
    double v = 0.0;
    for (std::size_t i = 0; i < t.N; ++i) v = std::max(v, t.d_tv(truth, est, i));
    return v;
}

/// All-policy model estimation over precomputed tables. sim(i, rng) draws a
/// trajectory of M* under policy i; update(mu, i, traj) is the estimator.
template <class Sim, class Update>
RunLedger me_e2d_core(const ClassTables& t, std::size_t truth, std::size_t T, std::uint64_t seed, double gamma,
                      Sim&& sim, Update&& update) {
    RunLedger L;
    L.algorithm = "me_e2d";
    L.gamma = gamma;
    L.seed = seed;
    L.truth = truth;
    L.audit_scale = 6.0;
    L.audit_gamma = gamma;
    Belief mu = Belief::uniform(t.K);
    std::vector<double> acc;
    double bound_sum = 0.0;
    for (std::size_t r = 1; r <= T; ++r) {
        Rng rng = Rng::for_round(seed, r);
        auto rep = amdec_at(t, mu, gamma);
        const auto& pe = rep.witness_of("p_exp");
        const auto& mo = rep.witness_of("mu_out");
        RoundRecord row;
        row.t = r;
        row.mixtures = {{"p_exp", pe}, {"mu_out", mo}};
        row.dec_value = row.bound_value = rep.value;
        row.policy = rng.categorical(pe);
        row.traj = sim(row.policy, rng);
        row.belief = mu.weights;
        row.belief_hash = belief_hash(mu.weights);
        row.est_increment = expected_div(t.drl, t.K, t.N, truth, pe, mu.weights);
        add_to(acc, mo);
        const std::size_t est = me_output_rule(t, scaled(acc, 1.0 / static_cast<double>(r)));
        row.cum_regret = static_cast<double>(r) * me_error(t, truth, est);
        row.regret_increment = row.cum_regret - (L.rounds.empty() ? 0.0 : L.rounds.back().cum_regret);
        // The objective is not a running sum here: keep t * error exactly.
        const double cum = row.cum_regret;
        bound_sum = close_row(L, row, bound_sum);
        row.cum_regret = cum;
        row.audit_slack = L.audit_scale * (bound_sum + L.audit_gamma * row.cum_est) - cum;
        mu = update(mu, row.policy, row.traj);
        L.rounds.push_back(std::move(row));
    }
    const double Td = static_cast<double>(T);
    L.estimate = me_output_rule(t, T ? scaled(acc, 1.0 / Td) : Belief::uniform(t.K).weights);
    L.model_error = me_error(t, truth, L.estimate);
    if (T) {
        L.est_rl = L.rounds.back().cum_est;
        L.audit_lhs = L.model_error;
        L.audit_rhs = 6.0 * (bound_sum + gamma * L.est_rl) / Td;
    } else {
        L.audit_applies = false;
    }
    return L;
}

} // namespace detail

struct ModelEstimationResult {
    RunLedger ledger;
    std::size_t estimate = 0;
    Model model; ///< the output model M-hat
};

/// All-Policy Model-Estimation E2D.
inline ModelEstimationResult run_me_e2d(const RunConfig& cfg) {
    cfg.validate();
    const auto rates = cfg.rates_or(LearningRates{});
    const auto pc = cfg.policy_class();
    const auto t = build_tables(cfg.cls, pc, TableOptions{true, false, true});
    const Model& truth = cfg.cls[cfg.truth];
    auto L = detail::me_e2d_core(
        t, cfg.truth, cfg.T, cfg.seed, cfg.gamma, [&](std::size_t i, Rng& rng) { return simulate(truth, pc[i], rng); },
        [&](const Belief& mu, std::size_t i, const Trajectory& tr) { return ta_update(mu, cfg.cls, pc[i], tr, rates); });
    ModelEstimationResult res{std::move(L), 0, {}};
    res.estimate = res.ledger.estimate;
    res.model = cfg.cls[res.estimate];
    return res;
}

struct GameRunConfig {
    double gamma = 1.0;
    std::optional<LearningRates> rates;
    std::size_t T = 0;
    std::uint64_t seed = 0;
    std::size_t truth = 0;
    std::vector<TabularMG> games;
    PolicyClass policies; ///< all deterministic Markov joint policies when empty

    void validate() const {
        require(gamma > 0.0, "game run: gamma must be positive");
        require(!games.empty(), "game run: the class is empty");
        require(truth < games.size(), "game run: truth index is not in the class");
    }
};

struct GameRunResult {
    RunLedger ledger;
    std::size_t estimate = 0;
    CorrelatedPolicy policy;  ///< equilibrium of M-hat
    double gap_true = 0.0;    ///< Gap(pi-hat, M*)
    double gap_est = 0.0;     ///< Gap(pi-hat, M-hat)
    double model_error = 0.0; ///< max over deterministic pibar of d_tilde(M*, M-hat)

    double slack() const { return gap_est + 2.0 * model_error - gap_true; }
    bool audit_ok(double tol = 1e-9) const { return slack() >= -tol && ledger.audit_ok(tol); }
};

/// Model estimation over a game class with the max-over-players divergences,
/// then an equilibrium of the estimate.
inline GameRunResult run_mg_equilibrium(const GameRunConfig& cfg, EquilibriumKind kind) {
    cfg.validate();
    const auto rates = cfg.rates.value_or(LearningRates{});
    rates.validate();
    const auto pc = cfg.policies.policies.empty() ? PolicyClass::all(cfg.games.front().shape()) : cfg.policies;
    const auto t = build_mg_tables(cfg.games, pc);
    const TabularMG& truth = cfg.games[cfg.truth];
    auto L = detail::me_e2d_core(
        t, cfg.truth, cfg.T, cfg.seed, cfg.gamma,
        [&](std::size_t i, Rng& rng) { return simulate_mg(truth, pc[i], rng); },
        [&](const Belief& mu, std::size_t i, const Trajectory& tr) {
            return mg_ta_update(mu, cfg.games, pc[i], tr, rates);
        });
    L.algorithm = "mg_equilibrium";
    GameRunResult res;
    res.estimate = L.estimate;
    res.policy = solve_equilibrium(cfg.games[res.estimate], kind);
    res.gap_true = equilibrium_gap(res.policy, truth, kind);
    res.gap_est = equilibrium_gap(res.policy, cfg.games[res.estimate], kind);
    res.model_error = L.model_error;
    res.ledger = std::move(L);
    return res;
}

/// Uniform average of the per-round mixtures with the given name.
inline std::vector<double> online_to_batch(const RunLedger& L, const std::string& name = "p") {
    require(!L.rounds.empty(), "online-to-batch: the ledger has no rounds");
    std::vector<double> acc;
    for (const auto& r : L.rounds) detail::add_to(acc, r.mixture(name));
    return detail::scaled(acc, 1.0 / static_cast<double>(L.rounds.size()));
}

} // namespace dec
