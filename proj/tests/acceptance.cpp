// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include "dec/bellman.hpp"
#include "dec/harness.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace dec;

namespace {

constexpr double kOracleTol = 1e-12;
constexpr double kIneqTol = 1e-10;
constexpr double kWorkedTol = 1e-8;
constexpr double kRelationTol = 1e-7;
constexpr double kTreeTol = 1e-7;
constexpr double kPathTol = 1e-9;
constexpr double kEstFraction = 0.15;
constexpr double kContainFraction = 0.85;
constexpr double kOmleFraction = 0.85;
constexpr double kBridgeTol = 1e-9;
constexpr double kDcTol = 1e-9;
constexpr double kGapTol = 1e-7;
constexpr double kDelta = 0.1;

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Policy random_policy(const Shape& sh, Rng& rng) {
    Policy p;
    for (int k = 0; k < sh.S * sh.H; ++k) p.actions.push_back(static_cast<int>(rng.below(sh.A)));
    return p;
}

Belief random_belief(std::size_t n, Rng& rng) { return Belief{rng.dirichlet(n, 1.0)}; }

// The 3-model (S=2, A=2, H=2) class shared by several criteria.
ModelClass three_model_class() { return make_random_class(2024, 2, 2, 2, 3, 1.0); }

Outcome c1_divergence_oracle() {
    Rng rng(1);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        auto cls = make_random_class(10'000 + k, 2, 2, 3, 2, 0.6);
        auto pi = random_policy(cls.shape(), rng);
        worst = std::max(worst, std::abs(d_rl_sq(cls[0], cls[1], pi) - oracle::drl(cls[0], cls[1], pi)));
    }
    return {worst <= kOracleTol, "max |dp - enumeration| = " + num(worst)};
}

Outcome c2_divergence_inequalities() {
    Rng rng(2);
    double worst_sym = kNegInf, worst_val = kNegInf;
    for (int k = 0; k < 500; ++k) {
        const int H = 1 + k % 3;
        auto cls = make_random_class(20'000 + k, 2, 2, H, 2, 0.3 + 0.1 * (k % 5));
        auto pi = random_policy(cls.shape(), rng);
        const Model &m = cls[0], &mb = cls[1];
        // Negative values are violations.
        double fwd = d_rl_sq(m, mb, pi);
        worst_sym = std::max(worst_sym, d_rl_sq(mb, m, pi) - 5.0 * fwd);
        double dv = std::abs(policy_value(m, pi) - policy_value(mb, pi));
        worst_val = std::max(worst_val, dv - std::sqrt(H + 1.0) * std::sqrt(fwd));
    }
    bool ok = -worst_sym >= -kIneqTol && -worst_val >= -kIneqTol;
    return {ok, "min slack symmetry = " + num(-worst_sym) + ", value = " + num(-worst_val)};
}

Outcome c3_worked_dec() {
    auto cls = make_two_bandit();
    auto t = build_tables(cls, PolicyClass::all(cls.shape()));
    double worst_dec = 0.0, worst_edec = 0.0;
    for (double g : {0.5, 1.0, 2.0, 4.0}) {
        worst_dec = std::max(worst_dec, std::abs(dec_at(t, Belief::point(2, 0), g).value - 0.25 / (1.0 + g)));
        worst_edec = std::max(worst_edec, std::abs(edec_at(t, Belief::point(2, 0), g).value));
    }
    return {worst_dec <= kWorkedTol && worst_edec <= kWorkedTol,
            "max dec error = " + num(worst_dec) + ", max |edec| = " + num(worst_edec)};
}

PolicyClass random_subclass(const Shape& sh, std::size_t n, Rng& rng) {
    auto all = PolicyClass::all(sh);
    if (all.size() <= n) return all;
    PolicyClass pc{sh, {}};
    std::vector<std::size_t> idx(all.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + rng.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
        pc.policies.push_back(all[idx[i]]);
    }
    return pc;
}

Outcome c4_relation_suite() {
    Rng rng(4);
    const Shape shapes[] = {{1, 2, 3}, {2, 2, 1}, {2, 2, 2}, {1, 3, 2}, {2, 2, 3}};
    const double gammas[] = {0.5, 1, 2, 4, 8};
    double worst = kNegInf;
    std::string where;
    std::size_t checks = 0;
    auto track = [&](double violation, const std::string& what) {
        ++checks;
        if (violation > worst) {
            worst = violation;
            where = what;
        }
    };
    for (int k = 0; k < 50; ++k) {
        const Shape sh = shapes[k % 5];
        const int K = 2 + k % 4;
        auto cls = make_random_class(40'000 + k, sh.S, sh.A, sh.H, K, 0.5 + 0.1 * (k % 3));
        auto pc = random_subclass(sh, 8, rng);
        auto t = build_tables(cls, pc);
        auto mu = random_belief(K, rng);
        // Reward-free side: a P x R class with |P| * |R| <= 5.
        const int np = 1 + k % 2, nr = 2;
        auto fac = make_random_factorized(41'000 + k, sh.S, sh.A, sh.H, np, nr, 0.6);
        auto ft = build_factorized_tables(fac, pc);
        auto tp = build_tables(fac.transition_class(), pc, TableOptions{true, false, true});
        auto muP = random_belief(np, rng);
        for (double g : gammas) {
            const std::string tag = "class " + std::to_string(k) + " gamma " + num(g);
            double d = dec_at(t, mu, g).value;
            track(edec_at(t, mu, g).value - d, tag + " edec<=dec");
            for (int a10 = 1; a10 <= 9; ++a10) {
                double a = a10 / 10.0;
                track(d - (a + (1 - a) * edec_at(t, mu, g * a / (1 - a)).value), tag + " converse");
            }
            track(d - dec_mixture_at(cls, pc, mu, g).value, tag + " mixture");
            double rf = rfdec_at(ft, muP, g).value;
            track(rf - 2.0 * rrec_at(ft, muP, g / 2).value, tag + " rfdec<=2rrec");
            track(rf - 2.0 * amdec_at(tp, muP, g / 2).value, tag + " rfdec<=2amdec");
        }
    }
    return {-worst >= -kRelationTol,
            std::to_string(checks) + " checks, min slack = " + num(-worst) + " (at " + where + ")"};
}

Outcome c5_tree_lower_bound() {
    double worst = std::numeric_limits<double>::infinity();
    for (double delta : {0.1, 0.2, 1.0 / 3}) {
        auto inst = make_tree_instance(1, 2, 4, delta);
        auto t = build_tables(inst.models, inst.policies);
        for (double g : {1.0, 5.0, 20.0}) {
            double e = edec_at(t, Belief::point(inst.models.size(), inst.reference), g).value;
            worst = std::min(worst, e - inst.edec_lower_bound(g));
        }
    }
    return {worst >= -kTreeTol, "min slack = " + num(worst)};
}

struct AuditClass {
    std::string name;
    ModelClass cls;
    PolicyClass policies;
};

std::vector<AuditClass> audit_classes(bool with_tree) {
    std::vector<AuditClass> v{{"two_bandit", make_two_bandit(), {}}, {"three_model", three_model_class(), {}}};
    if (with_tree) {
        auto ti = make_tree_instance(1, 2, 4, 1.0 / 3);
        v.push_back({"tree", ti.models, ti.policies});
    }
    return v;
}

RunConfig config(const AuditClass& c, std::size_t truth, std::size_t T, double gamma, std::uint64_t seed) {
    RunConfig cfg;
    cfg.cls = c.cls;
    cfg.policies = c.policies;
    cfg.truth = truth;
    cfg.T = T;
    cfg.gamma = gamma;
    cfg.seed = seed;
    cfg.delta = kDelta;
    return cfg;
}

double swept_gamma(const ModelClass& cls, std::size_t T) {
    auto t = build_tables(cls, PolicyClass::all(cls.shape()));
    return harness::sweep_gamma(t, {0.5, 1, 2, 4, 8}, T, kDelta);
}

Outcome c6_e2d_statistical() {
    Outcome o;
    for (const auto& c : audit_classes(false)) {
        const double g = swept_gamma(c.cls, 500);
        const double thr = 10.0 * std::log(c.cls.size() / kDelta);
        int over = 0, fails = 0;
        double min_slack = std::numeric_limits<double>::infinity();
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            auto L = run_e2d_ta(config(c, seed % c.cls.size(), 500, g, seed));
            min_slack = std::min({min_slack, L.min_slack(), L.terminal_slack()});
            fails += !L.audit_ok(kPathTol);
            over += L.est_rl > thr;
        }
        const double frac = over / 200.0;
        o.pass = o.pass && fails == 0 && frac <= kEstFraction;
        o.detail += c.name + ": gamma=" + num(g) + " path-wise failures=" + std::to_string(fails) +
                    " min slack=" + num(min_slack) + " Est>thr fraction=" + num(frac) + "; ";
    }
    return o;
}

ModelClass as_factorized(const ModelClass& cls) {
    if (cls.is_factorized()) return cls;
    std::vector<std::vector<double>> rs;
    for (const auto& m : cls.models())
        if (std::find(rs.begin(), rs.end(), m.rewards()) == rs.end()) rs.push_back(m.rewards());
    std::vector<Model> ps;
    for (const auto& m : cls.models()) {
        bool seen = false;
        for (const auto& p : ps) seen = seen || (p.transitions() == m.transitions() && p.initial() == m.initial());
        if (!seen) ps.push_back(m);
    }
    return ModelClass::factorized(ps, rs);
}

Outcome c7_explorative_reward_free() {
    Outcome o;
    for (const auto& c : audit_classes(true)) {
        const std::size_t T = c.name == "tree" ? 60 : 200;
        int ex_fail = 0, rf_fail = 0;
        double ex_min = std::numeric_limits<double>::infinity(), rf_min = ex_min;
        AuditClass rf{c.name, as_factorized(c.cls), c.policies};
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto e = run_explorative_e2d(config(c, seed % c.cls.size(), T, 1.0, seed)).ledger;
            ex_fail += !e.audit_ok(kPathTol);
            ex_min = std::min({ex_min, e.min_slack(), e.terminal_slack()});
            auto r = run_reward_free_e2d(config(rf, seed % rf.cls.size(), T, 1.0, seed)).ledger;
            rf_fail += !r.audit_ok(kPathTol);
            rf_min = std::min({rf_min, r.min_slack(), r.terminal_slack()});
        }
        o.pass = o.pass && ex_fail == 0 && rf_fail == 0;
        o.detail += c.name + ": explorative failures=" + std::to_string(ex_fail) + " (min slack " + num(ex_min) +
                    "), reward-free |M|=" + std::to_string(rf.cls.size()) + " failures=" + std::to_string(rf_fail) +
                    " (min slack " + num(rf_min) + "); ";
    }
    return o;
}

Outcome c8_omle() {
    AuditClass c{"three_model", three_model_class(), {}};
    const double beta = 3.0 * std::log(c.cls.size() / kDelta);
    int contained = 0, path_fail = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto cfg = config(c, seed % 3, 100, 1.0, seed);
        cfg.beta = beta;
        auto L = run_omle(cfg);
        contained += L.contained;
        path_fail += L.contained && !L.audit_ok(kPathTol);
    }
    auto t = build_tables(c.cls, PolicyClass::all(c.cls.shape()));
    std::string thm;
    bool thm_ok = true;
    for (double g : {1.0, 4.0}) {
        int hold = 0;
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            auto cfg = config(c, seed % 3, 6, g, seed);
            cfg.beta = beta;
            auto L = run_omle(cfg);
            double bound = 6.0 * mlec_at(t, cfg.truth, g, 6, MlecMode::BruteForce).value + 4.0 * g * beta;
            hold += L.reg_dm <= bound + kPathTol;
        }
        thm_ok = thm_ok && hold / 200.0 >= kOmleFraction;
        thm += " gamma=" + num(g) + " holds " + std::to_string(hold) + "/200";
    }
    const double frac = contained / 200.0;
    return {frac >= kContainFraction && path_fail == 0 && thm_ok,
            "containment " + num(frac) + ", optimism path-wise failures=" + std::to_string(path_fail) + ";" + thm};
}

Outcome c9_psc_bridge() {
    Rng rng(9);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 20; ++k) {
        auto cls = make_random_class(90'000 + k, 2, 2, 2, 3, 0.6);
        auto t = build_tables(cls, PolicyClass::all(cls.shape()));
        for (double g : {3.0, 6.0, 12.0}) {
            double rhs = kNegInf;
            for (std::size_t ref = 0; ref < 3; ++ref) {
                auto p = psc_at(t, ref, g / 6, GridMode{0.005});
                rhs = std::max(rhs, p.value + p.error_bound);
            }
            rhs += 2.0 * (cls.shape().H + 1) / g;
            double lhs = dec_sup_heuristic(t, g, {random_belief(3, rng), random_belief(3, rng)}).value;
            worst = std::min(worst, rhs - lhs);
        }
    }
    return {worst >= -kBridgeTol, "min slack = " + num(worst)};
}

FunctionClassTable linear_table(std::size_t r, std::size_t c, int d, Rng& rng) {
    std::vector<std::vector<double>> th(r, std::vector<double>(d)), ph(c, std::vector<double>(d));
    for (auto& v : th)
        for (auto& x : v) x = rng.uniform(-1, 1) / std::sqrt(d);
    for (auto& v : ph)
        for (auto& x : v) x = rng.uniform(-1, 1) / std::sqrt(d);
    FunctionClassTable t(r, c);
    for (std::size_t f = 0; f < r; ++f)
        for (std::size_t x = 0; x < c; ++x)
            for (int j = 0; j < d; ++j) t(f, x) += th[f][j] * ph[x][j];
    return t;
}

Outcome c10_complexity_oracles() {
    bool exact = true;
    for (std::size_t n = 1; n <= 8; ++n) {
        FunctionClassTable ind(n, n);
        for (std::size_t i = 0; i < n; ++i) ind(i, i) = 1.0;
        exact = exact && eluder_dim(ind, 0.5) == n && star_number(ind, 0.5) == n;
    }
    Rng rng(10);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 50; ++k) {
        const int d = 1 + k % 3;
        const double g = 0.5 * (1 << (k % 4));
        FunctionClassTable t;
        ComplexityReport r;
        if (k % 2) {
            t = linear_table(2, 3, d, rng);
            r = dc_estimate(t, g, GridMode{0.05});
        } else {
            t = linear_table(4, 5, d, rng);
            r = dc_estimate(t, g, MultiStartMode{16, 400, static_cast<std::uint64_t>(k)});
        }
        worst = std::min(worst, d / (4.0 * g) - r.value);
    }
    return {exact && worst >= -kDcTol,
            std::string("indicator classes ") + (exact ? "exact" : "WRONG") + ", dc min slack = " + num(worst)};
}

Outcome c11_estimation_and_games() {
    AuditClass c{"three_model", three_model_class(), {}};
    int me_fail = 0;
    double me_min = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto r = run_me_e2d(config(c, seed % 3, 100, 1.0, seed));
        me_fail += !r.ledger.audit_ok(kPathTol);
        me_min = std::min({me_min, r.ledger.min_slack(), r.ledger.terminal_slack()});
    }
    GameRunConfig g;
    g.games = {make_random_mg(11, 2, {2, 2}, 2, 0.6), make_random_mg(12, 2, {2, 2}, 2, 0.6),
               make_random_mg(13, 2, {2, 2}, 2, 0.6)};
    g.T = 30;
    int mg_fail = 0;
    double mg_min = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        g.seed = seed;
        g.truth = seed % 3;
        auto r = run_mg_equilibrium(g, EquilibriumKind::CCE);
        mg_fail += !r.audit_ok(kPathTol);
        mg_min = std::min(mg_min, r.slack());
    }
    double own = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto zs = make_random_mg(500 + s, 2, {2, 3}, 3, 0.5, true);
        own = std::max(own, equilibrium_gap(solve_equilibrium(zs, EquilibriumKind::NE2pZeroSum), zs,
                                            EquilibriumKind::NE2pZeroSum));
        auto gs = make_random_mg(600 + s, 2, s % 2 ? std::vector<int>{2, 2, 2} : std::vector<int>{3, 2}, 2, 0.5);
        for (auto k : {EquilibriumKind::CE, EquilibriumKind::CCE})
            own = std::max(own, equilibrium_gap(solve_equilibrium(gs, k), gs, k));
    }
    return {me_fail == 0 && mg_fail == 0 && own <= kGapTol,
            "model estimation failures=" + std::to_string(me_fail) + " (min slack " + num(me_min) +
                "), game audit failures=" + std::to_string(mg_fail) + " (min slack " + num(mg_min) +
                "), max own-output gap=" + num(own)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome c12_determinism() {
    auto j = harness::json::parse(R"({
        "format_version": 1, "name": "determinism",
        "world": {"generator": "random_class", "params": {"seed": 2024, "S": 2, "A": 2, "H": 2, "K": 3}},
        "algorithm": {"name": "e2d_ta", "T": 500, "truth": 1},
        "seeds": [7, 8], "gammas": [1.0]
    })");
    auto s = harness::spec_from_json(j);
    auto w = harness::resolve_world(s);
    const auto root = std::filesystem::temp_directory_path() / "dec_acceptance_determinism";
    std::filesystem::remove_all(root);
    auto a = harness::write_results(s, harness::run_experiment(s, w, 1), (root / "a").string());
    auto b = harness::write_results(s, harness::run_experiment(s, w, 2), (root / "b").string());
    bool same = a.size() == b.size();
    for (std::size_t k = 0; same && k < a.size(); ++k) {
        auto x = slurp(a[k].csv), y = slurp(b[k].csv);
        same = !x.empty() && x == y && slurp(a[k].ledger) == slurp(b[k].ledger);
    }
    std::filesystem::remove_all(root);
    return {same, same ? "ledger CSV and JSON byte-identical across repeats" : "ledgers differ"};
}

struct Criterion {
    const char* id;
    const char* name;
    double limit_seconds; ///< 0 means no runtime limit
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> all{
        {"C1", "divergence oracle equivalence", 5.0, c1_divergence_oracle},
        {"C2", "divergence inequalities", 0.0, c2_divergence_inequalities},
        {"C3", "worked DEC values", 0.0, c3_worked_dec},
        {"C4", "DEC relationship suite", 60.0, c4_relation_suite},
        {"C5", "hard-instance EDEC lower bound", 0.0, c5_tree_lower_bound},
        {"C6", "E2D-TA statistical audit", 180.0, c6_e2d_statistical},
        {"C7", "explorative and reward-free audits", 0.0, c7_explorative_reward_free},
        {"C8", "OMLE containment and bound", 0.0, c8_omle},
        {"C9", "PSC bridge", 0.0, c9_psc_bridge},
        {"C10", "complexity oracles", 0.0, c10_complexity_oracles},
        {"C11", "model estimation and games", 0.0, c11_estimation_and_games},
        {"C12", "determinism", 0.0, c12_determinism},
    };
    int failed = 0;
    for (const auto& c : all) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
            o.pass = false;
            o.detail += " runtime limit " + num(c.limit_seconds) + " s exceeded";
        }
        failed += !o.pass;
        std::printf("%s %s %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed ? 1 : 0;
}
