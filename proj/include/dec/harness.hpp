#pragma once

#include "dec/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

#ifndef DEC_BUILD_ID
#define DEC_BUILD_ID "dev"
#endif

namespace dec::harness {

using io::json;

inline const std::vector<std::string>& generator_names() {
    static const std::vector<std::string> v{"two_bandit", "bandit",    "random_class", "random_factorized",
                                            "tree",       "class_file", "random_games", "game_file"};
    return v;
}

inline const std::vector<std::string>& algorithm_names() {
    static const std::vector<std::string> v{"e2d_ta", "explorative_e2d", "reward_free_e2d", "mops",
                                            "omle",   "me_e2d",          "mg_equilibrium"};
    return v;
}

inline bool is_game_generator(const std::string& g) { return g == "random_games" || g == "game_file"; }

struct RatesSpec {
    double eta_p = 1.0 / 3.0;
    double eta_r = 1.0 / 3.0;
    friend bool operator==(const RatesSpec&, const RatesSpec&) = default;
};

struct CoverSpec {
    std::string type; ///< "exact" or "tabular"
    double rho = 0.0;
    friend bool operator==(const CoverSpec&, const CoverSpec&) = default;
};

struct ExperimentSpec {
    std::string name;
    std::string generator;
    json params = json::object();
    std::string algorithm;
    std::size_t T = 0;
    std::size_t truth = 0;
    std::optional<RatesSpec> rates;
    double delta = 0.1;
    double beta = 0.0;
    std::optional<CoverSpec> cover;
    std::string equilibrium = "cce";
    bool hellinger_only = false;
    bool sweep_gamma = false; ///< pick one gamma from the list before running
    std::vector<std::uint64_t> seeds;
    std::vector<double> gammas;
    std::string output_dir = "results";

    friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

inline json to_json(const ExperimentSpec& s) {
    json algo{{"name", s.algorithm}, {"T", s.T},           {"truth", s.truth},
              {"delta", s.delta},    {"beta", s.beta},     {"equilibrium", s.equilibrium},
              {"hellinger_only", s.hellinger_only}, {"sweep_gamma", s.sweep_gamma}};
    if (s.rates) algo["rates"] = {{"eta_p", s.rates->eta_p}, {"eta_r", s.rates->eta_r}};
    if (s.cover) algo["cover"] = {{"type", s.cover->type}, {"rho", s.cover->rho}};
    return json{{"format_version", io::kFormatVersion},
                {"name", s.name},
                {"world", {{"generator", s.generator}, {"params", s.params}}},
                {"algorithm", algo},
                {"seeds", s.seeds},
                {"gammas", s.gammas},
                {"output_dir", s.output_dir}};
}

/// Validates against the schema; errors name the offending field path.
inline ExperimentSpec spec_from_json(const json& j, const std::string& root = "spec") {
    io::Reader r(j, root);
    io::check_version(r);
    ExperimentSpec s;
    s.name = r.get<std::string>("name");
    require(!s.name.empty() && s.name.find_first_of("/\\") == std::string::npos,
            r.where("name") + ": must be a nonempty file-name-safe string");
    auto w = r.sub("world");
    s.generator = w.get<std::string>("generator");
    const auto& gens = generator_names();
    require(std::find(gens.begin(), gens.end(), s.generator) != gens.end(),
            w.where("generator") + ": unknown generator " + s.generator);
    if (w.has("params")) {
        require(w.at("params").is_object(), w.where("params") + ": expected an object");
        s.params = w.at("params");
    }
    auto a = r.sub("algorithm");
    s.algorithm = a.get<std::string>("name");
    const auto& algs = algorithm_names();
    require(std::find(algs.begin(), algs.end(), s.algorithm) != algs.end(),
            a.where("name") + ": unknown algorithm " + s.algorithm);
    require((s.algorithm == "mg_equilibrium") == is_game_generator(s.generator),
            a.where("name") + ": mg_equilibrium runs exactly on game generators");
    s.T = a.get<std::size_t>("T");
    s.truth = a.get_or<std::size_t>("truth", 0);
    if (a.has("rates")) {
        auto rr = a.sub("rates");
        s.rates = RatesSpec{rr.get<double>("eta_p"), rr.get<double>("eta_r")};
    }
    s.delta = a.get_or<double>("delta", 0.1);
    s.beta = a.get_or<double>("beta", 0.0);
    if (a.has("cover")) {
        auto c = a.sub("cover");
        s.cover = CoverSpec{c.get<std::string>("type"), c.get_or<double>("rho", 0.0)};
        require(s.cover->type == "exact" || s.cover->type == "tabular", c.where("type") + ": expected exact or tabular");
        require(s.algorithm == "e2d_ta", a.where("cover") + ": covers apply to e2d_ta only");
        require(s.cover->type == "exact" || s.cover->rho > 0.0, c.where("rho") + ": must be positive");
    }
    s.equilibrium = a.get_or<std::string>("equilibrium", "cce");
    try {
        parse_kind(s.equilibrium);
    } catch (const ValidationError&) {
        throw ValidationError(a.where("equilibrium") + ": expected ne, ce or cce");
    }
    s.hellinger_only = a.get_or<bool>("hellinger_only", false);
    s.sweep_gamma = a.get_or<bool>("sweep_gamma", false);
    s.seeds = r.get<std::vector<std::uint64_t>>("seeds");
    require(!s.seeds.empty(), r.where("seeds") + ": at least one seed is required");
    s.gammas = r.get<std::vector<double>>("gammas");
    require(!s.gammas.empty(), r.where("gammas") + ": at least one gamma is required");
    for (double g : s.gammas) require(g > 0.0, r.where("gammas") + ": entries must be positive");
    s.output_dir = r.get_or<std::string>("output_dir", "results");
    return s;
}

/// Reads a spec file; file paths inside it are resolved against its directory.
inline ExperimentSpec load_spec(const std::string& path) {
    auto s = spec_from_json(io::read_json_file(path), path);
    if (s.generator == "class_file" || s.generator == "game_file") {
        io::Reader p(s.params, path + ".world.params");
        std::filesystem::path f = p.get<std::string>("path");
        if (f.is_relative()) f = std::filesystem::absolute(std::filesystem::path(path).parent_path() / f);
        s.params["path"] = f.lexically_normal().string();
    }
    return s;
}

inline std::string spec_hash(const ExperimentSpec& s) { return hex64(fnv1a(to_json(s).dump())); }

/// Resolved environment of an experiment.
struct World {
    ModelClass cls;
    PolicyClass policies; ///< empty means all deterministic Markov policies
    std::vector<TabularMG> games;
    std::optional<OptimisticCover> cover;

    bool is_game() const { return !games.empty(); }
    std::size_t size() const { return is_game() ? games.size() : cls.size(); }
    PolicyClass policy_class() const {
        if (!policies.policies.empty()) return policies;
        return PolicyClass::all(is_game() ? games.front().shape() : cls.shape());
    }
};

inline World resolve_world(const ExperimentSpec& s) {
    io::Reader p(s.params, "spec.world.params");
    World w;
    if (s.generator == "two_bandit") {
        w.cls = make_two_bandit();
    } else if (s.generator == "bandit") {
        w.cls = make_bandit_class(p.get<std::vector<std::vector<double>>>("means"));
    } else if (s.generator == "random_class") {
        w.cls = make_random_class(p.get<std::uint64_t>("seed"), p.get<int>("S"), p.get<int>("A"), p.get<int>("H"),
                                  p.get<int>("K"), p.get_or<double>("smoothing", 1.0));
    } else if (s.generator == "random_factorized") {
        w.cls = make_random_factorized(p.get<std::uint64_t>("seed"), p.get<int>("S"), p.get<int>("A"), p.get<int>("H"),
                                       p.get<int>("num_p"), p.get<int>("num_r"), p.get_or<double>("smoothing", 1.0));
    } else if (s.generator == "tree") {
        auto ti = make_tree_instance(p.get<int>("n"), p.get<int>("A"), p.get<int>("H"), p.get<double>("delta"));
        w.cls = ti.models;
        w.policies = ti.policies;
    } else if (s.generator == "class_file") {
        auto f = io::load_class(p.get<std::string>("path"));
        w.cls = f.cls;
        w.policies = f.policies;
    } else if (s.generator == "random_games") {
        for (auto seed : p.get<std::vector<std::uint64_t>>("seeds"))
            w.games.push_back(make_random_mg(seed, p.get<int>("S"), p.get<std::vector<int>>("action_counts"),
                                             p.get<int>("H"), p.get_or<double>("smoothing", 1.0),
                                             p.get_or<bool>("zero_sum", false)));
        require(!w.games.empty(), "spec.world.params.seeds: at least one game is required");
    } else if (s.generator == "game_file") {
        w.games = io::games_from_json(io::read_json_file(p.get<std::string>("path")), p.get<std::string>("path"));
    }
    require(s.truth < w.size(), "spec.algorithm.truth: index " + std::to_string(s.truth) + " is not in the class");
    if (s.cover) w.cover = s.cover->type == "exact" ? exact_cover(w.cls) : tabular_cover(w.cls, s.cover->rho);
    return w;
}

/// argmin over candidates of T * dec_sup(gamma) + gamma * log(|M| / delta), the
/// form of the E2D regret bound; dec_sup is the multi-start lower estimate.
inline double sweep_gamma(const ClassTables& t, const std::vector<double>& candidates, std::size_t T, double delta) {
    require(!candidates.empty(), "gamma sweep: no candidates");
    const double log_term = std::log(static_cast<double>(t.K) / delta);
    double best = candidates.front(), best_v = std::numeric_limits<double>::infinity();
    for (double g : candidates) {
        double v = static_cast<double>(T) * std::max(0.0, dec_sup_heuristic(t, g).value) + g * log_term;
        if (v < best_v) {
            best_v = v;
            best = g;
        }
    }
    return best;
}

inline std::vector<double> effective_gammas(const ExperimentSpec& s, const World& w) {
    if (!s.sweep_gamma || s.gammas.size() == 1) return s.gammas;
    const auto pc = w.policy_class();
    const auto t = w.is_game() ? build_mg_tables(w.games, pc) : build_tables(w.cls, pc);
    return {sweep_gamma(t, s.gammas, s.T, s.delta)};
}

struct CellResult {
    double gamma = 0.0;
    std::uint64_t seed = 0;
    RunLedger ledger;
    json extra = json::object(); ///< algorithm-specific outputs
    double extra_slack = std::numeric_limits<double>::infinity(); ///< game gap audit slack
};

inline RunConfig run_config(const ExperimentSpec& s, const World& w, double gamma, std::uint64_t seed) {
    RunConfig c;
    c.gamma = gamma;
    if (s.rates) c.rates = LearningRates{s.rates->eta_p, s.rates->eta_r};
    c.T = s.T;
    c.seed = seed;
    c.delta = s.delta;
    c.beta = s.beta;
    c.cls = w.cls;
    c.truth = s.truth;
    c.policies = w.policies;
    c.cover = w.cover;
    return c;
}

inline CellResult run_cell(const ExperimentSpec& s, const World& w, double gamma, std::uint64_t seed) {
    CellResult out;
    out.gamma = gamma;
    out.seed = seed;
    if (s.algorithm == "mg_equilibrium") {
        GameRunConfig g;
        g.gamma = gamma;
        if (s.rates) g.rates = LearningRates{s.rates->eta_p, s.rates->eta_r};
        g.T = s.T;
        g.seed = seed;
        g.truth = s.truth;
        g.games = w.games;
        g.policies = w.policies;
        auto r = run_mg_equilibrium(g, parse_kind(s.equilibrium));
        out.extra = {{"estimate", r.estimate},
                     {"gap_true", r.gap_true},
                     {"gap_est", r.gap_est},
                     {"model_error", r.model_error},
                     {"gap_slack", r.slack()},
                     {"policy", io::to_json(r.policy)},
                     {"gap_evaluation", "markov deviations"}};
        out.extra_slack = r.slack();
        out.ledger = std::move(r.ledger);
        return out;
    }
    auto cfg = run_config(s, w, gamma, seed);
    if (s.algorithm == "e2d_ta") {
        out.ledger = run_e2d_ta(cfg);
    } else if (s.algorithm == "explorative_e2d") {
        auto r = run_explorative_e2d(cfg, s.hellinger_only);
        out.extra = {{"p_out", r.p_out}};
        out.ledger = std::move(r.ledger);
    } else if (s.algorithm == "reward_free_e2d") {
        auto r = run_reward_free_e2d(cfg);
        out.extra = {{"p_out", r.p_out}};
        out.ledger = std::move(r.ledger);
    } else if (s.algorithm == "mops") {
        out.ledger = run_mops(cfg);
    } else if (s.algorithm == "omle") {
        out.ledger = run_omle(cfg);
    } else if (s.algorithm == "me_e2d") {
        auto r = run_me_e2d(cfg);
        out.extra = {{"estimate", r.estimate}, {"model", io::to_json(r.model)}};
        out.ledger = std::move(r.ledger);
    }
    if (!out.ledger.rounds.empty() && out.ledger.rounds.front().mixtures.front().first == "p")
        out.extra["p_batch"] = online_to_batch(out.ledger);
    return out;
}

/// DEC_WORKERS, defaulting to 1.
inline std::size_t worker_count() {
    const char* v = std::getenv("DEC_WORKERS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    require(*end == '\0' && n >= 1 && n <= 256, "DEC_WORKERS must be an integer in [1, 256]");
    return static_cast<std::size_t>(n);
}

/// Runs every (gamma, seed) cell; output order is gamma-major and independent
/// of the worker count.
inline std::vector<CellResult> run_experiment(const ExperimentSpec& s, const World& w, std::size_t workers = 0) {
    if (workers == 0) workers = worker_count();
    const auto gammas = effective_gammas(s, w);
    std::vector<std::pair<double, std::uint64_t>> cells;
    for (double g : gammas)
        for (auto seed : s.seeds) cells.emplace_back(g, seed);
    std::vector<CellResult> out(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto work = [&] {
        for (std::size_t i; (i = next++) < cells.size();) {
            try {
                out[i] = run_cell(s, w, cells[i].first, cells[i].second);
            } catch (...) {
                std::lock_guard lock(m);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < std::min(workers, cells.size()); ++k) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

inline std::string cell_stem(const ExperimentSpec& s, const CellResult& c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "__g%g__s%llu", c.gamma, static_cast<unsigned long long>(c.seed));
    return s.name + buf;
}

inline json provenance(const ExperimentSpec& s, const CellResult& c) {
    return json{{"spec_hash", spec_hash(s)}, {"seed", c.seed}, {"gamma", c.gamma}, {"build_id", DEC_BUILD_ID}};
}

inline constexpr double kSlackTol = 1e-9;

/// Refuses a ledger with a row slack below -kSlackTol.
inline void check_rows(const RunLedger& L, const std::string& what) {
    for (const auto& r : L.rounds)
        if (r.audit_slack < -kSlackTol)
            throw AuditViolation(what + ": round " + std::to_string(r.t) + " has audit slack " + fmt17(r.audit_slack));
}

struct WrittenCell {
    std::string csv, summary, ledger;
};

/// Per cell: <stem>.csv, <stem>.summary.json and <stem>.ledger.json (the full
/// ledger with its spec, used by the audit).
inline std::vector<WrittenCell> write_results(const ExperimentSpec& s, const std::vector<CellResult>& cells,
                                              const std::string& dir) {
    for (const auto& c : cells) check_rows(c.ledger, cell_stem(s, c));
    std::filesystem::create_directories(dir);
    std::vector<WrittenCell> files;
    for (const auto& c : cells) {
        const auto base = (std::filesystem::path(dir) / cell_stem(s, c)).string();
        WrittenCell f{base + ".csv", base + ".summary.json", base + ".ledger.json"};
        io::write_text_file(f.csv, io::ledger_csv(c.ledger));
        json summary{{"format_version", io::kFormatVersion},
                     {"kind", "run_summary"},
                     {"name", s.name},
                     {"algorithm", c.ledger.algorithm},
                     {"terminal", io::terminal_json(c.ledger)},
                     {"extra", c.extra},
                     {"provenance", provenance(s, c)}};
        io::write_text_file(f.summary, summary.dump(2) + "\n");
        json full = io::to_json(c.ledger);
        full["spec"] = to_json(s);
        full["provenance"] = provenance(s, c);
        full["extra"] = c.extra;
        io::write_text_file(f.ledger, full.dump() + "\n");
        files.push_back(f);
    }
    return files;
}

struct AuditReport {
    std::vector<std::string> violations;
    std::size_t rows = 0;
    double min_slack = 0.0;
    double max_recompute_error = 0.0; ///< stored vs recomputed per-round values
    bool recomputed = false;

    bool ok() const { return violations.empty(); }
};

namespace detail {

inline void note(AuditReport& a, const std::string& what, double stored, double fresh, double tol) {
    const double err = std::abs(stored - fresh);
    a.max_recompute_error = std::max(a.max_recompute_error, err);
    if (!(err <= tol)) a.violations.push_back(what + ": stored " + fmt17(stored) + ", recomputed " + fmt17(fresh));
}

inline double mixture_regret(const ClassTables& t, std::size_t truth, const std::vector<double>& p) {
    double r = 0.0;
    for (std::size_t i = 0; i < t.N; ++i) r += p[i] * t.subopt(truth, i);
    return r;
}

/// Recomputes dec_value (and the regret increment where it is a mixture
/// expectation) at every stored belief.
inline void recompute(AuditReport& a, const RunLedger& L, const ExperimentSpec& s, const World& w, double tol) {
    const auto pc = w.policy_class();
    const auto& alg = L.algorithm;
    const std::size_t truth = L.truth;
    auto belief_of = [&](const RoundRecord& r, std::size_t n) {
        Belief b{r.belief};
        require(b.weights.size() == n, "round " + std::to_string(r.t) + ": belief has the wrong size");
        return b;
    };
    if (alg == "reward_free_e2d") {
        const auto ft = build_factorized_tables(w.cls, pc);
        for (const auto& r : L.rounds)
            note(a, "round " + std::to_string(r.t) + " rfdec", r.dec_value,
                 rfdec_at(ft, belief_of(r, ft.num_p), L.gamma).value, tol);
        return;
    }
    if (alg == "mg_equilibrium") {
        const auto t = build_mg_tables(w.games, pc);
        for (const auto& r : L.rounds)
            note(a, "round " + std::to_string(r.t) + " amdec", r.dec_value, amdec_at(t, belief_of(r, t.K), L.gamma).value,
                 tol);
        return;
    }
    std::vector<Model> all = w.cls.models();
    const std::size_t K = w.cls.size();
    if (alg == "e2d_ta" && w.cover)
        for (const auto& m : w.cover->representatives.models()) all.push_back(m);
    TableOptions opt;
    if (alg == "explorative_e2d" && s.hellinger_only) {
        opt.drl = false;
        opt.dh = true;
    }
    if (alg == "me_e2d") opt = TableOptions{true, false, true};
    const auto t = build_tables(ModelClass(all), pc, opt);
    for (const auto& r : L.rounds) {
        const std::string row = "round " + std::to_string(r.t);
        if (alg == "e2d_ta") {
            Belief ref = belief_of(r, w.cover ? w.cover->size() : K);
            if (w.cover) {
                ref.weights.assign(t.K, 0.0);
                std::copy(r.belief.begin(), r.belief.end(), ref.weights.begin() + K);
            }
            note(a, row + " dec", r.dec_value, dec_at(t, ref, L.gamma, w.cover ? K : 0).value, tol);
            note(a, row + " regret", r.regret_increment, mixture_regret(t, truth, r.mixture("p")), tol);
        } else if (alg == "mops") {
            note(a, row + " dec", r.dec_value, dec_at(t, belief_of(r, K), L.gamma).value, tol);
            note(a, row + " regret", r.regret_increment, mixture_regret(t, truth, r.mixture("p")), tol);
        } else if (alg == "explorative_e2d") {
            note(a, row + " edec", r.dec_value, edec_at(t, belief_of(r, K), L.gamma, s.hellinger_only).value, tol);
            note(a, row + " regret", r.regret_increment, mixture_regret(t, truth, r.mixture("p_out")), tol);
        } else if (alg == "me_e2d") {
            note(a, row + " amdec", r.dec_value, amdec_at(t, belief_of(r, K), L.gamma).value, tol);
        } else if (alg == "omle") {
            const auto& b = belief_of(r, K).weights;
            std::size_t pick = K;
            for (std::size_t m = 0; m < K; ++m)
                if (b[m] > 0.0 && (pick == K || t.opt_value[m] > t.opt_value[pick])) pick = m;
            require(pick < K, row + ": empty confidence set");
            note(a, row + " optimism", r.dec_value, t.opt_value[pick] - t.f(truth, r.policy), tol);
            note(a, row + " regret", r.regret_increment, t.subopt(truth, r.policy), tol);
        }
    }
}

} // namespace detail

/// Re-verifies a stored ledger: running sums, row slacks, the terminal
/// inequality and, given its world, the per-round values at the stored beliefs.
inline AuditReport audit_ledger(const RunLedger& L, const ExperimentSpec* spec = nullptr, const World* world = nullptr,
                                double tol = 1e-9) {
    AuditReport a;
    a.rows = L.rounds.size();
    a.min_slack = L.min_slack();
    double bound = 0.0, est = 0.0, reg = 0.0;
    for (const auto& r : L.rounds) {
        const std::string row = "round " + std::to_string(r.t);
        bound += r.bound_value;
        est += r.est_increment;
        reg += r.regret_increment;
        detail::note(a, row + " cum_est", r.cum_est, est, tol);
        detail::note(a, row + " cum_regret", r.cum_regret, reg, tol);
        detail::note(a, row + " slack", r.audit_slack, L.audit_scale * (bound + L.audit_gamma * r.cum_est) - r.cum_regret,
                     tol);
        if (r.audit_slack < -tol) a.violations.push_back(row + ": negative audit slack " + fmt17(r.audit_slack));
        if (r.belief_hash != dec::detail::belief_hash(r.belief)) a.violations.push_back(row + ": belief hash mismatch");
    }
    if (L.audit_applies && L.terminal_slack() < -tol)
        a.violations.push_back("terminal inequality fails: lhs " + fmt17(L.audit_lhs) + " > rhs " + fmt17(L.audit_rhs));
    if (spec && world) {
        detail::recompute(a, L, *spec, *world, tol);
        a.recomputed = true;
    }
    return a;
}

/// Audits a ledger file written by write_results.
inline AuditReport audit_file(const std::string& path, bool recompute = true) {
    auto j = io::read_json_file(path);
    auto L = io::ledger_from_json(j, path);
    if (!recompute || !j.contains("spec")) return audit_ledger(L);
    auto s = spec_from_json(j.at("spec"), path + ".spec");
    auto w = resolve_world(s);
    auto a = audit_ledger(L, &s, &w);
    if (j.contains("extra") && j["extra"].contains("gap_slack")) {
        double g = j["extra"]["gap_slack"].get<double>();
        if (g < -kSlackTol) a.violations.push_back("equilibrium gap audit fails with slack " + fmt17(g));
    }
    return a;
}

/// Mean, min and max of cum_regret per round over ledgers of equal length.
inline std::string regret_curve_csv(const std::vector<RunLedger>& runs) {
    std::string out = "t,mean_cum_regret,min_cum_regret,max_cum_regret,runs\n";
    if (runs.empty()) return out;
    const std::size_t T = runs.front().rounds.size();
    for (const auto& L : runs) require(L.rounds.size() == T, "plot data: ledgers have different lengths");
    for (std::size_t k = 0; k < T; ++k) {
        double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& L : runs) {
            double v = L.rounds[k].cum_regret;
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out += std::to_string(k + 1) + "," + fmt17(sum / runs.size()) + "," + fmt17(lo) + "," + fmt17(hi) + "," +
               std::to_string(runs.size()) + "\n";
    }
    return out;
}

/// One row per (run, round) with the per-round complexity and bound term.
inline std::string dec_per_round_csv(const std::vector<RunLedger>& runs) {
    std::string out = "run,seed,gamma,t,dec_value,bound_value,audit_slack\n";
    for (std::size_t k = 0; k < runs.size(); ++k)
        for (const auto& r : runs[k].rounds)
            out += std::to_string(k) + "," + std::to_string(runs[k].seed) + "," + fmt17(runs[k].gamma) + "," +
                   std::to_string(r.t) + "," + fmt17(r.dec_value) + "," + fmt17(r.bound_value) + "," +
                   fmt17(r.audit_slack) + "\n";
    return out;
}

} // namespace dec::harness
