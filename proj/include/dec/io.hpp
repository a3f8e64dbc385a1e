#pragma once

#include "dec/loops.hpp"

#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dec::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Field lookup that reports the full path of a missing or mistyped entry.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        require(j_.is_object(), path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    const json& at(const std::string& key) const {
        require(j_.contains(key), where(key) + ": required field missing");
        return j_.at(key);
    }
    Reader sub(const std::string& key) const { return Reader(at(key), where(key)); }
    std::string where(const std::string& key) const { return path_ + "." + key; }
    const std::string& path() const { return path_; }
    const json& raw() const { return j_; }

    template <class T>
    T get(const std::string& key) const {
        try {
            return at(key).get<T>();
        } catch (const json::exception&) {
            throw ValidationError(where(key) + ": wrong type");
        }
    }
    template <class T>
    T get_or(const std::string& key, T fallback) const {
        return has(key) ? get<T>(key) : fallback;
    }

private:
    const json& j_;
    std::string path_;
};

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write " + path);
    out << text;
}

inline void check_version(const Reader& r) {
    int v = r.get_or<int>("format_version", kFormatVersion);
    require(v == kFormatVersion, r.where("format_version") + ": unsupported version " + std::to_string(v));
}

// Models and classes.

inline const char* channel_name(RewardChannel c) {
    return c == RewardChannel::BernoulliScaled ? "bernoulli" : "deterministic";
}

inline RewardChannel parse_channel(const std::string& s, const std::string& where) {
    if (s == "deterministic") return RewardChannel::DeterministicMean;
    if (s == "bernoulli") return RewardChannel::BernoulliScaled;
    throw ValidationError(where + ": unknown reward channel " + s);
}

inline json to_json(const Model& m) {
    return json{{"S", m.shape().S},           {"A", m.shape().A},
                {"H", m.shape().H},           {"initial", m.initial()},
                {"transitions", m.transitions()}, {"rewards", m.rewards()},
                {"channel", channel_name(m.channel())}};
}

inline Model model_from_json(const Reader& r) {
    Shape sh{r.get<int>("S"), r.get<int>("A"), r.get<int>("H")};
    auto channel = parse_channel(r.get_or<std::string>("channel", "deterministic"), r.where("channel"));
    try {
        return Model(sh, r.get<std::vector<double>>("initial"), r.get_or<std::vector<double>>("transitions", {}),
                     r.get<std::vector<double>>("rewards"), channel);
    } catch (const ValidationError& e) {
        throw ValidationError(r.path() + ": " + e.what());
    }
}

inline json to_json(const PolicyClass& pc) {
    json a = json::array();
    for (const auto& p : pc.policies) a.push_back(p.actions);
    return a;
}

inline PolicyClass policies_from_json(const json& j, const Shape& sh, const std::string& where) {
    require(j.is_array(), where + ": expected an array of action tables");
    PolicyClass pc{sh, {}};
    for (const auto& row : j) pc.policies.push_back(Policy{row.get<std::vector<int>>()});
    try {
        pc.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
    }
    return pc;
}

/// A class file: models, an optional P x R factorization and an optional policy class.
struct ClassFile {
    ModelClass cls;
    PolicyClass policies; ///< empty means all deterministic Markov policies
};

inline json to_json(const ModelClass& cls, const PolicyClass& policies = {}) {
    json j{{"format_version", kFormatVersion}, {"kind", "model_class"}};
    json ms = json::array();
    for (const auto& m : cls.models()) ms.push_back(to_json(m));
    j["models"] = ms;
    if (cls.is_factorized())
        j["factorization"] = {{"num_p", cls.factorization().num_p}, {"num_r", cls.factorization().num_r}};
    if (!policies.policies.empty()) j["policies"] = to_json(policies);
    return j;
}

inline ClassFile class_from_json(const json& j, const std::string& root = "class") {
    Reader r(j, root);
    check_version(r);
    const auto& arr = r.at("models");
    require(arr.is_array() && !arr.empty(), r.where("models") + ": expected a nonempty array");
    std::vector<Model> ms;
    for (std::size_t k = 0; k < arr.size(); ++k)
        ms.push_back(model_from_json(Reader(arr[k], r.where("models") + "[" + std::to_string(k) + "]")));
    std::optional<ModelClass::Factorization> fac;
    if (r.has("factorization")) {
        auto f = r.sub("factorization");
        fac = ModelClass::Factorization{f.get<std::size_t>("num_p"), f.get<std::size_t>("num_r")};
    }
    ClassFile out{ModelClass(std::move(ms), fac), {}};
    if (r.has("policies")) out.policies = policies_from_json(r.at("policies"), out.cls.shape(), r.where("policies"));
    return out;
}

inline ClassFile load_class(const std::string& path) { return class_from_json(read_json_file(path), path); }

// Markov games.

inline json to_json(const TabularMG& mg) {
    json rs = json::array();
    for (int i = 0; i < mg.num_players(); ++i) rs.push_back(mg.player(i).rewards());
    const auto& m = mg.player(0);
    return json{{"format_version", kFormatVersion},
                {"kind", "markov_game"},
                {"action_counts", mg.action_counts()},
                {"S", m.shape().S},
                {"H", m.shape().H},
                {"initial", m.initial()},
                {"transitions", m.transitions()},
                {"rewards", rs}};
}

inline TabularMG game_from_json(const json& j, const std::string& root = "game") {
    Reader r(j, root);
    check_version(r);
    try {
        return TabularMG(r.get<std::vector<int>>("action_counts"), r.get<int>("S"), r.get<int>("H"),
                         r.get<std::vector<double>>("initial"), r.get_or<std::vector<double>>("transitions", {}),
                         r.get<std::vector<std::vector<double>>>("rewards"));
    } catch (const ValidationError& e) {
        throw ValidationError(root + ": " + e.what());
    }
}

/// A single game, or {"games": [...]} for a game class.
inline std::vector<TabularMG> games_from_json(const json& j, const std::string& root = "games") {
    Reader r(j, root);
    if (!r.has("games")) return {game_from_json(j, root)};
    std::vector<TabularMG> out;
    const auto& arr = r.at("games");
    for (std::size_t k = 0; k < arr.size(); ++k)
        out.push_back(game_from_json(arr[k], r.where("games") + "[" + std::to_string(k) + "]"));
    require(!out.empty(), r.where("games") + ": empty");
    return out;
}

inline json to_json(const CorrelatedPolicy& pi) {
    return json{{"S", pi.shape.S}, {"A", pi.shape.A}, {"H", pi.shape.H}, {"probs", pi.probs}};
}

// Covers.

inline json to_json(const OptimisticCover& c) {
    json j{{"format_version", kFormatVersion}, {"kind", "optimistic_cover"}};
    j["representatives"] = to_json(c.representatives)["models"];
    j["optimistic_initial"] = c.optimistic_initial;
    j["optimistic_transitions"] = c.optimistic_transitions;
    j["rho"] = c.rho;
    j["grid_step"] = c.grid_step;
    j["assignment"] = c.assignment;
    j["covers"] = c.covers;
    j["grid_cells"] = c.grid_cells;
    j["log_full_grid"] = c.log_full_grid;
    return j;
}

inline OptimisticCover cover_from_json(const json& j, const std::string& root = "cover") {
    Reader r(j, root);
    check_version(r);
    OptimisticCover c;
    json models{{"models", r.at("representatives")}};
    c.representatives = class_from_json(models, root).cls;
    c.optimistic_initial = r.get<std::vector<std::vector<double>>>("optimistic_initial");
    c.optimistic_transitions = r.get<std::vector<std::vector<double>>>("optimistic_transitions");
    c.rho = r.get<double>("rho");
    c.grid_step = r.get_or<double>("grid_step", 0.0);
    c.assignment = r.get_or<std::vector<std::size_t>>("assignment", {});
    c.covers = r.get_or<std::vector<std::vector<std::size_t>>>("covers", {});
    c.grid_cells = r.get_or<std::size_t>("grid_cells", 0);
    c.log_full_grid = r.get_or<double>("log_full_grid", 0.0);
    require(c.optimistic_initial.size() == c.representatives.size() &&
                c.optimistic_transitions.size() == c.representatives.size(),
            root + ": optimistic tables do not match the representatives");
    return c;
}

inline json to_json(const CoverReport& rep) {
    return json{{"ok", rep.ok},
                {"violations", rep.violations},
                {"covering", rep.covering},
                {"max_mass_excess", rep.max_mass_excess},
                {"max_reward_gap", rep.max_reward_gap}};
}

// Reports.

inline json to_json(const ComplexityReport& r) {
    json w = json::object();
    for (const auto& [k, v] : r.witness) w[k] = v;
    return json{{"format_version", kFormatVersion},
                {"quantity", r.quantity},
                {"value", r.value},
                {"status", status_name(r.status)},
                {"error_bound", r.error_bound},
                {"gamma", r.gamma},
                {"witness", w},
                {"seconds", r.seconds}};
}

// Ledgers.

inline json to_json(const Trajectory& tr) {
    return json{{"states", tr.states}, {"actions", tr.actions}, {"rewards", tr.rewards}};
}

inline Trajectory trajectory_from_json(const Reader& r) {
    return Trajectory{r.get<std::vector<int>>("states"), r.get<std::vector<int>>("actions"),
                      r.get<std::vector<double>>("rewards")};
}

inline json to_json(const RoundRecord& row) {
    json mix = json::array();
    for (const auto& [k, v] : row.mixtures) mix.push_back(json{{"name", k}, {"weights", v}});
    return json{{"t", row.t},
                {"mixtures", mix},
                {"dec_value", row.dec_value},
                {"bound_value", row.bound_value},
                {"policy", row.policy},
                {"trajectory", to_json(row.traj)},
                {"belief", row.belief},
                {"belief_hash", row.belief_hash},
                {"est_increment", row.est_increment},
                {"regret_increment", row.regret_increment},
                {"cum_regret", row.cum_regret},
                {"cum_est", row.cum_est},
                {"audit_slack", row.audit_slack},
                {"truth_in_set", row.truth_in_set}};
}

inline RoundRecord round_from_json(const Reader& r) {
    RoundRecord row;
    row.t = r.get<std::size_t>("t");
    for (const auto& m : r.at("mixtures"))
        row.mixtures.emplace_back(m.at("name").get<std::string>(), m.at("weights").get<std::vector<double>>());
    row.dec_value = r.get<double>("dec_value");
    row.bound_value = r.get<double>("bound_value");
    row.policy = r.get<std::size_t>("policy");
    row.traj = trajectory_from_json(r.sub("trajectory"));
    row.belief = r.get<std::vector<double>>("belief");
    row.belief_hash = r.get<std::string>("belief_hash");
    row.est_increment = r.get<double>("est_increment");
    row.regret_increment = r.get<double>("regret_increment");
    row.cum_regret = r.get<double>("cum_regret");
    row.cum_est = r.get<double>("cum_est");
    row.audit_slack = r.get<double>("audit_slack");
    row.truth_in_set = r.get_or<bool>("truth_in_set", true);
    return row;
}

inline json terminal_json(const RunLedger& L) {
    return json{{"rounds", L.rounds.size()},   {"reg_dm", L.reg_dm},
                {"subopt", L.subopt},          {"subopt_rf", L.subopt_rf},
                {"model_error", L.model_error}, {"est_rl", L.est_rl},
                {"est_h", L.est_h},            {"audit_lhs", L.audit_lhs},
                {"audit_rhs", L.audit_rhs},    {"audit_applies", L.audit_applies},
                {"estimate", L.estimate},      {"contained", L.contained},
                {"min_slack", L.min_slack()},  {"terminal_slack", L.terminal_slack()},
                {"audit_ok", L.audit_ok()}};
}

inline json to_json(const RunLedger& L) {
    json rows = json::array();
    for (const auto& r : L.rounds) rows.push_back(to_json(r));
    auto j = terminal_json(L);
    j["format_version"] = kFormatVersion;
    j["kind"] = "run_ledger";
    j["algorithm"] = L.algorithm;
    j["gamma"] = L.gamma;
    j["seed"] = L.seed;
    j["truth"] = L.truth;
    j["audit_scale"] = L.audit_scale;
    j["audit_gamma"] = L.audit_gamma;
    j["rounds"] = rows;
    return j;
}

inline RunLedger ledger_from_json(const json& j, const std::string& root = "ledger") {
    Reader r(j, root);
    check_version(r);
    RunLedger L;
    L.algorithm = r.get<std::string>("algorithm");
    L.gamma = r.get<double>("gamma");
    L.seed = r.get<std::uint64_t>("seed");
    L.truth = r.get<std::size_t>("truth");
    L.audit_scale = r.get<double>("audit_scale");
    L.audit_gamma = r.get<double>("audit_gamma");
    const auto& rows = r.at("rounds");
    require(rows.is_array(), r.where("rounds") + ": expected an array");
    for (std::size_t k = 0; k < rows.size(); ++k)
        L.rounds.push_back(round_from_json(Reader(rows[k], r.where("rounds") + "[" + std::to_string(k) + "]")));
    L.reg_dm = r.get<double>("reg_dm");
    L.subopt = r.get<double>("subopt");
    L.subopt_rf = r.get<double>("subopt_rf");
    L.model_error = r.get<double>("model_error");
    L.est_rl = r.get<double>("est_rl");
    L.est_h = r.get<double>("est_h");
    L.audit_lhs = r.get<double>("audit_lhs");
    L.audit_rhs = r.get<double>("audit_rhs");
    L.audit_applies = r.get<bool>("audit_applies");
    L.estimate = r.get<std::size_t>("estimate");
    L.contained = r.get<bool>("contained");
    return L;
}

// Per-round CSV.

inline const char* kCsvHeader = "t,regret_increment,cum_regret,dec_value,est_increment,cum_est,audit_slack";

inline std::string ledger_csv(const RunLedger& L) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : L.rounds) {
        out += std::to_string(r.t);
        for (double v : {r.regret_increment, r.cum_regret, r.dec_value, r.est_increment, r.cum_est, r.audit_slack})
            out += "," + fmt17(v);
        out += "\n";
    }
    return out;
}

struct CsvRow {
    std::size_t t = 0;
    double regret_increment = 0.0, cum_regret = 0.0, dec_value = 0.0, est_increment = 0.0, cum_est = 0.0,
           audit_slack = 0.0;
};

inline std::vector<CsvRow> parse_ledger_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(std::getline(in, line) && line == kCsvHeader, "ledger csv: unexpected header");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        require(cells.size() == 7, "ledger csv: row " + std::to_string(rows.size() + 1) + " has the wrong width");
        CsvRow r;
        auto number = [&](const std::string& c) {
            char* end = nullptr;
            double v = std::strtod(c.c_str(), &end);
            require(!c.empty() && *end == '\0',
                    "ledger csv: row " + std::to_string(rows.size() + 1) + " is not numeric");
            return v;
        };
        r.t = static_cast<std::size_t>(number(cells[0]));
        double* f[] = {&r.regret_increment, &r.cum_regret, &r.dec_value, &r.est_increment, &r.cum_est, &r.audit_slack};
        for (std::size_t k = 0; k < 6; ++k) *f[k] = number(cells[k + 1]);
        rows.push_back(r);
    }
    return rows;
}

} // namespace dec::io
