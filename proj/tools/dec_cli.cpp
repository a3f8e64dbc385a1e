#include "dec/bellman.hpp"
#include "dec/harness.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

using namespace dec;
using harness::json;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kViolation = 2;

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Belief reference(std::size_t K, int ref, const std::vector<double>& weights) {
    if (!weights.empty()) {
        Belief b{weights};
        b.validate(K);
        return b;
    }
    require(ref >= 0 && static_cast<std::size_t>(ref) < K, "--ref: index out of range");
    return Belief::point(K, static_cast<std::size_t>(ref));
}

void print_report(const ComplexityReport& r, bool as_json) {
    if (as_json)
        std::cout << io::to_json(r).dump(2) << "\n";
    else
        std::cout << short_num(r.value) << "\n";
}

struct DecArgs {
    std::string cls, quantity = "dec", mlec_mode = "brute";
    double gamma = 1.0, step = 0.01;
    int ref = 0;
    std::size_t mlec_k = 1;
    std::vector<double> belief;
    bool hellinger_only = false, as_json = false;
};

int cmd_dec(const DecArgs& a) {
    auto f = io::load_class(a.cls);
    const auto pc = f.policies.policies.empty() ? PolicyClass::all(f.cls.shape()) : f.policies;
    const auto& q = a.quantity;
    if (q == "rfdec" || q == "rrec") {
        const auto ft = build_factorized_tables(f.cls, pc);
        auto mu = reference(ft.num_p, a.ref, a.belief);
        print_report(q == "rfdec" ? rfdec_at(ft, mu, a.gamma) : rrec_at(ft, mu, a.gamma), a.as_json);
        return kOk;
    }
    if (q == "dec_mixture") {
        print_report(dec_mixture_at(f.cls, pc, reference(f.cls.size(), a.ref, a.belief), a.gamma), a.as_json);
        return kOk;
    }
    const auto t = build_tables(f.cls, pc);
    if (q == "dec") {
        print_report(dec_at(t, reference(t.K, a.ref, a.belief), a.gamma), a.as_json);
    } else if (q == "edec") {
        print_report(edec_at(t, reference(t.K, a.ref, a.belief), a.gamma, a.hellinger_only), a.as_json);
    } else if (q == "amdec") {
        print_report(amdec_at(t, reference(t.K, a.ref, a.belief), a.gamma), a.as_json);
    } else if (q == "psc") {
        require(a.ref >= 0 && static_cast<std::size_t>(a.ref) < t.K, "--ref: index out of range");
        if (t.K <= 4)
            print_report(psc_at(t, a.ref, a.gamma, GridMode{a.step}), a.as_json);
        else
            print_report(psc_at(t, a.ref, a.gamma, MultiStartMode{}), a.as_json);
    } else if (q == "mlec") {
        require(a.ref >= 0 && static_cast<std::size_t>(a.ref) < t.K, "--ref: index out of range");
        require(a.mlec_mode == "brute" || a.mlec_mode == "greedy", "--mlec-mode: expected brute or greedy");
        print_report(mlec_at(t, a.ref, a.gamma, a.mlec_k, a.mlec_mode == "brute" ? MlecMode::BruteForce : MlecMode::Greedy),
                     a.as_json);
    } else if (q == "dec_sup") {
        print_report(dec_sup_heuristic(t, a.gamma), a.as_json);
    } else {
        throw ValidationError("--quantity: unknown quantity " + q);
    }
    return kOk;
}

int cmd_run(const std::string& spec_path, const std::string& out_dir, std::size_t workers) {
    auto s = harness::load_spec(spec_path);
    auto w = harness::resolve_world(s);
    auto cells = harness::run_experiment(s, w, workers);
    auto files = harness::write_results(s, cells, out_dir.empty() ? s.output_dir : out_dir);
    bool ok = true;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& c = cells[k];
        bool cell_ok = c.ledger.audit_ok() && c.extra_slack >= -harness::kSlackTol;
        ok = ok && cell_ok;
        std::cout << s.name << " gamma=" << short_num(c.gamma) << " seed=" << c.seed
                  << " reg_dm=" << short_num(c.ledger.reg_dm) << " audit_lhs=" << short_num(c.ledger.audit_lhs)
                  << " audit_rhs=" << short_num(c.ledger.audit_rhs) << " audit=" << (cell_ok ? "ok" : "FAIL") << " "
                  << files[k].csv << "\n";
    }
    return ok ? kOk : kViolation;
}

int cmd_cover(const std::string& cls_path, const std::string& type, double rho, const std::string& out,
              const std::string& verify) {
    auto f = io::load_class(cls_path);
    const auto pc = f.policies.policies.empty() ? PolicyClass::all(f.cls.shape()) : f.policies;
    OptimisticCover c;
    if (!verify.empty()) {
        c = io::cover_from_json(io::read_json_file(verify), verify);
    } else {
        require(type == "exact" || type == "tabular", "--type: expected exact or tabular");
        c = type == "exact" ? exact_cover(f.cls) : tabular_cover(f.cls, rho);
    }
    auto rep = verify_cover(c, f.cls, pc);
    if (!out.empty()) io::write_text_file(out, io::to_json(c).dump(2) + "\n");
    json j = io::to_json(rep);
    j["size"] = c.size();
    j["rho"] = c.rho;
    std::cout << j.dump(2) << "\n";
    return rep.ok ? kOk : kViolation;
}

FunctionClassTable table_from_json(const json& j, const std::string& where) {
    io::Reader r(j, where);
    FunctionClassTable t(r.get<std::size_t>("rows"), r.get<std::size_t>("cols"));
    t.values = r.get<std::vector<double>>("values");
    t.validate();
    return t;
}

int cmd_complexity(const std::string& cls_path, const std::string& table_path, int ref, const std::string& measure,
                   double delta, double gamma) {
    std::vector<FunctionClassTable> tables;
    if (!table_path.empty()) {
        tables.push_back(table_from_json(io::read_json_file(table_path), table_path));
    } else {
        require(!cls_path.empty(), "complexity: give --class or --table");
        auto f = io::load_class(cls_path);
        require(ref >= 0 && static_cast<std::size_t>(ref) < f.cls.size(), "--ref: index out of range");
        const auto pc = f.policies.policies.empty() ? PolicyClass::all(f.cls.shape()) : f.policies;
        tables = qbe_tables(f.cls, static_cast<std::size_t>(ref), pc);
    }
    json out = json::array();
    for (std::size_t h = 0; h < tables.size(); ++h) {
        json row{{"table", h}};
        if (measure == "qbe") {
            row["rows"] = tables[h].rows;
            row["cols"] = tables[h].cols;
            row["values"] = tables[h].values;
        } else if (measure == "eluder") {
            row["eluder_dim"] = eluder_dim(tables[h], delta);
        } else if (measure == "star") {
            row["star_number"] = star_number(tables[h], delta);
        } else if (measure == "dc") {
            auto r = tables[h].rows * tables[h].cols <= 9 ? dc_estimate(tables[h], gamma, GridMode{0.01})
                                                          : dc_estimate(tables[h], gamma, MultiStartMode{});
            row["dc"] = io::to_json(r);
        } else {
            throw ValidationError("--measure: expected eluder, star, dc or qbe");
        }
        out.push_back(row);
    }
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_game(const std::string& path, const std::string& kind_s, bool as_json) {
    auto games = io::games_from_json(io::read_json_file(path), path);
    require(games.size() == 1, "game: the file must hold a single game");
    const auto& mg = games.front();
    auto kind = parse_kind(kind_s);
    auto pi = solve_equilibrium(mg, kind);
    auto values = mg_values(mg, pi);
    double gap = equilibrium_gap(pi, mg, kind);
    if (as_json) {
        std::cout << json{{"kind", kind_name(kind)}, {"values", values}, {"gap", gap}, {"policy", io::to_json(pi)}}.dump(2)
                  << "\n";
    } else {
        std::cout << "kind=" << kind_name(kind) << " gap=" << short_num(gap) << " values=";
        for (std::size_t i = 0; i < values.size(); ++i) std::cout << (i ? "," : "") << short_num(values[i]);
        std::cout << "\n";
    }
    return kOk;
}

int cmd_audit(const std::vector<std::string>& paths, bool recompute) {
    bool ok = true;
    for (const auto& p : paths) {
        auto a = harness::audit_file(p, recompute);
        std::cout << p << ": rows=" << a.rows << " min_slack=" << short_num(a.min_slack)
                  << " recomputed=" << (a.recomputed ? "yes" : "no")
                  << " max_error=" << short_num(a.max_recompute_error) << " " << (a.ok() ? "ok" : "FAIL") << "\n";
        for (const auto& v : a.violations) std::cout << "  " << v << "\n";
        ok = ok && a.ok();
    }
    return ok ? kOk : kViolation;
}

int cmd_plot(const std::vector<std::string>& paths, const std::string& out_dir) {
    std::vector<RunLedger> runs;
    for (const auto& p : paths) runs.push_back(io::ledger_from_json(io::read_json_file(p), p));
    auto curve = harness::regret_curve_csv(runs);
    auto per_round = harness::dec_per_round_csv(runs);
    if (out_dir.empty()) {
        std::cout << curve << "\n" << per_round;
    } else {
        std::filesystem::create_directories(out_dir);
        io::write_text_file((std::filesystem::path(out_dir) / "regret_curve.csv").string(), curve);
        io::write_text_file((std::filesystem::path(out_dir) / "dec_per_round.csv").string(), per_round);
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decision-estimation toolkit"};
    app.require_subcommand(1);

    DecArgs da;
    auto* dec_cmd = app.add_subcommand("dec", "compute a complexity report from a class file");
    dec_cmd->add_option("--class", da.cls, "class JSON file")->required();
    dec_cmd->add_option("--gamma", da.gamma, "information weight")->required();
    dec_cmd->add_option("--ref", da.ref, "reference model index (point-mass belief)");
    dec_cmd->add_option("--belief", da.belief, "reference belief weights")->delimiter(',');
    dec_cmd->add_option("--quantity", da.quantity, "dec|edec|amdec|rfdec|rrec|psc|mlec|dec_mixture|dec_sup");
    dec_cmd->add_flag("--hellinger-only", da.hellinger_only, "edec without the reward term");
    dec_cmd->add_option("--grid-step", da.step, "psc grid step");
    dec_cmd->add_option("--mlec-k", da.mlec_k, "mlec sequence length");
    dec_cmd->add_option("--mlec-mode", da.mlec_mode, "brute|greedy");
    dec_cmd->add_flag("--json", da.as_json, "print the full report");

    std::string spec, out;
    std::size_t workers = 0;
    auto* run_cmd = app.add_subcommand("run", "run a decision loop from an experiment spec");
    run_cmd->add_option("--spec", spec, "experiment spec JSON")->required();
    run_cmd->add_option("--out", out, "output directory (overrides the spec)");
    run_cmd->add_option("--workers", workers, "worker threads (default DEC_WORKERS or 1)");

    std::string cover_cls, cover_type = "exact", cover_out, cover_verify;
    double rho = 0.0;
    auto* cover_cmd = app.add_subcommand("cover", "build or verify an optimistic cover");
    cover_cmd->add_option("--class", cover_cls, "class JSON file")->required();
    cover_cmd->add_option("--type", cover_type, "exact|tabular");
    cover_cmd->add_option("--rho", rho, "cover radius for tabular covers");
    cover_cmd->add_option("--out", cover_out, "write the cover JSON here");
    cover_cmd->add_option("--verify", cover_verify, "verify this cover file instead of building one");

    std::string cx_cls, cx_table, measure = "eluder";
    int cx_ref = 0;
    double cx_delta = 0.1, cx_gamma = 1.0;
    auto* cx_cmd = app.add_subcommand("complexity", "eluder, star, dc or qbe over a class or table");
    cx_cmd->add_option("--class", cx_cls, "class JSON file (uses its QBE tables)");
    cx_cmd->add_option("--table", cx_table, "function table JSON {rows, cols, values}");
    cx_cmd->add_option("--ref", cx_ref, "reference model index for QBE");
    cx_cmd->add_option("--measure", measure, "eluder|star|dc|qbe");
    cx_cmd->add_option("--delta", cx_delta, "scale threshold");
    cx_cmd->add_option("--gamma", cx_gamma, "dc weight");

    std::string mg_path, kind = "cce";
    bool game_json = false;
    auto* game_cmd = app.add_subcommand("game", "solve an equilibrium of a Markov game and report its gap");
    game_cmd->add_option("--mg", mg_path, "Markov game JSON")->required();
    game_cmd->add_option("--kind", kind, "ne|ce|cce");
    game_cmd->add_flag("--json", game_json, "print the policy");

    std::vector<std::string> ledgers;
    bool no_recompute = false;
    auto* audit_cmd = app.add_subcommand("audit", "re-verify stored ledgers");
    audit_cmd->add_option("--ledger", ledgers, "ledger JSON files")->required();
    audit_cmd->add_flag("--no-recompute", no_recompute, "skip recomputing per-round values");

    std::vector<std::string> plot_ledgers;
    std::string plot_out;
    auto* plot_cmd = app.add_subcommand("plot-data", "emit regret-curve and per-round CSV");
    plot_cmd->add_option("--ledger", plot_ledgers, "ledger JSON files")->required();
    plot_cmd->add_option("--out", plot_out, "output directory (stdout when empty)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }
    try {
        if (*dec_cmd) return cmd_dec(da);
        if (*run_cmd) return cmd_run(spec, out, workers);
        if (*cover_cmd) return cmd_cover(cover_cls, cover_type, rho, cover_out, cover_verify);
        if (*cx_cmd) return cmd_complexity(cx_cls, cx_table, cx_ref, measure, cx_delta, cx_gamma);
        if (*game_cmd) return cmd_game(mg_path, kind, game_json);
        if (*audit_cmd) return cmd_audit(ledgers, !no_recompute);
        if (*plot_cmd) return cmd_plot(plot_ledgers, plot_out);
    } catch (const AuditViolation& e) {
        std::cerr << "audit violation: " << e.what() << "\n";
        return kViolation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
    return kInvalid;
}
