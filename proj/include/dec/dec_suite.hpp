#pragma once

#include "dec/dynamics.hpp"
#include "dec/minimax.hpp"

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace dec {

struct TableOptions {
    bool drl = true;
    bool dh = false;
    bool dtilde = false;
    std::size_t budget = 50'000'000; ///< max doubles per divergence table
    std::size_t cap = kEnumerationCap;
};

/// Values and pairwise divergences of a finite class under a finite policy class.
/// Divergence tables are flat [(m*K + mb)*N + i] with m the first argument.
struct ClassTables {
    std::size_t K = 0, N = 0;
    std::vector<double> value; ///< [m*N + i] = f^m(pi_i)
    std::vector<std::size_t> opt;
    std::vector<double> opt_value;
    std::vector<double> drl, dh, dtilde;

    double f(std::size_t m, std::size_t i) const { return value[m * N + i]; }
    double subopt(std::size_t m, std::size_t i) const { return opt_value[m] - value[m * N + i]; }
    static double at(const std::vector<double>& D, std::size_t K, std::size_t N, std::size_t m, std::size_t mb,
                     std::size_t i) {
        return D[(m * K + mb) * N + i];
    }
    double d_rl(std::size_t m, std::size_t mb, std::size_t i) const { return at(drl, K, N, m, mb, i); }
    double d_h(std::size_t m, std::size_t mb, std::size_t i) const { return at(dh, K, N, m, mb, i); }
    double d_tv(std::size_t m, std::size_t mb, std::size_t i) const { return at(dtilde, K, N, m, mb, i); }

    /// E_{mb ~ mu} D(m, mb, pi_i) for every (m, i), flat [m*N + i].
    std::vector<double> expected(const std::vector<double>& D, const std::vector<double>& mu) const {
        require(!D.empty(), "class tables: divergence table was not built");
        require(mu.size() == K, "class tables: reference belief has wrong size");
        std::vector<double> e(K * N, 0.0);
        for (std::size_t m = 0; m < K; ++m)
            for (std::size_t mb = 0; mb < K; ++mb) {
                if (mu[mb] == 0.0) continue;
                const double* row = D.data() + (m * K + mb) * N;
                for (std::size_t i = 0; i < N; ++i) e[m * N + i] += mu[mb] * row[i];
            }
        return e;
    }
};

inline ClassTables build_tables(const ModelClass& cls, const PolicyClass& pc, const TableOptions& opt = {}) {
    pc.validate();
    require(pc.shape == cls.shape(), "class tables: policy class shape differs from the class");
    ClassTables t;
    t.K = cls.size();
    t.N = pc.size();
    const std::size_t cells = t.K * t.K * t.N;
    require(cells <= opt.budget, "class tables: " + std::to_string(cells) +
                                     " divergence entries exceed the memory budget of " + std::to_string(opt.budget));
    t.value.resize(t.K * t.N);
    t.opt.resize(t.K);
    t.opt_value.resize(t.K);
    for (std::size_t m = 0; m < t.K; ++m) {
        t.opt_value[m] = kNegInf;
        for (std::size_t i = 0; i < t.N; ++i) {
            double v = policy_value(cls[m], pc[i]);
            t.value[m * t.N + i] = v;
            if (v > t.opt_value[m]) {
                t.opt_value[m] = v;
                t.opt[m] = i;
            }
        }
    }
    auto fill = [&](std::vector<double>& D, auto&& fn) {
        D.assign(cells, 0.0);
        for (std::size_t m = 0; m < t.K; ++m)
            for (std::size_t mb = 0; mb < t.K; ++mb) {
                if (m == mb) continue;
                for (std::size_t i = 0; i < t.N; ++i) D[(m * t.K + mb) * t.N + i] = fn(cls[m], cls[mb], pc[i]);
            }
    };
    if (opt.drl) fill(t.drl, [](const Model& a, const Model& b, const Policy& p) { return d_rl_sq(a, b, p); });
    if (opt.dh) fill(t.dh, [](const Model& a, const Model& b, const Policy& p) { return hellinger_traj(a, b, p); });
    if (opt.dtilde)
        fill(t.dtilde, [&](const Model& a, const Model& b, const Policy& p) { return d_tilde(a, b, p, opt.cap); });
    return t;
}

struct ComplexityReport {
    std::string quantity;
    double value = 0.0;
    SolveStatus status = SolveStatus::Exact;
    double error_bound = 0.0;
    double gamma = 0.0;
    std::vector<std::pair<std::string, std::vector<double>>> witness;
    double seconds = 0.0;

    const std::vector<double>& witness_of(const std::string& name) const {
        for (const auto& [k, v] : witness)
            if (k == name) return v;
        throw ValidationError("complexity report: no witness named " + name);
    }
};

namespace detail {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void check_gamma(double gamma) { require(gamma > 0.0, "gamma must be positive"); }

inline ComplexityReport from_solve(std::string name, double gamma, const SolveReport& s,
                                   std::vector<std::string> blocks, const Stopwatch& sw) {
    ComplexityReport r;
    r.quantity = std::move(name);
    r.value = s.value;
    r.status = s.status;
    r.error_bound = s.error_bound;
    r.gamma = gamma;
    for (std::size_t b = 0; b < blocks.size(); ++b) r.witness.emplace_back(blocks[b], s.mixtures[b]);
    r.witness.emplace_back("certificate", s.certificate);
    r.seconds = sw.seconds();
    return r;
}

} // namespace detail

/// inf_p sup_M E_{pi~p} E_{Mb~mu}[f^M(pi_M) - f^M(pi) - gamma D_RL^2(M(pi), Mb(pi))].
/// With candidates > 0 the sup ranges over the first candidates models only
/// (the rest may carry reference weight, as cover representatives do).
inline ComplexityReport dec_at(const ClassTables& t, const Belief& mu, double gamma, std::size_t candidates = 0) {
    detail::Stopwatch sw;
    detail::check_gamma(gamma);
    mu.validate(t.K);
    require(candidates <= t.K, "dec: more candidates than models");
    auto e = t.expected(t.drl, mu.weights);
    JointProgram prog({t.N});
    for (std::size_t m = 0; m < (candidates ? candidates : t.K); ++m) {
        double* row = prog.add_constraint();
        for (std::size_t i = 0; i < t.N; ++i) row[i] = t.subopt(m, i) - gamma * e[m * t.N + i];
    }
    return detail::from_solve("dec", gamma, solve_joint_simplices(prog), {"p"}, sw);
}

/// Exploration mixture in the information term, output mixture in the suboptimality term.
inline ComplexityReport edec_at(const ClassTables& t, const Belief& mu, double gamma, bool hellinger_only = false) {
    detail::Stopwatch sw;
    detail::check_gamma(gamma);
    mu.validate(t.K);
    auto e = t.expected(hellinger_only ? t.dh : t.drl, mu.weights);
    JointProgram prog({t.N, t.N});
    for (std::size_t m = 0; m < t.K; ++m) {
        double* row = prog.add_constraint();
        for (std::size_t i = 0; i < t.N; ++i) {
            row[i] = -gamma * e[m * t.N + i];
            row[t.N + i] = t.subopt(m, i);
        }
    }
    return detail::from_solve("edec", gamma, solve_joint_simplices(prog), {"p_exp", "p_out"}, sw);
}

/// Exploration mixture against an output belief over models, scored by d_tilde at every policy.
inline ComplexityReport amdec_at(const ClassTables& t, const Belief& mu, double gamma) {
    detail::Stopwatch sw;
    detail::check_gamma(gamma);
    mu.validate(t.K);
    require(!t.dtilde.empty(), "amdec: class tables were built without d_tilde");
    auto e = t.expected(t.drl, mu.weights);
    JointProgram prog({t.N, t.K});
    for (std::size_t m = 0; m < t.K; ++m)
        for (std::size_t pb = 0; pb < t.N; ++pb) {
            double* row = prog.add_constraint();
            for (std::size_t i = 0; i < t.N; ++i) row[i] = -gamma * e[m * t.N + i];
            for (std::size_t mh = 0; mh < t.K; ++mh) row[t.N + mh] = t.d_tv(m, mh, pb);
        }
    return detail::from_solve("amdec", gamma, solve_joint_simplices(prog), {"p_exp", "mu_out"}, sw);
}

/// Tables for a P x R class: values over the full class and Hellinger over the transition part.
struct FactorizedTables {
    std::size_t num_p = 0, num_r = 0;
    ClassTables full;  ///< values of models[p*num_r + r]
    ClassTables trans; ///< dh over the transition class
};

inline FactorizedTables build_factorized_tables(const ModelClass& cls, const PolicyClass& pc,
                                                std::size_t budget = 50'000'000) {
    const auto& f = cls.factorization();
    FactorizedTables ft;
    ft.num_p = f.num_p;
    ft.num_r = f.num_r;
    ft.full = build_tables(cls, pc, TableOptions{false, false, false, budget});
    ft.trans = build_tables(cls.transition_class(), pc, TableOptions{false, true, false, budget});
    return ft;
}

/// One LP over (p_exp, p_out^R for each R) with a constraint per (R, P).
inline ComplexityReport rfdec_at(const FactorizedTables& ft, const Belief& mu, double gamma) {
    detail::Stopwatch sw;
    detail::check_gamma(gamma);
    mu.validate(ft.num_p);
    const std::size_t N = ft.full.N, R = ft.num_r;
    auto e = ft.trans.expected(ft.trans.dh, mu.weights);
    std::vector<std::size_t> sizes(R + 1, N);
    JointProgram prog(sizes);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t p = 0; p < ft.num_p; ++p) {
            double* row = prog.add_constraint();
            const std::size_t m = p * R + r;
            for (std::size_t i = 0; i < N; ++i) {
                row[i] = -gamma * e[p * N + i];
                row[(r + 1) * N + i] = ft.full.subopt(m, i);
            }
        }
    std::vector<std::string> names{"p_exp"};
    for (std::size_t r = 0; r < R; ++r) names.push_back("p_out_" + std::to_string(r));
    return detail::from_solve("rfdec", gamma, solve_joint_simplices(prog), names, sw);
}

/// inf_{p, mu~} sup_{P,R,pi'} |E_{Pb~mu~}[f^{P,R}(pi') - f^{Pb,R}(pi')]| - gamma E_mu E_p D_H^2.
inline ComplexityReport rrec_at(const FactorizedTables& ft, const Belief& mu, double gamma) {
    detail::Stopwatch sw;
    detail::check_gamma(gamma);
    mu.validate(ft.num_p);
    const std::size_t N = ft.full.N, R = ft.num_r, P = ft.num_p;
    auto e = ft.trans.expected(ft.trans.dh, mu.weights);
    JointProgram prog({N, P});
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t j = 0; j < N; ++j)
                for (double sign : {1.0, -1.0}) {
                    double* row = prog.add_constraint();
                    for (std::size_t i = 0; i < N; ++i) row[i] = -gamma * e[p * N + i];
                    for (std::size_t pb = 0; pb < P; ++pb)
                        row[N + pb] = sign * (ft.full.f(p * R + r, j) - ft.full.f(pb * R + r, j));
                }
    return detail::from_solve("rrec", gamma, solve_joint_simplices(prog), {"p", "mu_tilde"}, sw);
}

namespace detail {

inline void psc_terms(const ClassTables& t, std::size_t ref, std::vector<double>& a, Matrix& Psi) {
    require(ref < t.K, "psc: reference index out of range");
    a.assign(t.K, 0.0);
    Psi = Matrix(t.K, t.K);
    for (std::size_t m = 0; m < t.K; ++m) {
        a[m] = t.opt_value[m] - t.f(ref, t.opt[m]);
        for (std::size_t m2 = 0; m2 < t.K; ++m2) Psi(m, m2) = t.d_rl(ref, m, t.opt[m2]);
    }
}

} // namespace detail

/// sup_mu E_{M,M'~mu}[f^M(pi_M) - f^Mb(pi_M) - gamma D_RL^2(Mb(pi_M'), M(pi_M'))].
template <class Mode>
ComplexityReport psc_at(const ClassTables& t, std::size_t ref, double gamma, Mode mode) {
    detail::Stopwatch sw;
    detail::check_gamma(gamma);
    std::vector<double> a;
    Matrix Psi;
    detail::psc_terms(t, ref, a, Psi);
    for (auto& v : Psi.data) v *= gamma;
    auto s = simplex_quadratic_max(a, Psi, mode);
    ComplexityReport r;
    r.quantity = "psc";
    r.value = s.value;
    r.status = s.status;
    r.error_bound = s.error_bound;
    r.gamma = gamma;
    r.witness.emplace_back("mu", s.mixture());
    r.seconds = sw.seconds();
    return r;
}

enum class MlecMode { BruteForce, Greedy };

namespace detail {

/// Objective of a model sequence, without the 1/K normalization of the floor term.
struct MlecState {
    const ClassTables* t = nullptr;
    std::size_t ref = 0;
    double gamma = 0.0;
    std::size_t K = 0;

    double objective(double gain_sum, double div_max) const {
        return gain_sum / static_cast<double>(K) - gamma / static_cast<double>(K) * std::max(div_max, 1.0);
    }
    double gain(std::size_t m) const { return t->opt_value[m] - t->f(ref, t->opt[m]); }
    /// Sum_{j < len} D_RL^2(Mb(pi_{seq_j}), M(pi_{seq_j})).
    double prefix_div(const std::vector<std::size_t>& seq, std::size_t len, std::size_t m) const {
        double s = 0.0;
        for (std::size_t j = 0; j < len; ++j) s += t->d_rl(ref, m, t->opt[seq[j]]);
        return s;
    }
};

} // namespace detail

inline ComplexityReport mlec_at(const ClassTables& t, std::size_t ref, double gamma, std::size_t K,
                                MlecMode mode = MlecMode::BruteForce) {
    detail::Stopwatch sw;
    detail::check_gamma(gamma);
    require(ref < t.K, "mlec: reference index out of range");
    require(K >= 1, "mlec: K must be >= 1");
    detail::MlecState st{&t, ref, gamma, K};
    std::vector<std::size_t> seq(K), best_seq(K);
    double best = kNegInf;
    if (mode == MlecMode::BruteForce) {
        double count = std::pow(static_cast<double>(t.K), static_cast<double>(K));
        require(count <= 1e6, "mlec: brute force over " + fmt17(count) + " sequences exceeds 10^6");
        std::function<void(std::size_t, double, double)> rec = [&](std::size_t k, double g, double dmax) {
            if (k == K) {
                double v = st.objective(g, dmax);
                if (v > best) {
                    best = v;
                    best_seq = seq;
                }
                return;
            }
            for (std::size_t m = 0; m < t.K; ++m) {
                seq[k] = m;
                rec(k + 1, g + st.gain(m), std::max(dmax, st.prefix_div(seq, k, m)));
            }
        };
        rec(0, 0.0, 0.0);
    } else {
        double g = 0.0, dmax = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            double top = kNegInf;
            std::size_t arg = 0;
            for (std::size_t m = 0; m < t.K; ++m) {
                double v = st.objective(g + st.gain(m), std::max(dmax, st.prefix_div(seq, k, m)));
                if (v > top) {
                    top = v;
                    arg = m;
                }
            }
            seq[k] = arg;
            g += st.gain(arg);
            dmax = std::max(dmax, st.prefix_div(seq, k, arg));
        }
        best = st.objective(g, dmax);
        best_seq = seq;
    }
    ComplexityReport r;
    r.quantity = "mlec";
    r.value = best;
    r.status = mode == MlecMode::BruteForce ? SolveStatus::Exact : SolveStatus::HeuristicLowerBound;
    r.gamma = gamma;
    r.witness.emplace_back("sequence", std::vector<double>(best_seq.begin(), best_seq.end()));
    r.seconds = sw.seconds();
    return r;
}

/// DEC against the mixture law of mu, with the posterior-weighted reward mean.
inline ComplexityReport dec_mixture_at(const ModelClass& cls, const PolicyClass& pc, const Belief& mu, double gamma,
                                       std::size_t cap = kEnumerationCap) {
    detail::Stopwatch sw;
    detail::check_gamma(gamma);
    mu.validate(cls.size());
    const std::size_t K = cls.size(), N = pc.size();
    const Shape& sh = cls.shape();
    std::vector<std::size_t> support;
    for (std::size_t k = 0; k < K; ++k)
        if (mu.weights[k] > 0.0) support.push_back(k);
    std::vector<double> values(K * N), opt(K, kNegInf);
    for (std::size_t m = 0; m < K; ++m)
        for (std::size_t i = 0; i < N; ++i) {
            values[m * N + i] = policy_value(cls[m], pc[i]);
            opt[m] = std::max(opt[m], values[m * N + i]);
        }
    JointProgram prog({N});
    std::vector<const Model*> ms;
    for (std::size_t m = 0; m < K; ++m) {
        double* row = prog.add_constraint();
        for (std::size_t i = 0; i < N; ++i) {
            ms.assign({&cls[m]});
            for (auto k : support) ms.push_back(&cls[k]);
            double bc = 0.0, rew = 0.0;
            for_each_trajectory(
                ms, pc[i],
                [&](const std::vector<int>& states, const double* p) {
                    double mix = 0.0;
                    for (std::size_t j = 0; j < support.size(); ++j) mix += mu.weights[support[j]] * p[j + 1];
                    bc += std::sqrt(p[0] * mix);
                    if (p[0] == 0.0) return;
                    double g = 0.0;
                    for (int h = 0; h < sh.H; ++h) {
                        int a = pc[i].at(sh, h, states[h]);
                        double rm = 0.0;
                        for (std::size_t j = 0; j < support.size(); ++j) {
                            double w = mix > 0.0 ? mu.weights[support[j]] * p[j + 1] / mix : mu.weights[support[j]];
                            rm += w * cls[support[j]].r(h, states[h], a);
                        }
                        double d = cls[m].r(h, states[h], a) - rm;
                        g += d * d;
                    }
                    rew += p[0] * g;
                },
                cap);
            double div = std::clamp(2.0 - 2.0 * bc, 0.0, 2.0) + rew;
            row[i] = opt[m] - values[m * N + i] - gamma * div;
        }
    }
    return detail::from_solve("dec_mixture", gamma, solve_joint_simplices(prog), {"p"}, sw);
}

/// Lower bound on sup over reference beliefs of dec: vertices, supplied beliefs,
/// and seeded random beliefs refined by a mass-shifting local search.
inline ComplexityReport dec_sup_heuristic(const ClassTables& t, double gamma, const std::vector<Belief>& extra = {},
                                          MultiStartMode mode = {}) {
    detail::Stopwatch sw;
    detail::check_gamma(gamma);
    double best = kNegInf;
    Belief arg;
    auto consider = [&](const Belief& b) {
        double v = dec_at(t, b, gamma).value;
        if (v > best) {
            best = v;
            arg = b;
        }
        return v;
    };
    for (std::size_t k = 0; k < t.K; ++k) consider(Belief::point(t.K, k));
    for (const auto& b : extra) consider(b);
    Rng rng(mode.seed);
    const int rounds = std::max(1, static_cast<int>(mode.iters / 50));
    for (std::size_t s = 0; s < mode.starts; ++s) {
        Belief b{rng.dirichlet(t.K, 1.0)};
        double v = consider(b);
        double step = 0.5;
        for (int it = 0; it < rounds; ++it, step *= 0.7) {
            bool moved = false;
            for (std::size_t k = 0; k < t.K; ++k) {
                Belief c = b;
                for (std::size_t j = 0; j < t.K; ++j) c.weights[j] = (1.0 - step) * b.weights[j] + (j == k ? step : 0.0);
                double w = consider(c);
                if (w > v) {
                    v = w;
                    b = c;
                    moved = true;
                }
            }
            if (!moved && step < 1e-3) break;
        }
    }
    ComplexityReport r;
    r.quantity = "dec_sup";
    r.value = best;
    r.status = SolveStatus::HeuristicLowerBound;
    r.gamma = gamma;
    r.witness.emplace_back("mu_ref", arg.weights);
    r.seconds = sw.seconds();
    return r;
}

} // namespace dec
