#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "csv.hpp"
#include "shortrate/errors.hpp"
#include "shortrate/feasibility.hpp"
#include "shortrate/gaussian.hpp"
#include "shortrate/portfolio.hpp"
#include "svg.hpp"

namespace shortrate::cli {

namespace fs = std::filesystem;

namespace {

class NoSolution : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string path_in(const RunConfig& c, const std::string& name) { return (fs::path(c.output_dir) / name).string(); }

void ensure_output_dir(const RunConfig& c) {
    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    if (ec || !fs::is_directory(c.output_dir)) throw InvalidInput("cannot create output directory " + c.output_dir);
}

/// Flat key=value record: resolved settings first, then results.
void write_record(const Invocation& inv, const std::vector<std::pair<std::string, std::string>>& results) {
    std::ofstream out(path_in(inv.config, "run.txt"), std::ios::binary);
    if (!out) throw InvalidInput("cannot write the run record");
    out << "command=" << inv.command << "\n" << render_settings(inv.settings);
    for (const auto& [k, v] : results) out << "result." << k << "=" << v << "\n";
}

double central_sup(const HjbResidual& res, const UniformGrid& g) {
    const double w = g.r_max - g.r_min;
    const double lo = g.r_min + 0.25 * w, hi = g.r_max - 0.25 * w;
    double worst = 0.0;
    for (std::size_t i = 0; i < res.r.size(); ++i)
        if (res.r[i] >= lo - 1e-12 && res.r[i] <= hi + 1e-12) worst = std::max(worst, std::abs(res.relative[i]));
    return worst;
}

// ---- feasibility -----------------------------------------------------------------------------

int cmd_feasibility(const Invocation& inv) {
    const FeasibilityReport rep = classify(inv.config.spec);
    std::vector<std::pair<std::string, std::string>> rec{{"verdict", to_string(rep.verdict)}, {"reason", rep.reason}};
    std::cout << "model: " << model_name(inv.config.spec.model) << "\n";
    std::cout << "verdict: " << to_string(rep.verdict) << "\n";
    std::cout << "reason: " << rep.reason << "\n";
    if (rep.thresholds) {
        std::printf("gamma1=%.10g\ngamma2=%.10g\n", rep.thresholds->gamma1, rep.thresholds->gamma2);
        rec.emplace_back("gamma1", g17(rep.thresholds->gamma1));
        rec.emplace_back("gamma2", g17(rep.thresholds->gamma2));
    }
    if (rep.rho) {
        std::printf("rho=%.10g\n", *rep.rho);
        rec.emplace_back("rho", g17(*rep.rho));
    }
    if (rep.witness) {
        std::printf("witness: exponent %.6g t + %.6g t^2 + %.6g t^3 at r=%.6g\n", rep.witness->c1, rep.witness->c2,
                    rep.witness->c3, rep.witness->reference_rate);
        rec.emplace_back("witness.c1", g17(rep.witness->c1));
        rec.emplace_back("witness.c2", g17(rep.witness->c2));
        rec.emplace_back("witness.c3", g17(rep.witness->c3));
        rec.emplace_back("witness.reference_rate", g17(rep.witness->reference_rate));
    }
    if (rep.sufficient_pair) {
        std::printf("sufficient pair: delta=%.6g p=%.6g\n", rep.sufficient_pair->first, rep.sufficient_pair->second);
        rec.emplace_back("delta", g17(rep.sufficient_pair->first));
        rec.emplace_back("p", g17(rep.sufficient_pair->second));
    }
    ensure_output_dir(inv.config);
    write_record(inv, rec);
    switch (rep.verdict) {
        case Verdict::Finite: return kOk;
        case Verdict::Infinite: return kInfinite;
        case Verdict::Unknown: return kUnknown;
    }
    return kUnknown;
}

// ---- solve -----------------------------------------------------------------------------------

Table solution_table(const GridFunction& K, const GridFunction& N_pow, const GridFunction& c) {
    Table t{{"r", "K", "N_pow", "c_hat"}, {}};
    for (std::size_t i = 0; i < K.size(); ++i) t.rows.push_back({K.grid().node(i), K[i], N_pow[i], c[i]});
    return t;
}

Table trace_table(const IterationTrace& trace, bool timing) {
    Table t{{"m", "n", "sup_increment", "min_increment", "max_bound_violation", "seconds"}, {}};
    for (const TraceRow& r : trace.rows)
        t.rows.push_back({static_cast<double>(r.m), static_cast<double>(r.n), r.sup_increment, r.min_increment,
                          r.max_bound_violation, timing ? r.seconds : 0.0});
    return t;
}

void write_figure1(const RunConfig& c, const Solution& sol) {
    Panel p{"K iterates and the supersolution bound", "r", "K", {}};
    const std::vector<double> r = sol.K.grid().coordinates();
    // Last inner iterate of each outer step.
    for (std::size_t k = 0; k < sol.iterates.size(); ++k) {
        const bool last_of_m = k + 1 == sol.iterates.size() || sol.trace.rows[k + 1].m != sol.trace.rows[k].m;
        if (!last_of_m) continue;
        const auto v = sol.iterates[k].values();
        p.series.push_back({r, {v.begin(), v.end()}, "#3b6fb6", 1.0, false, ""});
    }
    if (!p.series.empty()) p.series.back().label = "K^m";
    const auto nv = sol.N_pow.values();
    p.series.push_back({r, {nv.begin(), nv.end()}, "#b03a2e", 1.4, true,
                        sol.spec.variant == Variant::B ? "K_U" : "N^(1-alpha)"});
    if (sol.K_lower) {
        const auto lv = sol.K_lower->values();
        p.series.push_back({r, {lv.begin(), lv.end()}, "#2e8b57", 1.2, true, "K_L"});
    }
    write_svg(path_in(c, "figure1.svg"), render_svg({p}, 1, 640, 420));
}

int cmd_solve(const Invocation& inv, Variant variant) {
    RunConfig c = inv.config;
    c.spec.variant = variant;
    validate(c.spec);
    if (!c.solver.force) {
        const FeasibilityReport rep = classify(c.spec);
        if (rep.verdict != Verdict::Finite) {
            std::cerr << "feasibility gate: " << to_string(rep.verdict) << " (" << rep.reason
                      << "); rerun with --force to solve anyway\n";
            return rep.verdict == Verdict::Infinite ? kInfinite : kUnknown;
        }
    }
    SolverConfig sc = c.solver;
    sc.force = true;  // gate handled above
    ensure_output_dir(c);
    const auto t0 = std::chrono::steady_clock::now();

    if (variant == Variant::C) {
        const UniformGrid& g = std::holds_alternative<InvariantInterval>(c.spec.model) ? solve_grid(c.spec, sc) : sc.grid;
        const GridFunction N = supersolution_N_grid(c.spec, g);
        std::vector<double> k(g.nodes), cc(g.nodes);
        for (std::size_t i = 0; i < g.nodes; ++i) {
            k[i] = std::pow(N[i], 1.0 - c.spec.alpha);
            cc[i] = std::pow(k[i], 1.0 / (c.spec.alpha - 1.0));
        }
        const GridFunction K(g, k);
        const BetaHat beta = beta_hat(c.spec, g);
        Table t = solution_table(K, K, GridFunction(g, cc));
        t.columns.insert(t.columns.end(), {"beta_hat", "eta"});
        const double vs = 1.0;
        const double b = std::holds_alternative<Vasicek>(c.spec.model) ? std::get<Vasicek>(c.spec.model).b : 0.0;
        for (std::size_t i = 0; i < g.nodes; ++i) {
            t.rows[i].push_back(beta.via_K[i]);
            t.rows[i].push_back(b > 0.0 ? eta_from_beta(beta.via_K[i], vs, b).eta : std::nan(""));
        }
        // NaN is not a CSV number here; drop the column outside Vasicek.
        if (!(b > 0.0)) {
            t.columns.pop_back();
            for (auto& row : t.rows) row.pop_back();
        }
        write_csv(path_in(c, "solution.csv"), t);
        const double worst = central_sup(hjb_bonds_residual(c.spec, K), g);
        std::printf("variant C: K = N^(1-alpha) on %zu nodes; K(%.4g) = %.10g; bond-HJB residual (central half) %.3g\n",
                    g.nodes, c.r0, K.eval(c.r0), worst);
        write_record(inv, {{"variant", "C"}, {"bond_residual_central", g17(worst)}});
        return kOk;
    }

    Solution sol;
    try {
        sol = variant == Variant::B ? solve_problem_b(c.spec, sc) : solve_problem_a(c.spec, sc);
    } catch (const MonotonicityViolation& e) {
        write_csv(path_in(c, "trace.csv"), trace_table(e.trace(), c.timing));
        throw;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_csv(path_in(c, "solution.csv"), solution_table(sol.K, sol.N_pow, sol.policy_c));
    write_csv(path_in(c, "trace.csv"), trace_table(sol.trace, c.timing));
    if (c.emit_plots) write_figure1(c, sol);

    double worst_bound = -INFINITY;
    for (std::size_t i = 0; i < sol.K.size(); ++i) worst_bound = std::max(worst_bound, sol.K[i] - sol.N_pow[i]);
    const double residual = central_sup(hjb_residual(c.spec, sol.K), sol.K.grid());
    std::printf("variant %s: m_final=%zu converged=%s steps=%zu\n", variant == Variant::B ? "B" : "A", sol.m_final,
                sol.converged ? "yes" : "no", sol.trace.rows.size());
    std::printf("K(%.4g) = %.10g, max(K - bound) = %.3g, HJB residual (central half) = %.3g\n", c.r0,
                sol.K.eval(c.r0), worst_bound, residual);
    if (c.timing) std::printf("wall time %.2f s\n", seconds);
    write_record(inv, {{"variant", variant == Variant::B ? "B" : "A"},
                       {"m_final", std::to_string(sol.m_final)},
                       {"converged", sol.converged ? "true" : "false"},
                       {"max_bound_gap", g17(worst_bound)},
                       {"residual_central", g17(residual)},
                       {"seconds", c.timing ? g17(seconds) : "0"}});
    return kOk;
}

// ---- solution loading ------------------------------------------------------------------------

struct LoadedSolution {
    GridFunction K;
    GridFunction policy;
    Table table;
};

LoadedSolution load_solution(const RunConfig& c) {
    const std::string file = c.solution_file.empty() ? path_in(c, "solution.csv") : c.solution_file;
    if (!fs::exists(file)) throw NoSolution("no solution file at " + file + "; run solve first");
    LoadedSolution out;
    out.table = read_csv(file);
    const std::vector<double> r = out.table.values("r");
    const std::vector<double> k = out.table.values("K");
    if (r.size() < 3) throw InvalidInput(file + ": a solution needs at least 3 rows");
    const UniformGrid g{r.front(), r.back(), r.size()};
    for (std::size_t i = 0; i < r.size(); ++i)
        if (std::abs(r[i] - g.node(i)) > 1e-9 * std::max(1.0, std::abs(g.r_max - g.r_min)))
            throw InvalidInput(file + ": r column is not a uniform grid");
    out.K = GridFunction(g, k);
    std::vector<double> pc(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(k[i] > 0.0)) throw InvalidInput(file + ": K must be positive to define a policy");
        pc[i] = std::pow(k[i], 1.0 / (c.spec.alpha - 1.0));
    }
    out.policy = GridFunction(g, std::move(pc));
    return out;
}

// ---- simulate --------------------------------------------------------------------------------

void write_figure2(const RunConfig& c, const Trajectory& tr) {
    auto panel = [&](const std::string& title, const std::vector<double>& y) {
        return Panel{title, "t", "", {{tr.t, y, "#1f4e9a", 1.0, false, ""}}};
    };
    write_svg(path_in(c, "figure2.svg"), render_svg({panel("r(t)", tr.r), panel("V(t)", tr.V), panel("C(t)", tr.C),
                                                     panel("c(t)", tr.c)},
                                                    2));
}

int cmd_simulate(const Invocation& inv) {
    const RunConfig& c = inv.config;
    const LoadedSolution sol = load_solution(c);
    ensure_output_dir(c);
    const Trajectory path = sample_path(c.spec.model, c.r0, c.paths, c.path_index);
    const Trajectory tr = wealth_trajectory(path, sol.policy, c.v, c.spec.variant == Variant::B);
    Table t{{"t", "r", "V", "C", "c"}, {}};
    for (std::size_t k = 0; k < tr.t.size(); ++k) t.rows.push_back({tr.t[k], tr.r[k], tr.V[k], tr.C[k], tr.c[k]});
    write_csv(path_in(c, "trajectory.csv"), t);
    if (c.emit_plots) write_figure2(c, tr);
    std::printf("simulated %zu steps from r0=%.4g, v=%.4g; V(T)=%.6g%s\n", tr.t.size() - 1, c.r0, c.v, tr.V.back(),
                tr.tau_zero ? (", hit r=0 at t=" + g17(*tr.tau_zero)).c_str() : "");
    std::vector<std::pair<std::string, std::string>> rec{{"steps", std::to_string(tr.t.size() - 1)},
                                                         {"V_end", g17(tr.V.back())}};
    if (tr.tau_zero) rec.emplace_back("tau_zero", g17(*tr.tau_zero));
    if (tr.clamp_events) rec.emplace_back("clamp_events", std::to_string(tr.clamp_events));
    write_record(inv, rec);
    return kOk;
}

// ---- estimate --------------------------------------------------------------------------------

int cmd_estimate(const Invocation& inv) {
    const RunConfig& c = inv.config;
    const LoadedSolution sol = load_solution(c);
    ensure_output_dir(c);
    if (c.paths.n_paths < 2) throw InvalidInput("paths.n_paths must be at least 2 for an estimate");
    Estimate e;
    try {
        e = estimate_J(c.spec, sol.policy, c.r0, c.v, c.paths, c.threads);
    } catch (const NumericalError& err) {
        std::cerr << "divergence guard: " << err.what() << "\n";
        write_record(inv, {{"status", "divergent"}});
        return kInfinite;
    }
    const double pde = sol.K.eval(c.r0) * std::pow(c.v, c.spec.alpha);
    // The truncation tail is treated as an additional one-sided uncertainty.
    const double scale = std::sqrt(e.std_error * e.std_error + e.tail_bound * e.tail_bound);
    const double z = scale > 0.0 ? (e.mean - pde) / scale : (e.mean == pde ? 0.0 : INFINITY);
    std::printf("J_estimate=%.10g SE=%.4g pde_value=%.10g z=%.3f tail_bound=%.3g\n", e.mean, e.std_error, pde, z,
                e.tail_bound);
    write_record(inv, {{"J_estimate", g17(e.mean)},
                       {"SE", g17(e.std_error)},
                       {"pde_value", g17(pde)},
                       {"z", g17(z)},
                       {"tail_bound", g17(e.tail_bound)}});
    return std::abs(z) <= 3.0 ? kOk : kZScore;
}

// ---- residual --------------------------------------------------------------------------------

int cmd_residual(const Invocation& inv) {
    const RunConfig& c = inv.config;
    const LoadedSolution sol = load_solution(c);
    ensure_output_dir(c);
    const bool bonds = c.spec.variant == Variant::C;
    const HjbResidual res = bonds ? hjb_bonds_residual(c.spec, sol.K) : hjb_residual(c.spec, sol.K);
    Table t{{"r", "raw", "relative"}, {}};
    for (std::size_t i = 0; i < res.r.size(); ++i) t.rows.push_back({res.r[i], res.raw[i], res.relative[i]});
    write_csv(path_in(c, "residual.csv"), t);
    const double worst = central_sup(res, sol.K.grid());
    std::printf("%s residual: sup relative on the central half-window = %.4g\n", bonds ? "bond-HJB" : "HJB", worst);
    write_record(inv, {{"residual_central", g17(worst)}});
    return kOk;
}

}  // namespace

int run_command(const Invocation& inv) {
    if (inv.command == "feasibility") return cmd_feasibility(inv);
    if (inv.command == "solve") return cmd_solve(inv, inv.config.spec.variant);
    if (inv.command == "solve-b") return cmd_solve(inv, Variant::B);
    if (inv.command == "solve-c") return cmd_solve(inv, Variant::C);
    if (inv.command == "simulate") return cmd_simulate(inv);
    if (inv.command == "estimate") return cmd_estimate(inv);
    if (inv.command == "residual") return cmd_residual(inv);
    throw InvalidInput("unknown command '" + inv.command + "'");
}

int run_guarded(const Invocation& inv) {
    try {
        return run_command(inv);
    } catch (const NoSolution& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNoSolution;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kInfinite;
    } catch (const NumericalError& e) {
        std::cerr << "solver aborted: " << e.what() << "\n";
        return kSolverAbort;
    }
}

}  // namespace shortrate::cli
