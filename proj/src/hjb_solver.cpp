#include "shortrate/hjb_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "shortrate/feasibility.hpp"
#include "shortrate/gaussian.hpp"

namespace shortrate {

double clamp_F(double m, double alpha, double x) {
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidInput("truncation level must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("clamp_F requires finite x >= 0");
    const double threshold = std::pow(m, alpha - 1.0);
    if (x > threshold) return (1.0 - alpha) * std::pow(x, alpha / (alpha - 1.0));
    return std::pow(m, alpha) - alpha * m * x;
}

double lambda_schedule(const ProblemSpec& spec, const SolverConfig& config, std::size_t m) {
    double lam = spec.alpha * static_cast<double>(m) + config.eps2;
    if (config.theta) lam = std::max(lam, *config.theta - spec.gamma + config.eps1);
    return lam;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void gate(const ProblemSpec& spec, const SolverConfig& config) {
    if (config.force) return;
    const FeasibilityReport rep = classify(spec);
    if (rep.verdict != Verdict::Finite)
        throw Infeasible("feasibility gate: value is " + to_string(rep.verdict) + " (" + rep.reason + ")");
}

void check_config(const SolverConfig& config) {
    if (config.m_max < 1 || config.n_max < 1) throw InvalidInput("m_max and n_max must be at least 1");
    if (!(config.tol_n > 0.0) || !(config.tol_m > 0.0)) throw InvalidInput("tolerances must be positive");
    if (!(config.eps2 > 0.0)) throw InvalidInput("eps2 must be positive");
    config.grid.validate();
}

UniformGrid reporting_grid(const ProblemSpec& spec, const SolverConfig& config) {
    if (std::holds_alternative<InvariantInterval>(spec.model)) return solve_grid(spec, config);
    return config.grid;
}

GridFunction pointwise_policy(const GridFunction& K, double alpha) {
    std::vector<double> c(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) c[i] = std::pow(K[i], 1.0 / (alpha - 1.0));
    return GridFunction(K.grid(), std::move(c));
}

struct IterationOutcome {
    GridFunction K;
    IterationTrace trace;
    std::vector<GridFunction> iterates;
    std::size_t m_final = 0;
    bool converged = false;
};

// Picard double loop shared by both variants. `step(m, lambda)` returns the map psi -> K_next
// for fixed m; `report(K)` restricts to the reporting grid; `bound` is the upper bracket.
template <class MakeStep>
IterationOutcome double_loop(const ProblemSpec& spec, const SolverConfig& config, GridFunction K,
                             const GridFunction& bound, std::size_t report_offset, std::size_t report_nodes,
                             const UniformGrid& report, MakeStep make_step) {
    IterationOutcome out;
    const auto t0 = Clock::now();
    const double abort_level = -10.0 * config.backend_tolerance;
    for (std::size_t m = 1; m <= config.m_max; ++m) {
        const double lam = lambda_schedule(spec, config, m);
        const double md = static_cast<double>(m);
        auto apply = make_step(lam);
        const GridFunction K_start = K;
        bool inner_converged = false;
        for (std::size_t n = 1; n <= config.n_max; ++n) {
            std::vector<double> psi(K.size());
            for (std::size_t i = 0; i < K.size(); ++i) psi[i] = clamp_F(md, spec.alpha, std::max(K[i], 0.0)) + lam * K[i];
            GridFunction next = apply(GridFunction(K.grid(), std::move(psi)));
            TraceRow row;
            row.m = m;
            row.n = n;
            row.sup_increment = 0.0;
            row.min_increment = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < K.size(); ++i) {
                const double d = next[i] - K[i];
                row.sup_increment = std::max(row.sup_increment, std::abs(d));
                row.min_increment = std::min(row.min_increment, d);
            }
            row.max_bound_violation = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < report_nodes; ++i) {
                const std::size_t j = report_offset + i;
                row.max_bound_violation = std::max(row.max_bound_violation, next[j] - bound[j]);
            }
            row.seconds = seconds_since(t0);
            out.trace.rows.push_back(row);
            K = std::move(next);
            if (config.keep_iterates) out.iterates.push_back(K.resample(report));
            if (row.min_increment < abort_level) {
                std::ostringstream os;
                os << "iterate decreased by " << -row.min_increment << " at m = " << m << ", n = " << n;
                throw MonotonicityViolation(os.str(), out.trace);
            }
            if (row.sup_increment < config.tol_n) {
                inner_converged = true;
                break;
            }
        }
        out.m_final = m;
        const double outer = sup_abs_difference(K, K_start);
        if (m > 1 && inner_converged && outer < config.tol_m) {
            out.converged = true;
            break;
        }
    }
    out.K = std::move(K);
    return out;
}

}  // namespace

UniformGrid solve_grid(const ProblemSpec& spec, const SolverConfig& config) {
    config.grid.validate();
    if (const auto* m = std::get_if<InvariantInterval>(&spec.model)) return UniformGrid{m->a, m->b, config.grid.nodes};
    const auto* v = std::get_if<Vasicek>(&spec.model);
    if (!v) return config.grid;
    const double h = config.grid.step();
    const double pad = config.padding ? *config.padding : 6.0 * v->sigma / std::sqrt(2.0 * v->b);
    if (pad < 0.0) throw InvalidInput("padding must be non-negative");
    const std::size_t extra = static_cast<std::size_t>(std::ceil(pad / h - 1e-9));
    return UniformGrid{config.grid.r_min - static_cast<double>(extra) * h,
                       config.grid.r_max + static_cast<double>(extra) * h, config.grid.nodes + 2 * extra};
}

Solution solve_problem_a(const ProblemSpec& spec, const SolverConfig& config) {
    validate(spec);
    check_config(config);
    if (!std::holds_alternative<Vasicek>(spec.model) && !std::holds_alternative<InvariantInterval>(spec.model) &&
        !std::holds_alternative<ConstantRate>(spec.model))
        throw Infeasible("no finite solution for " + model_name(spec.model));
    gate(spec, config);
    const UniformGrid sg = solve_grid(spec, config);
    const UniformGrid rg = reporting_grid(spec, config);
    const std::size_t offset = static_cast<std::size_t>(std::llround((rg.r_min - sg.r_min) / sg.step()));

    const GridFunction N = supersolution_N_grid(spec, sg);
    std::vector<double> npow(sg.nodes);
    for (std::size_t i = 0; i < sg.nodes; ++i) npow[i] = std::pow(N[i], 1.0 - spec.alpha);
    const GridFunction bound(sg, std::move(npow));

    auto make_step = [&](double lam) {
        std::shared_ptr<Resolvent> R = make_resolvent(spec, sg, lam, config.backend, config.threads);
        return [R](const GridFunction& psi) { return R->apply(psi); };
    };
    IterationOutcome it = double_loop(spec, config, GridFunction::constant(sg, 0.0), bound, offset, rg.nodes, rg,
                                      make_step);

    Solution sol;
    sol.spec = spec;
    sol.K_solve = it.K;
    sol.K = it.K.resample(rg);
    sol.N_pow = bound.resample(rg);
    sol.policy_c = pointwise_policy(sol.K, spec.alpha);
    sol.trace = std::move(it.trace);
    sol.iterates = std::move(it.iterates);
    sol.m_final = it.m_final;
    sol.converged = it.converged;

    double worst = 0.0;
    for (std::size_t i = 0; i < rg.nodes; ++i) worst = std::max(worst, sol.K[i] - sol.N_pow[i]);
    if (worst > 10.0 * config.backend_tolerance) {
        std::ostringstream os;
        os << "solution exceeds the supersolution bound by " << worst;
        throw MonotonicityViolation(os.str(), sol.trace);
    }
    return sol;
}

namespace {

struct KlSolve {
    GridFunction fine;     // on [0, R]
    UniformGrid report;
};

UniformGrid b_reporting_grid(const SolverConfig& config) {
    const double h = config.grid.step();
    const double top = config.grid.r_max;
    if (!(top > 0.0)) throw InvalidInput("Problem B needs a reporting window with r_max > 0");
    const std::size_t n = static_cast<std::size_t>(std::llround(top / h)) + 1;
    return UniformGrid{0.0, static_cast<double>(n - 1) * h, n};
}

KlSolve kl_solve(const ProblemSpec& spec, const SolverConfig& config) {
    validate(spec);
    check_config(config);
    if (spec.variant != Variant::B) throw InvalidInput("K_L and the hitting-time solve require variant B");
    if (!std::holds_alternative<Vasicek>(spec.model))
        throw InvalidInput("the hitting-time variant is set up for the Vasicek model");
    const UniformGrid report = b_reporting_grid(config);
    const double h = report.step() / static_cast<double>(std::max<std::size_t>(1, config.kl_refine));
    std::size_t cells = 2 * (report.nodes - 1) * std::max<std::size_t>(1, config.kl_refine);
    std::optional<GridFunction> previous;
    for (int doubling = 0; doubling < 10; ++doubling, cells *= 2) {
        const UniformGrid g{0.0, static_cast<double>(cells) * h, cells + 1};
        std::vector<double> c(g.nodes), f(g.nodes, 0.0);
        for (std::size_t i = 0; i < g.nodes; ++i) c[i] = spec.gamma - spec.alpha * g.node(i);
        GridFunction u(g, solve_linear_bvp(spec.model, g, c, f, Boundary::dirichlet(1.0), Boundary::dirichlet(1.0)));
        GridFunction on_report = u.resample(report);
        if (previous) {
            double change = 0.0;
            for (std::size_t i = 0; i < report.nodes; ++i)
                change = std::max(change, std::abs(on_report[i] - (*previous)[i]) / std::abs(on_report[i]));
            if (change < config.tol_n) return {std::move(u), report};
        }
        previous = std::move(on_report);
    }
    throw NumericalError("K_L did not stabilise as the truncation point was doubled");
}

}  // namespace

GridFunction compute_KL(const ProblemSpec& spec, const SolverConfig& config) {
    KlSolve s = kl_solve(spec, config);
    return s.fine.resample(s.report);
}

Solution solve_problem_b(const ProblemSpec& spec, const SolverConfig& config) {
    KlSolve kl = kl_solve(spec, config);
    gate(spec, config);
    const UniformGrid& g = kl.fine.grid();
    const UniformGrid& rg = kl.report;

    std::vector<double> cN(g.nodes), one(g.nodes, 1.0);
    for (std::size_t i = 0; i < g.nodes; ++i) cN[i] = (spec.gamma - spec.alpha * g.node(i)) / (1.0 - spec.alpha);
    std::vector<double> Nt =
        solve_linear_bvp(spec.model, g, cN, one, Boundary::dirichlet(0.0), Boundary::dirichlet(0.0));
    std::vector<double> upper(g.nodes);
    for (std::size_t i = 0; i < g.nodes; ++i) upper[i] = kl.fine[i] + std::pow(std::max(Nt[i], 0.0), 1.0 - spec.alpha);
    const GridFunction KU(g, std::move(upper));

    auto make_step = [&](double lam) {
        std::vector<double> c(g.nodes);
        for (std::size_t i = 0; i < g.nodes; ++i) c[i] = lam + spec.gamma - spec.alpha * g.node(i);
        return [c = std::move(c), &spec, &g](const GridFunction& psi) {
            return GridFunction(g, solve_linear_bvp(spec.model, g, c, psi.values(), Boundary::dirichlet(1.0),
                                                    Boundary::dirichlet(1.0)));
        };
    };
    IterationOutcome it = double_loop(spec, config, kl.fine, KU, 0, g.nodes, rg, make_step);

    Solution sol;
    sol.spec = spec;
    sol.K_solve = it.K;
    sol.K = it.K.resample(rg);
    sol.K_lower = kl.fine.resample(rg);
    sol.K_upper = KU.resample(rg);
    sol.N_pow = *sol.K_upper;
    sol.policy_c = pointwise_policy(sol.K, spec.alpha);
    sol.trace = std::move(it.trace);
    sol.iterates = std::move(it.iterates);
    sol.m_final = it.m_final;
    sol.converged = it.converged;

    const double slack = 10.0 * config.backend_tolerance;
    for (std::size_t i = 0; i < g.nodes; ++i) {
        if (it.K[i] < kl.fine[i] - slack || it.K[i] > KU[i] + slack) {
            std::ostringstream os;
            os << "solution leaves the bracket [K_L, K_U] at r = " << g.node(i);
            throw MonotonicityViolation(os.str(), sol.trace);
        }
    }
    return sol;
}

double relative_consumption(const GridFunction& K, double alpha, double r) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
    const double k = K.eval(r);
    if (!(k > 0.0)) throw InvalidInput("K must be positive");
    return std::pow(k, 1.0 / (alpha - 1.0));
}

double optimal_consumption(const GridFunction& K, double alpha, double r, double v) {
    if (!(v > 0.0)) throw InvalidInput("wealth must be positive");
    return relative_consumption(K, alpha, r) * v;
}

HjbResidual hjb_residual(const ProblemSpec& spec, const GridFunction& K) {
    validate(spec);
    HjbResidual out;
    const std::vector<double> d1 = K.derivative();
    const std::vector<double> d2 = K.second_derivative();
    const double al = spec.alpha;
    for (std::size_t i = 1; i + 1 < K.size(); ++i) {
        const double r = K.grid().node(i);
        const double k = K[i];
        if (!(k > 0.0)) throw InvalidInput("K must be positive for the residual");
        const double raw = generator_apply(spec.model, r, d1[i], d2[i]) +
                           (al * state_rate(spec.model, r) - spec.gamma) * k + (1.0 - al) * std::pow(k, al / (al - 1.0));
        out.r.push_back(r);
        out.raw.push_back(raw);
        out.relative.push_back(raw / (1.0 + std::abs(k)));
    }
    return out;
}

}  // namespace shortrate
