// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any fails.
// Usage: acceptance <path to the shortrate CLI binary> [scratch directory]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "shortrate/errors.hpp"
#include "shortrate/feasibility.hpp"
#include "shortrate/gaussian.hpp"
#include "shortrate/hjb_solver.hpp"
#include "shortrate/numerics.hpp"
#include "shortrate/portfolio.hpp"
#include "shortrate/resolvent.hpp"
#include "shortrate/simulate.hpp"

using namespace shortrate;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

bool in_central_half(double r, const UniformGrid& g) {
    const double w = g.r_max - g.r_min;
    return r >= g.r_min + 0.25 * w - 1e-12 && r <= g.r_max - 0.25 * w + 1e-12;
}

double central_sup(const HjbResidual& res, const UniformGrid& g) {
    double worst = 0.0;
    for (std::size_t i = 0; i < res.r.size(); ++i)
        if (in_central_half(res.r[i], g)) worst = std::max(worst, std::abs(res.relative[i]));
    return worst;
}

// Shared by criteria 2 and 5.
const Solution& vasicek_desk_solution() {
    static const Solution sol = solve_problem_a(ProblemSpec{}, SolverConfig{});
    return sol;
}

Outcome constant_rate_oracle() {
    ProblemSpec s;
    s.model = ConstantRate{0.05};
    s.gamma = 0.1;
    SolverConfig c;
    c.n_max = 200;
    const Solution sol = solve_problem_a(s, c);
    const double exact = std::pow(0.15, -0.5);
    double worst = 0.0;
    for (double k : sol.K.values()) worst = std::max(worst, std::abs(k / exact - 1.0));
    return {sol.converged && worst <= 1e-4, fmt("max relative error %.3g vs (0.15)^-0.5 = %.7f", worst, exact)};
}

Outcome vasicek_shape() {
    const Solution& sol = vasicek_desk_solution();
    double worst_drop = 0.0;
    for (std::size_t k = 1; k < sol.iterates.size(); ++k)
        for (std::size_t i = 0; i < sol.K.size(); ++i)
            worst_drop = std::max(worst_drop, sol.iterates[k - 1][i] - sol.iterates[k][i]);
    double worst_bound = -INFINITY;
    for (std::size_t i = 0; i < sol.K.size(); ++i) worst_bound = std::max(worst_bound, sol.K[i] - sol.N_pow[i]);
    const double residual = central_sup(hjb_residual(sol.spec, sol.K), sol.K.grid());
    const bool ok = sol.converged && worst_drop <= 1e-5 && worst_bound <= 1e-5 && residual <= 1e-3;
    return {ok, fmt("max iterate decrease %.3g, max(K - N^(1-alpha)) %.3g, central residual %.3g, K(0.05) %.7f",
                    worst_drop, worst_bound, residual, sol.K.eval(0.05))};
}

Outcome thresholds() {
    const GammaThresholds g = gamma_thresholds(ProblemSpec{});
    const double g2 = 0.060848528137423857;  // tests/oracles/oracle_values.py
    ProblemSpec bm, gbm;
    bm.model = DriftedBM{};
    gbm.model = GeometricBM{};
    const bool verdicts = classify(bm).verdict == Verdict::Infinite && classify(gbm).verdict == Verdict::Infinite;
    const bool ok = std::abs(g.gamma1 - 0.0308) <= 1e-9 && std::abs(g.gamma2 - g2) <= 1e-9 && verdicts;
    return {ok, fmt("gamma1 %.12f, gamma2 %.12f (expected %.12f), BM/GBM infinite %.0f", g.gamma1, g.gamma2, g2,
                    verdicts ? 1.0 : 0.0)};
}

// Independent sampler: exact AR(1) transitions of r on a fine mesh, h by the trapezoid rule.
Outcome gaussian_moments() {
    const Vasicek m{};
    const double r0 = 0.05;
    const std::vector<double> horizons{0.1, 1.0, 5.0};
    const std::size_t n = 1'000'000;
    std::vector<std::vector<double>> rs(3, std::vector<double>(n)), hs(3, std::vector<double>(n));

    struct Mesh {
        double dt, decay, sd;
    };
    auto mesh = [&](double dt) {
        return Mesh{dt, std::exp(-m.b * dt), m.sigma * std::sqrt(-std::expm1(-2.0 * m.b * dt) / (2.0 * m.b))};
    };
    const Mesh fine = mesh(0.001), coarse = mesh(0.01);
    const double level = m.a / m.b;
    for (std::size_t p = 0; p < n; ++p) {
        auto rng = path_rng(20240601, p);
        NormalSampler normal;
        double r = r0, h = 0.0;
        auto advance = [&](const Mesh& ms, std::size_t steps) {
            for (std::size_t k = 0; k < steps; ++k) {
                const double next = level + (r - level) * ms.decay + ms.sd * normal(rng);
                h += 0.5 * (r + next) * ms.dt;
                r = next;
            }
        };
        advance(fine, 100);
        rs[0][p] = r, hs[0][p] = h;
        advance(coarse, 90);
        rs[1][p] = r, hs[1][p] = h;
        advance(coarse, 400);
        rs[2][p] = r, hs[2][p] = h;
    }

    bool ok = true;
    double worst = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const JointMoments mo = ou_moments(m, r0, horizons[k]);
        const std::vector<double>& x = rs[k];
        const std::vector<double>& y = hs[k];
        const double dn = static_cast<double>(n);
        double mx = 0.0, my = 0.0;
        for (std::size_t p = 0; p < n; ++p) mx += x[p], my += y[p];
        mx /= dn, my /= dn;
        double sxx = 0.0, syy = 0.0, sxy = 0.0, qxx = 0.0, qyy = 0.0, qxy = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            const double dx = x[p] - mx, dy = y[p] - my;
            sxx += dx * dx, syy += dy * dy, sxy += dx * dy;
            qxx += dx * dx * dx * dx, qyy += dy * dy * dy * dy, qxy += dx * dx * dy * dy;
        }
        const double vx = sxx / (dn - 1.0), vy = syy / (dn - 1.0), cxy = sxy / (dn - 1.0);
        // Delta-method standard errors of the sample mean, variance and covariance.
        const double se_mx = std::sqrt(vx / dn), se_my = std::sqrt(vy / dn);
        const double se_vx = std::sqrt(std::max(qxx / dn - vx * vx, 0.0) / dn);
        const double se_vy = std::sqrt(std::max(qyy / dn - vy * vy, 0.0) / dn);
        const double se_c = std::sqrt(std::max(qxy / dn - cxy * cxy, 0.0) / dn);
        const double z[] = {(mx - mo.mean_r) / se_mx, (vx - mo.var_r) / se_vx, (my - mo.mean_h) / se_my,
                            (vy - mo.var_h) / se_vy, (cxy - mo.cov_rh) / se_c};
        for (double zi : z) {
            worst = std::max(worst, std::abs(zi));
            if (!(std::abs(zi) <= 4.0)) ok = false;
        }
    }
    return {ok, fmt("max |z| over 5 moments x 3 horizons: %.2f (10^6 paths)", worst)};
}

Outcome pde_mc_consistency() {
    const Solution& sol = vasicek_desk_solution();
    PathConfig cfg;
    cfg.dt = 0.0025;
    cfg.t_max = 40.0;
    cfg.n_paths = 10000;
    cfg.seed = 1;
    const double v = 3.0, r0 = 0.05;
    const Estimate e = estimate_J(sol.spec, sol.policy_c, r0, v, cfg);
    const double pde = sol.K.eval(r0) * std::pow(v, sol.spec.alpha);
    const double z = (e.mean - pde) / std::sqrt(e.std_error * e.std_error + e.tail_bound * e.tail_bound);
    return {std::abs(z) <= 3.0, fmt("J %.8f, K(r0) v^alpha %.8f, SE %.3g, z %.2f", e.mean, pde, e.std_error, z)};
}

Outcome problem_b() {
    ProblemSpec s;
    s.variant = Variant::B;
    const SolverConfig c;
    const Solution sol = solve_problem_b(s, c);
    bool ok = sol.K_lower && sol.K_upper && sol.K[0] == 1.0;
    double worst_lo = 0.0, worst_hi = 0.0;
    if (ok)
        for (std::size_t i = 0; i < sol.K.size(); ++i) {
            worst_lo = std::max(worst_lo, (*sol.K_lower)[i] - sol.K[i]);
            worst_hi = std::max(worst_hi, sol.K[i] - (*sol.K_upper)[i]);
        }
    ok = ok && worst_lo <= 0.0 && worst_hi <= 1e-5;
    const double kl = compute_KL(s, c).eval(0.05);
    PathConfig cfg;
    cfg.dt = 0.01;
    cfg.t_max = 12.0;
    cfg.n_paths = 100000;
    cfg.seed = 1;
    const Estimate e = estimate_KL_mc(s, 0.05, cfg);
    const double z = (e.mean - kl) / e.std_error;
    ok = ok && std::abs(z) <= 3.0;
    return {ok, fmt("K(0) = %.17g, bracket violations %.3g / %.3g, K_L(0.05) z = %.2f", sol.K[0], worst_lo, worst_hi,
                    z)};
}

Outcome problem_c() {
    const ProblemSpec s;
    const UniformGrid g{0.0, 0.15, 76};
    const GridFunction N = supersolution_N_grid(s, g);
    std::vector<double> k(g.nodes);
    for (std::size_t i = 0; i < g.nodes; ++i) k[i] = std::pow(N[i], 1.0 - s.alpha);
    const double residual = central_sup(hjb_bonds_residual(s, GridFunction(g, k)), g);

    // Truncation of the centred difference, from a grid-halving comparison.
    const BetaHat coarse = beta_hat(s, g);
    const BetaHat fine = beta_hat(s, UniformGrid{0.0, 0.15, 151});
    double gap = 0.0, allowed_min = INFINITY;
    bool beta_ok = true;
    for (std::size_t i = 0; i < g.nodes; ++i) {
        const double d = std::abs(coarse.via_K[i] - coarse.via_N[i]);
        const double trunc = 4.0 / 3.0 * std::abs(coarse.via_K[i] - fine.via_K[2 * i]);
        gap = std::max(gap, d);
        allowed_min = std::min(allowed_min, 1e-6 + trunc);
        if (d > 1e-6 + trunc) beta_ok = false;
    }
    const double quad = gauss_legendre([](double u) { return std::exp(-u) * -bond_loading(0.5, u); }, 0.0, 60.0, 200);
    const double ups = upsilon(1.0, 0.5);
    const bool ok = residual <= 1e-3 && beta_ok && std::abs(ups - quad) <= 1e-9;
    return {ok, fmt("bond residual %.3g, max |beta_K - beta_N| %.3g, Upsilon %.12f vs quadrature %.12f", residual, gap,
                    ups, quad)};
}

Outcome semigroup_bound() {
    const ProblemSpec s;
    const Vasicek& m = std::get<Vasicek>(s.model);
    const double al = s.alpha;
    const UniformGrid g{-1.5, 1.5, 1501};
    std::vector<double> phi(g.nodes);
    for (std::size_t i = 0; i < g.nodes; ++i) phi[i] = std::exp(-g.node(i) * g.node(i));
    const GridFunction f(g, phi);
    auto norm = [&](const GridFunction& u) {
        double best = 0.0;
        for (std::size_t i = 0; i < g.nodes; ++i)
            best = std::max(best, std::abs(u[i]) * std::exp(-(al / m.b) * std::abs(g.node(i))));
        return best;
    };
    const double base = norm(f);
    bool ok = true;
    std::string detail;
    for (double t : {0.5, 1.0, 2.0}) {
        const double lhs = norm(semigroup_apply(s, f, t));
        const double rhs = 2.0 * std::exp((al * al * m.sigma * m.sigma / (2.0 * m.b * m.b) + al * m.a / m.b) * t) * base;
        ok = ok && lhs <= rhs;
        detail += fmt("t=%.1f: %.5f <= %.5f; ", t, lhs, rhs);
    }
    return {ok, detail.substr(0, detail.size() - 2)};
}

Outcome backend_agreement() {
    const ProblemSpec s;
    const SolverConfig c;
    const UniformGrid solve = solve_grid(s, c);
    const GridFunction one = GridFunction::constant(solve, 1.0);
    const double lambda = lambda_schedule(s, c, 1);
    const GridFunction q = resolvent_quadrature(s, one, lambda, QuadratureBackend{});
    const GridFunction f = resolvent_fd(s, one, lambda);
    double worst = 0.0;
    for (std::size_t i = 0; i < solve.nodes; ++i)
        if (in_central_half(solve.node(i), c.grid)) worst = std::max(worst, std::abs(f[i] / q[i] - 1.0));
    MonteCarloBackend mc;
    mc.paths = 20000;
    mc.seed = 1;
    const std::vector<double> rates{0.0375, 0.05, 0.075, 0.1, 0.1125};
    const auto est = resolvent_mc_at(s, one, lambda, mc, rates);
    double worst_z = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k)
        worst_z = std::max(worst_z, std::abs(est[k].mean - q.eval(rates[k])) / est[k].std_error);
    return {worst <= 1e-3 && worst_z <= 3.0,
            fmt("quadrature/FD max relative gap %.3g, MC max |z| %.2f at 5 rates", worst, worst_z)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string result_lines(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::string line, out;
    while (std::getline(in, line))
        if (line.rfind("result.", 0) == 0) out += line + "\n";
    return out;
}

Outcome determinism(const std::string& cli, const fs::path& scratch) {
    if (cli.empty()) return {false, "no CLI binary given"};
    const std::string shared =
        " --seed 11 --set output.timing=false --set paths.n_paths=2000 --set paths.t_max=10 --set paths.dt=0.01";
    const std::vector<std::string> commands{"solve", "simulate", "residual", "estimate"};
    const std::vector<std::string> csvs{"solution.csv", "trace.csv", "trajectory.csv", "residual.csv"};
    std::vector<fs::path> dirs;
    for (const char* threads : {"1", "4", "1"}) {
        const fs::path dir = scratch / ("determinism_" + std::to_string(dirs.size()));
        fs::remove_all(dir);
        for (const std::string& cmd : commands) {
            const std::string line = "\"" + cli + "\" " + cmd + shared + " --threads " + threads + " --output \"" +
                                     dir.string() + "\" > \"" + (dir.string() + "." + cmd + ".log") + "\" 2>&1";
            const int rc = std::system(line.c_str());
            if (rc != 0 && cmd != "estimate") return {false, cmd + " failed: " + line};
        }
        // estimate overwrites run.txt; keep the J line for comparison alongside the CSVs.
        dirs.push_back(dir);
    }
    std::size_t compared = 0;
    for (std::size_t k = 1; k < dirs.size(); ++k) {
        for (const std::string& name : csvs) {
            const std::string a = slurp(dirs[0] / name), b = slurp(dirs[k] / name);
            if (a.empty() || a != b) return {false, name + " differs between run 0 and run " + std::to_string(k)};
            ++compared;
        }
        if (result_lines(dirs[0] / "run.txt") != result_lines(dirs[k] / "run.txt"))
            return {false, "estimate result differs between run 0 and run " + std::to_string(k)};
    }
    return {true, std::to_string(compared) + " CSV comparisons byte-identical across threads 1/4/1"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const fs::path scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "shortrate_acceptance";
    fs::create_directories(scratch);

    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;  // 0: none
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "constant-rate oracle", 5.0, constant_rate_oracle},
        {2, "Vasicek monotone iteration, bound and residual", 300.0, vasicek_shape},
        {3, "feasibility thresholds and verdicts", 0.0, thresholds},
        {4, "Gaussian moments vs exact-transition Monte Carlo", 60.0, gaussian_moments},
        {5, "PDE vs Monte Carlo value", 120.0, pde_mc_consistency},
        {6, "hitting-time variant bracketing", 0.0, problem_b},
        {7, "bond-trading identities", 0.0, problem_c},
        {8, "semigroup growth bound", 0.0, semigroup_bound},
        {9, "resolvent backend agreement", 0.0, backend_agreement},
        {10, "determinism across thread counts", 0.0, [&] { return determinism(cli, scratch); }},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_seconds > 0.0 && secs > c.limit_seconds) {
            o.pass = false;
            o.detail += fmt("; exceeded the %.0f s budget", c.limit_seconds);
        }
        std::printf("criterion %2d %s: %s (%s) [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
