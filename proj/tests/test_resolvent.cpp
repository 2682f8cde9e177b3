#include <doctest.h>

#include <cmath>

#include "shortrate/errors.hpp"
#include "shortrate/gaussian.hpp"
#include "shortrate/resolvent.hpp"

using namespace shortrate;

namespace {

const double kLambda1 = 0.5 + 1e-5;
const UniformGrid kSolveGrid{-0.12, 0.27, 196};

// tests/oracles/oracle_values.py: int exp(-(lambda + gamma) t) E exp(alpha h_t) dt
struct Point {
    double r, u;
};
const Point kOnes[] = {{0.05, 0.49890286639929501}, {0.075, 0.50140408212897148}, {0.1, 0.50392625592411044}};

}  // namespace

TEST_CASE("quadrature resolvent of one matches the oracle") {
    const GridFunction u =
        resolvent_quadrature(ProblemSpec{}, GridFunction::constant(kSolveGrid, 1.0), kLambda1, QuadratureBackend{});
    for (const Point& p : kOnes) CHECK(u.eval(p.r) == doctest::Approx(p.u).epsilon(1e-6));
}

TEST_CASE("finite-difference resolvent of one matches the oracle") {
    FiniteDifferenceBackend fd;
    fd.refine = 4;
    const GridFunction u = resolvent_fd(ProblemSpec{}, GridFunction::constant(kSolveGrid, 1.0), kLambda1, fd);
    for (const Point& p : kOnes) CHECK(u.eval(p.r) == doctest::Approx(p.u).epsilon(1e-6));
}

TEST_CASE("Monte Carlo resolvent of one matches the oracle") {
    MonteCarloBackend mc;
    mc.paths = 20000;
    mc.seed = 3;
    const std::vector<double> rates{0.05, 0.1};
    const auto est = resolvent_mc_at(ProblemSpec{}, GridFunction::constant(kSolveGrid, 1.0), kLambda1, mc, rates, 4);
    REQUIRE(est.size() == 2);
    CHECK(std::abs(est[0].mean - kOnes[0].u) < 4.0 * est[0].std_error + 1e-4);
    CHECK(std::abs(est[1].mean - kOnes[2].u) < 4.0 * est[1].std_error + 1e-4);
    CHECK(est[0].std_error > 0.0);
}

TEST_CASE("constant model resolvent is exact for every backend") {
    ProblemSpec s;
    s.model = ConstantRate{0.05};
    s.gamma = 0.1;
    const UniformGrid g{0.0, 0.15, 16};
    std::vector<double> v(g.nodes);
    for (std::size_t i = 0; i < g.nodes; ++i) v[i] = 1.0 + g.node(i);
    const GridFunction psi(g, v);
    const double lam = 0.3;
    const GridFunction q = resolvent_quadrature(s, psi, lam, QuadratureBackend{});
    const GridFunction f = resolvent_fd(s, psi, lam);
    for (std::size_t i = 0; i < g.nodes; ++i) {
        CHECK(q[i] == doctest::Approx(v[i] / (lam + 0.1 - 0.025)).epsilon(1e-14));
        CHECK(f[i] == doctest::Approx(v[i] / (lam + 0.1 - 0.025)).epsilon(1e-12));
    }
}

TEST_CASE("resolvent is monotone in psi and in lambda") {
    const UniformGrid g{-0.12, 0.27, 40};
    std::vector<double> lo(g.nodes), hi(g.nodes);
    for (std::size_t i = 0; i < g.nodes; ++i) {
        lo[i] = 1.0 + std::sin(30.0 * g.node(i));
        hi[i] = lo[i] + 0.1 * (1.0 + std::cos(11.0 * g.node(i)));
    }
    const ProblemSpec s;
    const auto R = make_resolvent(s, g, kLambda1, QuadratureBackend{});
    const GridFunction ul = R->apply(GridFunction(g, lo));
    const GridFunction uh = R->apply(GridFunction(g, hi));
    const GridFunction ul2 = resolvent_quadrature(s, GridFunction(g, lo), kLambda1 + 1.0, QuadratureBackend{});
    const GridFunction fl = resolvent_fd(s, GridFunction(g, lo), kLambda1);
    const GridFunction fh = resolvent_fd(s, GridFunction(g, hi), kLambda1);
    for (std::size_t i = 0; i < g.nodes; ++i) {
        CHECK(uh[i] >= ul[i]);
        CHECK(ul2[i] <= ul[i]);
        CHECK(fh[i] >= fl[i]);
        CHECK(ul[i] > 0.0);
    }
}

TEST_CASE("prepared resolvent equals the one-shot call") {
    const UniformGrid g{-0.12, 0.27, 40};
    const GridFunction psi = GridFunction::constant(g, 2.0);
    for (const ResolventBackend& b : {ResolventBackend{QuadratureBackend{}}, ResolventBackend{FiniteDifferenceBackend{}}}) {
        const auto R = make_resolvent(ProblemSpec{}, g, 1.0, b);
        const GridFunction a = R->apply(psi);
        const GridFunction c = std::holds_alternative<QuadratureBackend>(b)
                                   ? resolvent_quadrature(ProblemSpec{}, psi, 1.0, QuadratureBackend{})
                                   : resolvent_fd(ProblemSpec{}, psi, 1.0);
        CHECK(sup_abs_difference(a, c) < 1e-14);
    }
}

TEST_CASE("coarse Robin rows break the M-matrix property") {
    const UniformGrid g{-1.0, 1.0, 5};
    CHECK_THROWS_AS(resolvent_fd(ProblemSpec{}, GridFunction::constant(g, 1.0), kLambda1), NumericalError);
}

TEST_CASE("interval model resolvent is bracketed by the end rates") {
    ProblemSpec s;
    s.model = InvariantInterval{};
    s.gamma = 0.1;
    const UniformGrid g{0.0, 0.1, 101};
    const double lam = 1.0;
    const GridFunction u = resolvent_fd(s, GridFunction::constant(g, 1.0), lam);
    for (std::size_t i = 0; i < g.nodes; ++i) {
        CHECK(u[i] >= 1.0 / 1.1 - 1e-9);
        CHECK(u[i] <= 1.0 / 1.05 + 1e-9);
    }
    CHECK(u[90] > u[10]);
    CHECK(resolve_boundary(s, g, Boundary::automatic(), true).kind == Boundary::Kind::Degenerate);
    CHECK_THROWS_AS(resolve_boundary(s, UniformGrid{0.01, 0.1, 10}, Boundary::automatic(), true), InvalidInput);
    CHECK_THROWS_AS(resolvent_quadrature(s, GridFunction::constant(g, 1.0), lam, QuadratureBackend{}), InvalidInput);
}

TEST_CASE("Dirichlet data are honoured") {
    const UniformGrid g{0.0, 1.0, 101};
    const ShortRateModel m = Vasicek{1.0, 1.0, 0.5};
    std::vector<double> c(g.nodes, 0.0), f(g.nodes, 0.0);
    // c = 0, f = 0: solution is the scale function through the two data points, monotone between them.
    const auto u = solve_linear_bvp(m, g, c, f, Boundary::dirichlet(1.0), Boundary::dirichlet(3.0));
    CHECK(u.front() == doctest::Approx(1.0));
    CHECK(u.back() == doctest::Approx(3.0));
    for (std::size_t i = 1; i < g.nodes; ++i) CHECK(u[i] >= u[i - 1]);
}

TEST_CASE("resolvent rejects a subcritical lambda") {
    const UniformGrid g{-0.12, 0.27, 40};
    CHECK_THROWS_AS(resolvent_quadrature(ProblemSpec{}, GridFunction::constant(g, 1.0), -1.52, QuadratureBackend{}),
                    InvalidInput);
}
