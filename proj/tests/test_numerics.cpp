#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "shortrate/errors.hpp"
#include "shortrate/grid.hpp"
#include "shortrate/numerics.hpp"

using namespace shortrate;

TEST_CASE("tridiagonal solve reproduces a known vector") {
    const std::vector<double> lo{0, -1, -1, -1}, di{2, 2, 2, 2}, up{-1, -1, -1, 0};
    const std::vector<double> x{1, 2, 3, 4};
    std::vector<double> rhs(4);
    for (int i = 0; i < 4; ++i)
        rhs[i] = di[i] * x[i] + (i > 0 ? lo[i] * x[i - 1] : 0.0) + (i < 3 ? up[i] * x[i + 1] : 0.0);
    const auto sol = solve_tridiagonal(lo, di, up, rhs);
    for (int i = 0; i < 4; ++i) CHECK(sol[i] == doctest::Approx(x[i]).epsilon(1e-14));
    const std::vector<double> zero{0, 0, 0, 0};
    CHECK_THROWS_AS(solve_tridiagonal(zero, zero, zero, rhs), NumericalError);
}

TEST_CASE("quadrature rules") {
    auto f = [](double x) { return std::exp(-x) * std::cos(3.0 * x); };
    const double exact = (1.0 - std::exp(-2.0) * (std::cos(6.0) - 3.0 * std::sin(6.0))) / 10.0;
    CHECK(romberg(f, 0.0, 2.0) == doctest::Approx(exact).epsilon(1e-12));
    CHECK(gauss_legendre(f, 0.0, 2.0, 24) == doctest::Approx(exact).epsilon(1e-13));
    CHECK(gauss_legendre([](double x) { return x * x * x * x * x; }, -1.0, 2.0, 3) ==
          doctest::Approx(10.5).epsilon(1e-14));
}

TEST_CASE("exponential hat weights integrate exp(-kappa s) against the hats") {
    for (double kappa : {0.0, 1e-3, 2.0, 40.0, 200.0}) {
        const double h = 0.05;
        const HatWeights w = exponential_hat_weights(kappa, h);
        const double first = romberg([&](double s) { return std::exp(-kappa * s) * (1.0 - s / h); }, 0.0, h, 1e-14);
        const double second = romberg([&](double s) { return std::exp(-kappa * s) * s / h; }, 0.0, h, 1e-14);
        CHECK(w.first == doctest::Approx(first).epsilon(1e-12));
        CHECK(w.second == doctest::Approx(second).epsilon(1e-12));
    }
}

TEST_CASE("path streams differ across seeds and paths and repeat exactly") {
    auto a = path_rng(1, 0), b = path_rng(1, 0), c = path_rng(2, 0), d = path_rng(1, 1);
    const auto xa = a();
    CHECK(xa == b());
    CHECK(xa != c());
    CHECK(xa != d());
    // Neighbouring (seed, path) pairs must not share streams.
    std::set<std::uint64_t> first;
    for (std::uint64_t s = 0; s < 20; ++s)
        for (std::uint64_t p = 0; p < 20; ++p) first.insert(path_rng(s, p)());
    CHECK(first.size() == 400);
}

TEST_CASE("normal sampler moments") {
    auto rng = path_rng(42, 0);
    NormalSampler z;
    const int n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = z(rng);
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    CHECK(std::abs(s1 / n) < 5.0 / std::sqrt(n));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("parallel_for covers every index once and forwards errors") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 7, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 5) throw NumericalError("boom");
                    }),
                    NumericalError);
}

TEST_CASE("sample statistics") {
    const std::vector<double> xs{1, 2, 3, 4};
    const SampleStats s = sample_stats(xs);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("grid functions") {
    const UniformGrid g{0.0, 1.0, 11};
    CHECK(g.step() == doctest::Approx(0.1));
    CHECK(g.node(10) == 1.0);
    CHECK_THROWS_AS((UniformGrid{1.0, 0.0, 11}.validate()), InvalidInput);
    CHECK_THROWS_AS((UniformGrid{0.0, 1.0, 2}.validate()), InvalidInput);

    std::vector<double> v(11);
    for (std::size_t i = 0; i < 11; ++i) v[i] = 2.0 * g.node(i) + 1.0;
    const GridFunction f(g, v);
    CHECK(f.eval(0.35) == doctest::Approx(1.7));
    CHECK(f.eval(-1.0) == doctest::Approx(1.0));
    CHECK(f.eval(2.0, Extension::linear()) == doctest::Approx(5.0));
    CHECK(f.eval(2.0, Extension::envelope(1.0)) == doctest::Approx(3.0 * std::exp(1.0)));
    for (double d : f.derivative()) CHECK(d == doctest::Approx(2.0));

    std::vector<double> sq(11);
    for (std::size_t i = 0; i < 11; ++i) sq[i] = g.node(i) * g.node(i);
    for (double d : GridFunction(g, sq).second_derivative()) CHECK(d == doctest::Approx(2.0));

    const GridFunction sub = f.resample(UniformGrid{0.2, 0.6, 5});
    CHECK(sub[2] == doctest::Approx(1.8));
    CHECK_THROWS_AS(f.resample(UniformGrid{-0.1, 0.6, 5}), InvalidInput);
    CHECK_THROWS_AS(GridFunction(g, std::vector<double>(3, 0.0)), InvalidInput);
    std::vector<double> bad(11, 0.0);
    bad[3] = NAN;
    CHECK_THROWS_AS(GridFunction(g, bad), NumericalError);
}
