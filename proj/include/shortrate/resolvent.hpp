#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "shortrate/grid.hpp"
#include "shortrate/model.hpp"

namespace shortrate {

/// Time-and-space quadrature of the Feynman-Kac kernel (Vasicek, ConstantRate).
struct QuadratureBackend {
    double dt = 0.01;
    double dy = 0.002;
    double t_max = 0.0;        // 0: 30 / (lambda + gamma - growth rate of the semigroup)
    double y_halfwidth = 0.0;  // 0: six stationary standard deviations at t_max
    bool mass_correction = true;
};

/// Boundary treatment at one end of a finite-difference grid.
struct Boundary {
    enum class Kind { Auto, Robin, Dirichlet, Degenerate };
    Kind kind = Kind::Auto;
    double value = 0.0;  // Robin: u' = value * u. Dirichlet: u = value.

    static Boundary automatic() { return {Kind::Auto, 0.0}; }
    static Boundary robin(double k) { return {Kind::Robin, k}; }
    static Boundary dirichlet(double v) { return {Kind::Dirichlet, v}; }
    static Boundary degenerate() { return {Kind::Degenerate, 0.0}; }
};

struct FiniteDifferenceBackend {
    Boundary left = Boundary::automatic();
    Boundary right = Boundary::automatic();
    std::size_t refine = 1;  // solve on a grid `refine` times finer, sample back at the nodes
};

struct MonteCarloBackend {
    std::size_t paths = 10000;
    double dt = 0.01;
    double t_max = 15.0;
    std::uint64_t seed = 1;
};

using ResolventBackend = std::variant<QuadratureBackend, FiniteDifferenceBackend, MonteCarloBackend>;

/// u = (lambda + gamma - A)^{-1} psi, A = Q + alpha r.
GridFunction resolvent_quadrature(const ProblemSpec& spec, const GridFunction& psi, double lambda,
                                  const QuadratureBackend& backend, std::size_t threads = 1);

GridFunction resolvent_fd(const ProblemSpec& spec, const GridFunction& psi, double lambda,
                          const FiniteDifferenceBackend& backend = {});

struct PointEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

struct MonteCarloResolvent {
    GridFunction mean;
    std::vector<double> std_error;
};

MonteCarloResolvent resolvent_mc(const ProblemSpec& spec, const GridFunction& psi, double lambda,
                                 const MonteCarloBackend& backend, std::size_t threads = 1);

/// Same estimator at arbitrary starting rates.
std::vector<PointEstimate> resolvent_mc_at(const ProblemSpec& spec, const GridFunction& psi, double lambda,
                                           const MonteCarloBackend& backend, std::span<const double> rates,
                                           std::size_t threads = 1);

/// Solves c(r) u - Q u = f on the grid with the given end conditions.
/// Throws NumericalError when the discrete system is not an M-matrix.
std::vector<double> solve_linear_bvp(const ShortRateModel& model, const UniformGrid& grid,
                                     std::span<const double> c, std::span<const double> f, Boundary left,
                                     Boundary right);

/// End conditions chosen by `Auto` for the model and grid.
Boundary resolve_boundary(const ProblemSpec& spec, const UniformGrid& grid, Boundary requested, bool left_end);

/// N from Q N + ((alpha r - gamma)/(1 - alpha)) N + 1 = 0 by finite differences.
GridFunction solve_linear_fk_ode(const ProblemSpec& spec, const UniformGrid& grid,
                                 const FiniteDifferenceBackend& backend = {});

/// A resolvent with its kernel prepared once for a fixed lambda and grid.
class Resolvent {
public:
    virtual ~Resolvent() = default;
    virtual GridFunction apply(const GridFunction& psi) const = 0;
};

std::unique_ptr<Resolvent> make_resolvent(const ProblemSpec& spec, const UniformGrid& grid, double lambda,
                                          const ResolventBackend& backend, std::size_t threads = 1);

}  // namespace shortrate
