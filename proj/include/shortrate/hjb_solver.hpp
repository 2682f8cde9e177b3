#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shortrate/errors.hpp"
#include "shortrate/grid.hpp"
#include "shortrate/model.hpp"
#include "shortrate/resolvent.hpp"

namespace shortrate {

/// Nonlinearity truncated below x = m^(alpha-1) by its tangent line; Lipschitz constant alpha m.
double clamp_F(double m, double alpha, double x);

struct SolverConfig {
    std::size_t m_max = 16;
    std::size_t n_max = 10;
    double eps1 = 1e-5;
    double eps2 = 1e-5;
    std::optional<double> theta;  // growth exponent of the weighted space; unset means no lower floor
    ResolventBackend backend = QuadratureBackend{};
    double tol_n = 1e-6;
    double tol_m = 1e-4;
    double backend_tolerance = 1e-6;
    UniformGrid grid{0.0, 0.15, 76};
    std::optional<double> padding;    // extra solve window on each side; unset: model default
    std::size_t kl_refine = 16;       // refinement of the Problem B grid
    std::size_t threads = 1;
    bool force = false;               // skip the feasibility gate
    bool keep_iterates = true;
};

double lambda_schedule(const ProblemSpec& spec, const SolverConfig& config, std::size_t m);

struct TraceRow {
    std::size_t m = 0;
    std::size_t n = 0;
    double sup_increment = 0.0;
    double min_increment = 0.0;
    double max_bound_violation = 0.0;
    double seconds = 0.0;
};

struct IterationTrace {
    std::vector<TraceRow> rows;
};

struct Solution {
    ProblemSpec spec;
    GridFunction K;         // on the reporting grid
    GridFunction N_pow;     // N^(1-alpha), or the upper bracket for Problem B
    GridFunction policy_c;  // K^(1/(alpha-1))
    GridFunction K_solve;   // on the full solve grid
    std::optional<GridFunction> K_lower;
    std::optional<GridFunction> K_upper;
    IterationTrace trace;
    std::vector<GridFunction> iterates;  // reporting-grid snapshot after every inner step
    std::size_t m_final = 0;
    bool converged = false;
};

/// Thrown when an iterate breaks monotonicity beyond tolerance; carries the trace so far.
class MonotonicityViolation : public NumericalError {
public:
    MonotonicityViolation(const std::string& what, IterationTrace trace)
        : NumericalError(what), trace_(std::move(trace)) {}
    const IterationTrace& trace() const { return trace_; }

private:
    IterationTrace trace_;
};

/// Solve grid used for Problem A: the reporting grid widened by the padding.
UniformGrid solve_grid(const ProblemSpec& spec, const SolverConfig& config);

Solution solve_problem_a(const ProblemSpec& spec, const SolverConfig& config);

/// Lower seed for Problem B: A_gamma K_L = 0 on (0, R), K_L(0) = K_L(R) = 1, R doubled until stable.
GridFunction compute_KL(const ProblemSpec& spec, const SolverConfig& config);

Solution solve_problem_b(const ProblemSpec& spec, const SolverConfig& config);

double relative_consumption(const GridFunction& K, double alpha, double r);
double optimal_consumption(const GridFunction& K, double alpha, double r, double v);

struct HjbResidual {
    std::vector<double> r;
    std::vector<double> raw;
    std::vector<double> relative;  // raw / (1 + |K|)
};

/// Q K + (alpha r - gamma) K + (1 - alpha) K^(alpha/(alpha-1)) at interior nodes.
HjbResidual hjb_residual(const ProblemSpec& spec, const GridFunction& K);

}  // namespace shortrate
