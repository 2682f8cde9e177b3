#pragma once

#include <optional>
#include <string>
#include <utility>

#include "shortrate/gaussian.hpp"
#include "shortrate/model.hpp"

namespace shortrate {

enum class Verdict { Finite, Infinite, Unknown };

std::string to_string(Verdict v);

/// Exponent c1 t + c2 t^2 + c3 t^3 bounding E exp(-gamma t + alpha h_t) from below,
/// evaluated at `reference_rate`.
struct DivergenceWitness {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double reference_rate = 0.0;
};

struct FeasibilityReport {
    Verdict verdict = Verdict::Unknown;
    std::string reason;
    std::optional<GammaThresholds> thresholds;
    std::optional<double> rho;
    std::optional<DivergenceWitness> witness;
    std::optional<std::pair<double, double>> sufficient_pair;  // (delta, p)
};

FeasibilityReport classify(const ProblemSpec& spec);

/// Closed-form solution when the short rate is constant.
struct ConstantRateSolution {
    double K = 0.0;
    double value = 0.0;
    double policy_rate = 0.0;   // consumption per unit wealth
    double growth_rate = 0.0;   // d log V / dt
    double N = 0.0;
};
ConstantRateSolution constant_rate_solution(double alpha, double gamma, double r, double v);

enum class ProbeResult { Finite, Divergent, Undetermined };

std::string to_string(ProbeResult p);

/// Finiteness of E int exp(-gamma t + alpha int (r_s - c) ds) dt for constant consumption rate c.
ProbeResult necessary_condition_probe(const ProblemSpec& spec, double c);

/// Grid search for (delta, p) satisfying the Vasicek sufficient condition.
std::optional<std::pair<double, double>> sufficient_condition_search(const ProblemSpec& spec);

}  // namespace shortrate
