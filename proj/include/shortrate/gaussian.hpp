#pragma once

#include "shortrate/grid.hpp"
#include "shortrate/model.hpp"

namespace shortrate {

/// Joint law of (r_t, h_t) with h_t the integral of r over [0, t], started at r_0 = r.
struct JointMoments {
    double mean_r = 0.0;
    double var_r = 0.0;
    double mean_h = 0.0;
    double var_h = 0.0;
    double cov_rh = 0.0;
};

JointMoments ou_moments(const Vasicek& model, double r, double t);

/// y -> p_t(r, y) * exp(alpha * m_{h|y} + alpha^2 v_{h|y} / 2) for fixed (t, r).
class FkKernel {
public:
    FkKernel(const Vasicek& model, double alpha, double t, double r);

    double operator()(double y) const;
    double log_weight(double y) const;
    /// Closed-form integral over y: exp(alpha mean_h + alpha^2 var_h / 2).
    double mass() const { return mass_; }
    /// Center and spread of the (tilted) Gaussian in y.
    double center() const { return center_; }
    double spread() const { return spread_; }

private:
    double alpha_;
    double mean_r_;
    double var_r_;
    double slope_;   // cov / var_r
    double offset_;  // alpha * mean_h + alpha^2 * cond_var / 2 - log(sqrt(2 pi var_r))
    double mass_;
    double center_;
    double spread_;
};

double fk_kernel_weight(const ProblemSpec& spec, double t, double r, double y);

struct SemigroupOptions {
    double dy = 0.0;            // 0: use the grid step of phi
    double halfwidth_sds = 8.0; // y window beyond the grid, in transition standard deviations
    bool mass_correction = true;
};

/// (P_t phi)(r) = E^r[phi(r_t) exp(alpha h_t)] at the nodes of phi's grid.
/// phi is continued beyond its grid with the envelope exp((alpha/b)|y|).
GridFunction semigroup_apply(const ProblemSpec& spec, const GridFunction& phi, double t,
                             const SemigroupOptions& options = {});

/// N(r) = E int exp((-gamma t + alpha h_t) / (1 - alpha)) dt.
double supersolution_N(const ProblemSpec& spec, double r);
GridFunction supersolution_N_grid(const ProblemSpec& spec, const UniformGrid& grid);

struct GammaThresholds {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
};
GammaThresholds gamma_thresholds(const ProblemSpec& spec);

/// Exponential decay rate of the N integrand for Vasicek.
double tail_rate(const ProblemSpec& spec);
/// exp(alpha |r| / ((1 - alpha) b)) / rho
double N_upper_bound(const ProblemSpec& spec, double r);

struct NEnvelope {
    double lower;
    double upper;
};
/// (1 - alpha)/(gamma - alpha a) <= N <= (1 - alpha)/(gamma - alpha b) for the interval model.
NEnvelope interval_N_envelope(const ProblemSpec& spec);

}  // namespace shortrate
