#pragma once

#include "shortrate/grid.hpp"
#include "shortrate/hjb_solver.hpp"
#include "shortrate/model.hpp"

namespace shortrate {

/// Value when bonds are traded: N(r)^(1-alpha) v^alpha.
double value_c(const ProblemSpec& spec, double r, double v);

/// Optimal bond exposure, computed from K = N^(1-alpha) and from N directly.
struct BetaHat {
    GridFunction via_K;
    GridFunction via_N;
};
BetaHat beta_hat(const ProblemSpec& spec, const UniformGrid& grid);

/// Sensitivity of a zero-coupon bond price to the short rate: (1 - exp(-b u))/b.
double bond_loading(double b, double u);

/// Loading of the exponentially weighted bond portfolio with maturity density varsigma exp(-varsigma u).
double upsilon(double varsigma, double b);

struct PortfolioPolicy {
    double beta = 0.0;
    double eta = 0.0;
    double varsigma = 1.0;
    double upsilon = 0.0;
};
PortfolioPolicy eta_from_beta(double beta, double varsigma, double b);

/// Q K + (alpha r - gamma) K + (1 - alpha) K^(alpha/(alpha-1)) + alpha sigma^2 K'^2 / (2 (1 - alpha) K).
HjbResidual hjb_bonds_residual(const ProblemSpec& spec, const GridFunction& K);

}  // namespace shortrate
