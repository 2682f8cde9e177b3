#include "shortrate/portfolio.hpp"

#include <cmath>

#include "shortrate/errors.hpp"
#include "shortrate/gaussian.hpp"

namespace shortrate {

double value_c(const ProblemSpec& spec, double r, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("wealth must be positive");
    return std::pow(supersolution_N(spec, r), 1.0 - spec.alpha) * std::pow(v, spec.alpha);
}

BetaHat beta_hat(const ProblemSpec& spec, const UniformGrid& grid) {
    const GridFunction N = supersolution_N_grid(spec, grid);
    std::vector<double> k(grid.nodes);
    for (std::size_t i = 0; i < grid.nodes; ++i) k[i] = std::pow(N[i], 1.0 - spec.alpha);
    const GridFunction K(grid, std::move(k));
    const std::vector<double> dK = K.derivative();
    const std::vector<double> dN = N.derivative();
    std::vector<double> via_k(grid.nodes), via_n(grid.nodes);
    for (std::size_t i = 0; i < grid.nodes; ++i) {
        via_k[i] = dK[i] / ((1.0 - spec.alpha) * K[i]);
        via_n[i] = dN[i] / N[i];
    }
    return {GridFunction(grid, std::move(via_k)), GridFunction(grid, std::move(via_n))};
}

double bond_loading(double b, double u) {
    if (!(b > 0.0) || !std::isfinite(b)) throw InvalidInput("mean reversion must be positive");
    if (!(u >= 0.0) || !std::isfinite(u)) throw InvalidInput("maturity must be non-negative");
    return -std::expm1(-b * u) / b;
}

double upsilon(double varsigma, double b) {
    if (!(varsigma > 0.0) || !(b > 0.0)) throw InvalidInput("varsigma and b must be positive");
    return -1.0 / (varsigma + b);
}

PortfolioPolicy eta_from_beta(double beta, double varsigma, double b) {
    if (!std::isfinite(beta)) throw InvalidInput("beta is not finite");
    PortfolioPolicy p;
    p.beta = beta;
    p.varsigma = varsigma;
    p.upsilon = upsilon(varsigma, b);
    p.eta = 1.0 - beta / p.upsilon;
    return p;
}

HjbResidual hjb_bonds_residual(const ProblemSpec& spec, const GridFunction& K) {
    HjbResidual out = hjb_residual(spec, K);
    const std::vector<double> d1 = K.derivative();
    const double al = spec.alpha;
    for (std::size_t i = 0; i < out.r.size(); ++i) {
        const std::size_t node = i + 1;
        const double s = diffusion(spec.model, out.r[i]);
        out.raw[i] += al * s * s * d1[node] * d1[node] / (2.0 * (1.0 - al) * K[node]);
        out.relative[i] = out.raw[i] / (1.0 + std::abs(K[node]));
    }
    return out;
}

}  // namespace shortrate
