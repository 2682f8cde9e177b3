#include "shortrate/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shortrate/errors.hpp"
#include "shortrate/numerics.hpp"
#include "shortrate/resolvent.hpp"

namespace shortrate {

namespace {

// x + expm1(-x) = x^2 sum_k (-x)^k / (k+2)!
double x_minus_e1(double x) {
    if (x < 0.5) {
        double sum = 0.0, power = 1.0, fact = 2.0;
        for (int k = 0; k < 25; ++k) {
            sum += power / fact;
            power *= -x;
            fact *= (k + 3);
        }
        return x * x * sum;
    }
    return x + std::expm1(-x);
}

// x - 2(1 - e^-x) + (1 - e^-2x)/2 = sum_{k>=3} (-1)^k (2 - 2^(k-1)) x^k / k!
double integrated_variance_factor(double x) {
    if (x < 1.0) {
        double sum = 0.0;
        double term = x * x * x / 6.0;  // x^k / k!
        double pow2 = 4.0;              // 2^(k-1)
        double sign = -1.0;
        for (int k = 3; k < 40; ++k) {
            sum += sign * (2.0 - pow2) * term;
            term *= x / (k + 1);
            pow2 *= 2.0;
            sign = -sign;
        }
        return sum;
    }
    return x + 2.0 * std::expm1(-x) - 0.5 * std::expm1(-2.0 * x);
}

const Vasicek& require_vasicek(const ProblemSpec& spec) {
    const auto* v = std::get_if<Vasicek>(&spec.model);
    if (!v) throw InvalidInput("operation requires the Vasicek model");
    return *v;
}

}  // namespace

JointMoments ou_moments(const Vasicek& m, double r, double t) {
    validate(ShortRateModel{m});
    if (!std::isfinite(r)) throw InvalidInput("rate is not finite");
    if (!std::isfinite(t) || t < 0.0) throw InvalidInput("horizon must be finite and non-negative");
    JointMoments out;
    const double b = m.b;
    const double s2 = m.sigma * m.sigma;
    const double x = b * t;
    const double e1 = -std::expm1(-x);
    const double e2 = -std::expm1(-2.0 * x);
    out.mean_r = r * std::exp(-x) + (m.a / b) * e1;
    out.var_r = s2 * e2 / (2.0 * b);
    out.mean_h = r * e1 / b + (m.a / b) * x_minus_e1(x) / b;
    out.var_h = s2 * integrated_variance_factor(x) / (b * b * b);
    out.cov_rh = s2 * e1 * e1 / (2.0 * b * b);
    return out;
}

FkKernel::FkKernel(const Vasicek& m, double alpha, double t, double r) : alpha_(alpha) {
    if (!(t > 0.0)) throw InvalidInput("kernel requires t > 0");
    const JointMoments mo = ou_moments(m, r, t);
    const double b = m.b;
    const double x = b * t;
    const double e1 = -std::expm1(-x);
    const double e2 = -std::expm1(-2.0 * x);
    mean_r_ = mo.mean_r;
    var_r_ = mo.var_r;
    slope_ = e1 * e1 / (b * e2);
    const double s2 = m.sigma * m.sigma;
    double cond_var = s2 / (b * b * b) * (integrated_variance_factor(x) - e1 * e1 * e1 * e1 / (2.0 * e2));
    cond_var = std::max(cond_var, 0.0);
    offset_ = alpha * mo.mean_h + 0.5 * alpha * alpha * cond_var - 0.5 * std::log(2.0 * std::numbers::pi * var_r_);
    mass_ = std::exp(alpha * mo.mean_h + 0.5 * alpha * alpha * mo.var_h);
    center_ = mean_r_ + alpha * slope_ * var_r_;
    spread_ = std::sqrt(var_r_);
}

double FkKernel::log_weight(double y) const {
    const double d = y - mean_r_;
    return -d * d / (2.0 * var_r_) + alpha_ * slope_ * d + offset_;
}

double FkKernel::operator()(double y) const { return std::exp(log_weight(y)); }

double fk_kernel_weight(const ProblemSpec& spec, double t, double r, double y) {
    validate(spec);
    if (!std::isfinite(y)) throw InvalidInput("y is not finite");
    return FkKernel(require_vasicek(spec), spec.alpha, t, r)(y);
}

GridFunction semigroup_apply(const ProblemSpec& spec, const GridFunction& phi, double t,
                             const SemigroupOptions& options) {
    validate(spec);
    if (!std::isfinite(t) || t < 0.0) throw InvalidInput("horizon must be finite and non-negative");
    const UniformGrid& g = phi.grid();
    if (t == 0.0) return phi;
    if (const auto* c = std::get_if<ConstantRate>(&spec.model)) {
        std::vector<double> out(g.nodes);
        for (std::size_t i = 0; i < g.nodes; ++i) out[i] = phi[i] * std::exp(spec.alpha * c->r * t);
        return GridFunction(g, std::move(out));
    }
    const Vasicek& m = require_vasicek(spec);
    const double dy = options.dy > 0.0 ? options.dy : g.step();
    const Extension ext = Extension::envelope(spec.alpha / m.b);

    std::vector<FkKernel> kernels;
    kernels.reserve(g.nodes);
    double lo = g.r_min, hi = g.r_max;
    for (std::size_t i = 0; i < g.nodes; ++i) {
        kernels.emplace_back(m, spec.alpha, t, g.node(i));
        const FkKernel& k = kernels.back();
        lo = std::min(lo, k.center() - options.halfwidth_sds * k.spread());
        hi = std::max(hi, k.center() + options.halfwidth_sds * k.spread());
    }
    const long j_lo = static_cast<long>(std::floor((lo - g.r_min) / dy));
    const long j_hi = static_cast<long>(std::ceil((hi - g.r_min) / dy));
    std::vector<double> ys, phis;
    for (long j = j_lo; j <= j_hi; ++j) {
        const double y = g.r_min + static_cast<double>(j) * dy;
        ys.push_back(y);
        phis.push_back(phi.eval(y, ext));
    }
    std::vector<double> out(g.nodes);
    for (std::size_t i = 0; i < g.nodes; ++i) {
        double acc = 0.0, mass = 0.0;
        for (std::size_t j = 0; j < ys.size(); ++j) {
            const double w = kernels[i](ys[j]) * ((j == 0 || j + 1 == ys.size()) ? 0.5 * dy : dy);
            acc += w * phis[j];
            mass += w;
        }
        if (options.mass_correction && mass > 0.0) acc *= kernels[i].mass() / mass;
        out[i] = acc;
    }
    return GridFunction(g, std::move(out));
}

GammaThresholds gamma_thresholds(const ProblemSpec& spec) {
    validate(spec);
    const Vasicek& m = require_vasicek(spec);
    const double al = spec.alpha, a = m.a, b = m.b, s = m.sigma;
    GammaThresholds g;
    g.gamma1 = al * a / b + al * al * s * s / ((1.0 - al) * b * b);
    g.gamma2 = al * a / b + 3.0 * al * al * s * s / (2.0 * std::sqrt(1.0 - al) * b * b) + al * s * (b + 1.0) / b;
    return g;
}

double tail_rate(const ProblemSpec& spec) {
    validate(spec);
    const Vasicek& m = require_vasicek(spec);
    const double al = spec.alpha;
    return (spec.gamma - al * m.a / m.b - al * al * m.sigma * m.sigma / (2.0 * (1.0 - al) * m.b * m.b)) / (1.0 - al);
}

double N_upper_bound(const ProblemSpec& spec, double r) {
    const Vasicek& m = require_vasicek(spec);
    const double rho = tail_rate(spec);
    if (!(rho > 0.0)) throw Infeasible("N is infinite: tail rate is not positive");
    return std::exp(spec.alpha * std::abs(r) / ((1.0 - spec.alpha) * m.b)) / rho;
}

NEnvelope interval_N_envelope(const ProblemSpec& spec) {
    validate(spec);
    const auto* m = std::get_if<InvariantInterval>(&spec.model);
    if (!m) throw InvalidInput("envelope requires the interval model");
    if (!(spec.gamma > spec.alpha * m->b)) throw Infeasible("envelope requires gamma > alpha b");
    return {(1.0 - spec.alpha) / (spec.gamma - spec.alpha * m->a), (1.0 - spec.alpha) / (spec.gamma - spec.alpha * m->b)};
}

namespace {

double vasicek_N(const ProblemSpec& spec, const Vasicek& m, double r) {
    const double al = spec.alpha;
    const double q = 1.0 - al;
    auto integrand = [&](double t) {
        const JointMoments mo = ou_moments(m, r, t);
        return std::exp((-spec.gamma * t + al * mo.mean_h) / q + al * al * mo.var_h / (2.0 * q * q));
    };
    const double rho = tail_rate(spec);
    const double panel = std::min(1.0, 0.5 / rho);
    double total = 0.0;
    double running_max = integrand(0.0);
    for (int k = 0; k < 100000; ++k) {
        const double lo = k * panel;
        const double hi = lo + panel;
        total += romberg(integrand, lo, hi, 1e-13);
        const double end_value = integrand(hi);
        running_max = std::max(running_max, end_value);
        if (end_value < 1e-14 * running_max && hi * rho > 5.0) return total;
    }
    throw NumericalError("N integral did not reach its tail cutoff");
}

}  // namespace

double supersolution_N(const ProblemSpec& spec, double r) {
    validate(spec);
    if (!std::isfinite(r)) throw InvalidInput("rate is not finite");
    if (const auto* m = std::get_if<Vasicek>(&spec.model)) {
        if (!(spec.gamma > gamma_thresholds(spec).gamma1))
            throw Infeasible("N requires gamma above the first Vasicek threshold");
        return vasicek_N(spec, *m, r);
    }
    if (const auto* c = std::get_if<ConstantRate>(&spec.model)) {
        if (!(spec.gamma > spec.alpha * c->r)) throw Infeasible("N requires gamma > alpha r");
        return (1.0 - spec.alpha) / (spec.gamma - spec.alpha * c->r);
    }
    if (const auto* m = std::get_if<InvariantInterval>(&spec.model)) {
        if (r < m->a || r > m->b) throw InvalidInput("rate outside the interval model's domain");
        const UniformGrid g{m->a, m->b, 801};
        return solve_linear_fk_ode(spec, g).eval(r);
    }
    throw Infeasible("N is infinite for " + model_name(spec.model));
}

GridFunction supersolution_N_grid(const ProblemSpec& spec, const UniformGrid& grid) {
    validate(spec);
    grid.validate();
    if (std::holds_alternative<InvariantInterval>(spec.model)) return solve_linear_fk_ode(spec, grid);
    std::vector<double> out(grid.nodes);
    for (std::size_t i = 0; i < grid.nodes; ++i) out[i] = supersolution_N(spec, grid.node(i));
    return GridFunction(grid, std::move(out));
}

}  // namespace shortrate
