#include "shortrate/feasibility.hpp"

#include <cmath>
#include <sstream>

#include "shortrate/errors.hpp"

namespace shortrate {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Finite: return "finite";
        case Verdict::Infinite: return "infinite";
        case Verdict::Unknown: return "unknown";
    }
    return "unknown";
}

std::string to_string(ProbeResult p) {
    switch (p) {
        case ProbeResult::Finite: return "finite";
        case ProbeResult::Divergent: return "divergent";
        case ProbeResult::Undetermined: return "undetermined";
    }
    return "undetermined";
}

namespace {

// Long-run growth rate of E exp(alpha h_t) under Vasicek.
double vasicek_growth(const ProblemSpec& spec, const Vasicek& m) {
    return spec.alpha * m.a / m.b + spec.alpha * spec.alpha * m.sigma * m.sigma / (2.0 * m.b * m.b);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

}  // namespace

FeasibilityReport classify(const ProblemSpec& spec) {
    validate(spec);
    FeasibilityReport rep;
    const double al = spec.alpha, gm = spec.gamma;

    if (const auto* m = std::get_if<Vasicek>(&spec.model)) {
        const GammaThresholds th = gamma_thresholds(spec);
        rep.thresholds = th;
        rep.rho = tail_rate(spec);
        rep.sufficient_pair = sufficient_condition_search(spec);
        const double growth = vasicek_growth(spec, *m);
        if (gm > std::max(th.gamma1, th.gamma2)) {
            rep.verdict = Verdict::Finite;
            rep.reason = "gamma exceeds both thresholds (" + fmt(th.gamma1) + ", " + fmt(th.gamma2) + ")";
        } else {
            // Only sufficient conditions are available here, so divergence is never asserted.
            rep.verdict = Verdict::Unknown;
            rep.reason = "gamma <= max(gamma1, gamma2) = " + fmt(std::max(th.gamma1, th.gamma2));
            if (gm < growth)
                rep.reason += "; gamma is below the growth rate " + fmt(growth) +
                              " of E exp(alpha h_t), so small constant consumption rates give an infinite value";
        }
        return rep;
    }
    if (const auto* m = std::get_if<InvariantInterval>(&spec.model)) {
        if (al * m->b < gm) {
            rep.verdict = Verdict::Finite;
            rep.reason = "alpha b < gamma";
        } else {
            rep.verdict = Verdict::Unknown;
            rep.reason = al * m->a >= gm ? "alpha a >= gamma: small constant consumption rates give an infinite value"
                                         : "alpha a < gamma <= alpha b";
        }
        return rep;
    }
    if (const auto* m = std::get_if<ConstantRate>(&spec.model)) {
        if (gm > al * m->r) {
            rep.verdict = Verdict::Finite;
            rep.reason = "gamma > alpha r";
            rep.rho = (gm - al * m->r) / (1.0 - al);
        } else {
            rep.verdict = Verdict::Infinite;
            rep.witness = DivergenceWitness{al * m->r - gm, 0.0, 0.0, m->r};
            rep.reason = "gamma <= alpha r";
        }
        return rep;
    }
    if (const auto* m = std::get_if<DriftedBM>(&spec.model)) {
        const DivergenceWitness w{-gm, 0.5 * al * m->mu, al * al * m->sigma * m->sigma / 6.0, 0.0};
        if (m->sigma > 0.0 || m->mu > 0.0) {
            rep.verdict = Verdict::Infinite;
            rep.witness = w;
            rep.reason = m->sigma > 0.0 ? "cubic growth of the log-moment of alpha h_t" : "quadratic rate growth";
        } else if (m->mu < 0.0) {
            rep.verdict = Verdict::Finite;
            rep.reason = "deterministic rate decreasing without bound";
        } else {
            rep.verdict = Verdict::Unknown;
            rep.reason = "constant rate whose level is not part of the model";
        }
        return rep;
    }
    const auto& m = std::get<GeometricBM>(spec.model);
    const double r = 1.0;  // any r > 0 gives a positive cubic coefficient
    const DivergenceWitness w{al * r - gm, 0.5 * al * r * (m.mu - 0.5 * m.sigma * m.sigma),
                              al * al * r * r * m.sigma * m.sigma / 6.0, r};
    if (m.sigma > 0.0 || m.mu > 0.0) {
        rep.verdict = Verdict::Infinite;
        rep.witness = w;
        rep.reason = m.sigma > 0.0 ? "cubic growth of the log-moment of alpha h_t" : "exponential rate growth";
    } else {
        rep.verdict = Verdict::Unknown;
        rep.reason = "deterministic non-increasing rate; depends on the initial level";
    }
    return rep;
}

ConstantRateSolution constant_rate_solution(double alpha, double gamma, double r, double v) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
    if (!(v > 0.0)) throw InvalidInput("wealth must be positive");
    if (!(gamma > alpha * r)) throw Infeasible("constant-rate value is infinite when gamma <= alpha r");
    ConstantRateSolution s;
    s.policy_rate = (gamma - alpha * r) / (1.0 - alpha);
    s.K = std::pow(s.policy_rate, alpha - 1.0);
    s.value = s.K * std::pow(v, alpha);
    s.growth_rate = (r - gamma) / (1.0 - alpha);
    s.N = (1.0 - alpha) / (gamma - alpha * r);
    return s;
}

ProbeResult necessary_condition_probe(const ProblemSpec& spec, double c) {
    validate(spec);
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("probe consumption rate must be positive");
    const double al = spec.alpha, gm = spec.gamma;
    if (const auto* m = std::get_if<Vasicek>(&spec.model))
        return vasicek_growth(spec, *m) - gm - al * c >= 0.0 ? ProbeResult::Divergent : ProbeResult::Finite;
    if (const auto* m = std::get_if<ConstantRate>(&spec.model))
        return al * m->r - gm - al * c >= 0.0 ? ProbeResult::Divergent : ProbeResult::Finite;
    if (const auto* m = std::get_if<InvariantInterval>(&spec.model)) {
        if (al * m->b - gm - al * c < 0.0) return ProbeResult::Finite;
        if (al * m->a - gm - al * c >= 0.0) return ProbeResult::Divergent;
        return ProbeResult::Undetermined;
    }
    if (const auto* m = std::get_if<DriftedBM>(&spec.model)) {
        if (m->sigma > 0.0 || m->mu > 0.0) return ProbeResult::Divergent;
        if (m->mu < 0.0) return ProbeResult::Finite;
        return ProbeResult::Undetermined;
    }
    const auto& m = std::get<GeometricBM>(spec.model);
    if (m.sigma > 0.0 || m.mu > 0.0) return ProbeResult::Divergent;
    return ProbeResult::Undetermined;
}

std::optional<std::pair<double, double>> sufficient_condition_search(const ProblemSpec& spec) {
    validate(spec);
    const auto* m = std::get_if<Vasicek>(&spec.model);
    if (!m) throw InvalidInput("sufficient-condition search requires the Vasicek model");
    const double al = spec.alpha, gm = spec.gamma;
    const double span = 1.0 / al - 1.0;
    for (int k = 1; k < 20; ++k) {
        const double p = 1.0 + k * span / 20.0;
        if (!(p > 1.0)) continue;
        const double q = p / (p - 1.0);
        const double need = al * q * m->a / m->b + (al * q) * (al * q) * m->sigma * m->sigma / (2.0 * m->b * m->b);
        for (int j = 1; j <= 20; ++j) {
            const double delta = gm * std::ldexp(1.0, -j);
            if ((gm - delta) * q > need) return std::pair{delta, p};
        }
    }
    return std::nullopt;
}

}  // namespace shortrate
