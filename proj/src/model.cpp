#include "shortrate/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "shortrate/errors.hpp"
#include "shortrate/numerics.hpp"

namespace shortrate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidInput(what);
}

bool finite(double x) { return std::isfinite(x); }

void check_rate(const ShortRateModel& model, double r) {
    require(finite(r), "rate is not finite");
    const Domain d = domain(model);
    if (!d.contains(r)) {
        std::ostringstream os;
        os << "rate " << r << " outside the domain of " << model_name(model);
        throw InvalidInput(os.str());
    }
}

}  // namespace

void validate(const ShortRateModel& model) {
    std::visit(overloaded{
                   [](const Vasicek& m) {
                       require(finite(m.a) && finite(m.b) && finite(m.sigma), "Vasicek parameters must be finite");
                       require(m.a > 0.0, "Vasicek requires a > 0");
                       require(m.b > 0.0, "Vasicek requires b > 0");
                       require(m.sigma > 0.0, "Vasicek requires sigma > 0");
                   },
                   [](const InvariantInterval& m) {
                       require(finite(m.a) && finite(m.b) && finite(m.kappa) && finite(m.sigma),
                               "interval parameters must be finite");
                       require(m.a < m.b, "interval model requires a < b");
                       require(m.kappa > 0.0, "interval model requires kappa > 0");
                       require(m.sigma > 0.0, "interval model requires sigma > 0");
                   },
                   [](const DriftedBM& m) {
                       require(finite(m.mu) && finite(m.sigma), "drifted BM parameters must be finite");
                       require(m.sigma >= 0.0, "drifted BM requires sigma >= 0");
                   },
                   [](const GeometricBM& m) {
                       require(finite(m.mu) && finite(m.sigma), "geometric BM parameters must be finite");
                       require(m.sigma >= 0.0, "geometric BM requires sigma >= 0");
                   },
                   [](const ConstantRate& m) { require(finite(m.r), "constant rate must be finite"); },
               },
               model);
}

void validate(const ProblemSpec& spec) {
    validate(spec.model);
    require(finite(spec.alpha) && spec.alpha > 0.0 && spec.alpha < 1.0, "alpha must lie in (0, 1)");
    require(finite(spec.gamma) && spec.gamma >= 0.0, "gamma must be finite and non-negative");
    if (spec.variant == Variant::B) {
        const Domain d = domain(spec.model);
        require(d.lower < 0.0 && d.upper > 0.0, "0 is not inside the model domain: Problem B reduces to Problem A");
    }
}

std::string model_name(const ShortRateModel& model) {
    return std::visit(overloaded{
                          [](const Vasicek&) { return std::string("vasicek"); },
                          [](const InvariantInterval&) { return std::string("interval"); },
                          [](const DriftedBM&) { return std::string("drifted_bm"); },
                          [](const GeometricBM&) { return std::string("geometric_bm"); },
                          [](const ConstantRate&) { return std::string("constant"); },
                      },
                      model);
}

Domain domain(const ShortRateModel& model) {
    return std::visit(overloaded{
                          [](const InvariantInterval& m) { return Domain{m.a, m.b}; },
                          [](const GeometricBM&) { return Domain{0.0, kInf}; },
                          [](const auto&) { return Domain{-kInf, kInf}; },
                      },
                      model);
}

double drift(const ShortRateModel& model, double r) {
    check_rate(model, r);
    return std::visit(overloaded{
                          [r](const Vasicek& m) { return m.a - m.b * r; },
                          [r](const InvariantInterval& m) { return m.kappa * (0.5 * (m.a + m.b) - r); },
                          [](const DriftedBM& m) { return m.mu; },
                          [r](const GeometricBM& m) { return m.mu * r; },
                          [](const ConstantRate&) { return 0.0; },
                      },
                      model);
}

double diffusion(const ShortRateModel& model, double r) {
    check_rate(model, r);
    return std::visit(overloaded{
                          [](const Vasicek& m) { return m.sigma; },
                          [r](const InvariantInterval& m) { return m.sigma * (r - m.a) * (m.b - r); },
                          [](const DriftedBM& m) { return m.sigma; },
                          [r](const GeometricBM& m) { return m.sigma * r; },
                          [](const ConstantRate&) { return 0.0; },
                      },
                      model);
}

double state_rate(const ShortRateModel& model, double r) {
    if (const auto* c = std::get_if<ConstantRate>(&model)) return c->r;
    return r;
}

double generator_apply(const ShortRateModel& model, double r, double fp, double fpp) {
    const double s = diffusion(model, r);
    return 0.5 * s * s * fpp + drift(model, r) * fp;
}

namespace {

double log_add(double la, double lb) {
    if (la == -kInf) return lb;
    if (lb == -kInf) return la;
    const double hi = std::max(la, lb);
    return hi + std::log1p(std::exp(std::min(la, lb) - hi));
}

// Walks from w toward `end` on a geometric mesh and accumulates a lower bound of
// int exp(-int_w^y 2 mu / sigma^2) dy in log space.
EndpointDiagnostics scan_endpoint(const std::function<double(double)>& mu,
                                  const std::function<double(double)>& sigma, double w, double end,
                                  const ScaleCheckOptions& options) {
    EndpointDiagnostics out;
    const double log_threshold = std::log(options.threshold);
    auto ratio_fn = [&](double z) {
        const double s = sigma(z);
        if (!(s != 0.0) || !std::isfinite(s)) throw InvalidInput("diffusion vanishes inside the interval");
        return 2.0 * mu(z) / (s * s);
    };
    double y = w;
    double inner = 0.0;  // int_w^y 2 mu / sigma^2
    double log_density = 0.0;
    double log_sum = -kInf;
    const double span = end - w;
    for (int k = 1; k <= options.levels; ++k) {
        const double y_next = end - span * std::pow(options.ratio, k);
        if (y_next == end || y_next == y) break;  // mesh finer than double resolution
        inner += gauss_legendre(ratio_fn, y, y_next, 16);
        const double log_density_next = -inner;
        const double width = std::abs(y_next - y);
        log_sum = log_add(log_sum, std::log(width) + std::min(log_density, log_density_next));
        out.log_partials.push_back(log_sum);
        y = y_next;
        log_density = log_density_next;
        if (log_sum > log_threshold) out.diverges = true;
    }
    return out;
}

}  // namespace

InvarianceReport scale_function_check(const std::function<double(double)>& mu,
                                      const std::function<double(double)>& sigma, double a, double b,
                                      const ScaleCheckOptions& options) {
    require(a < b, "scale check requires a < b");
    require(options.ratio > 0.0 && options.ratio < 1.0, "mesh ratio must lie in (0, 1)");
    require(options.levels > 0, "mesh needs at least one level");
    require(options.threshold > 1.0, "divergence threshold must exceed 1");
    const double w = 0.5 * (a + b);
    InvarianceReport report;
    report.lower = scan_endpoint(mu, sigma, w, a, options);
    report.upper = scan_endpoint(mu, sigma, w, b, options);
    report.invariant = report.lower.diverges && report.upper.diverges;
    return report;
}

InvarianceReport invariance_check(const InvariantInterval& model, const ScaleCheckOptions& options) {
    validate(ShortRateModel{model});
    const ShortRateModel m{model};
    return scale_function_check([&](double z) { return drift(m, z); }, [&](double z) { return diffusion(m, z); },
                                model.a, model.b, options);
}

}  // namespace shortrate
