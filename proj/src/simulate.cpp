#include "shortrate/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "shortrate/errors.hpp"
#include "shortrate/gaussian.hpp"

namespace shortrate {

PathStepper::PathStepper(const ShortRateModel& model, double dt, Scheme scheme)
    : model_(model), dt_(dt), scheme_(scheme) {
    validate(model);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("time step must be positive");
    if (scheme == Scheme::ExactOU) {
        const auto* m = std::get_if<Vasicek>(&model);
        if (!m) throw InvalidInput("exact scheme requires the Vasicek model");
        const JointMoments mo = ou_moments(*m, 0.0, dt);
        decay_ = std::exp(-m->b * dt);
        e1_over_b_ = -std::expm1(-m->b * dt) / m->b;
        l11_ = std::sqrt(mo.var_r);
        l21_ = mo.cov_rh / l11_;
        l22_ = std::sqrt(std::max(0.0, mo.var_h - l21_ * l21_));
    }
}

double PathStepper::local_sigma(double r) const { return diffusion(model_, r); }

void PathStepper::step(double& r, double& h, std::mt19937_64& rng, NormalSampler& normal) const {
    if (scheme_ == Scheme::ExactOU) {
        const auto& m = std::get<Vasicek>(model_);
        const double ab = m.a / m.b;
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        const double mean_r = r * decay_ + ab * (1.0 - decay_);
        const double mean_dh = r * e1_over_b_ + ab * (dt_ - e1_over_b_);
        h += mean_dh + l21_ * z1 + l22_ * z2;
        r = mean_r + l11_ * z1;
        return;
    }
    if (const auto* c = std::get_if<ConstantRate>(&model_)) {
        h += c->r * dt_;
        return;
    }
    const double sq = std::sqrt(dt_);
    const double z = normal(rng);
    double next;
    if (const auto* g = std::get_if<GeometricBM>(&model_)) {
        next = r * std::exp((g->mu - 0.5 * g->sigma * g->sigma) * dt_ + g->sigma * sq * z);
    } else {
        next = r + drift(model_, r) * dt_ + diffusion(model_, r) * sq * z;
    }
    if (const auto* iv = std::get_if<InvariantInterval>(&model_)) {
        const double eps = 1e-12 * (iv->b - iv->a);
        if (next < iv->a + eps || next > iv->b - eps) {
            next = std::clamp(next, iv->a + eps, iv->b - eps);
            ++clamp_events_;
        }
    }
    h += 0.5 * (r + next) * dt_;
    r = next;
}

namespace {

Scheme effective_scheme(const ShortRateModel& model, Scheme requested) {
    if (requested == Scheme::ExactOU && !std::holds_alternative<Vasicek>(model)) return Scheme::Euler;
    return requested;
}

std::size_t step_count(const PathConfig& config) {
    if (!(config.dt > 0.0) || !(config.t_max > 0.0)) throw InvalidInput("path horizon and step must be positive");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.t_max / config.dt)));
}

}  // namespace

Trajectory sample_path(const ShortRateModel& model, double r0, const PathConfig& config, std::uint64_t path_index) {
    validate(model);
    if (!domain(model).contains(r0)) throw InvalidInput("initial rate outside the model's domain");
    const PathStepper stepper(model, config.dt, effective_scheme(model, config.scheme));
    const std::size_t steps = step_count(config);
    Trajectory out;
    out.t.reserve(steps + 1);
    out.r.reserve(steps + 1);
    out.h.reserve(steps + 1);
    auto rng = path_rng(config.seed, path_index);
    NormalSampler normal;
    double r = r0, h = 0.0;
    out.t.push_back(0.0);
    out.r.push_back(r);
    out.h.push_back(h);
    for (std::size_t k = 1; k <= steps; ++k) {
        stepper.step(r, h, rng, normal);
        out.t.push_back(static_cast<double>(k) * config.dt);
        out.r.push_back(r);
        out.h.push_back(h);
    }
    out.clamp_events = stepper.clamp_events();
    return out;
}

Trajectory wealth_trajectory(Trajectory path, const GridFunction& policy_c, double v, bool stop_at_zero) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("initial wealth must be positive");
    const std::size_t n = path.t.size();
    if (n == 0 || path.r.size() != n || path.h.size() != n) throw InvalidInput("malformed path");
    std::size_t end = n;
    if (stop_at_zero) {
        for (std::size_t k = 0; k < n; ++k) {
            if (path.r[k] <= 0.0) {
                if (k == 0) {
                    path.tau_zero = 0.0;
                } else {
                    const double theta = path.r[k - 1] / (path.r[k - 1] - path.r[k]);
                    path.tau_zero = path.t[k - 1] + theta * (path.t[k] - path.t[k - 1]);
                }
                end = k + 1;
                break;
            }
        }
        path.t.resize(end);
        path.r.resize(end);
        path.h.resize(end);
    }
    path.V.resize(end);
    path.C.resize(end);
    path.c.resize(end);
    double consumed = 0.0;
    for (std::size_t k = 0; k < end; ++k) {
        path.c[k] = policy_c.eval(path.r[k]);
        if (k > 0) consumed += 0.5 * (path.c[k] + path.c[k - 1]) * (path.t[k] - path.t[k - 1]);
        path.V[k] = v * std::exp(path.h[k] - consumed);
        path.C[k] = path.c[k] * path.V[k];
    }
    return path;
}

Estimate estimate_J(const ProblemSpec& spec, const GridFunction& policy_c, double r0, double v,
                    const PathConfig& config, std::size_t threads) {
    validate(spec);
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("initial wealth must be positive");
    if (!domain(spec.model).contains(r0)) throw InvalidInput("initial rate outside the model's domain");
    if (config.n_paths < 2) throw InvalidInput("estimate needs at least two paths");
    for (double c : policy_c.values())
        if (!(c >= 0.0)) throw InvalidInput("consumption policy must be non-negative");
    const PathStepper stepper(spec.model, config.dt, effective_scheme(spec.model, config.scheme));
    const std::size_t steps = step_count(config);
    const std::size_t late = static_cast<std::size_t>(0.9 * static_cast<double>(steps));
    const double al = spec.alpha;
    const HatWeights hw = exponential_hat_weights(spec.gamma, config.dt);
    const double decay = std::exp(-spec.gamma * config.dt);

    std::vector<double> value(config.n_paths), tail(config.n_paths), at_late(config.n_paths);
    parallel_for(config.n_paths, threads, [&](std::size_t p) {
        auto rng = path_rng(config.seed, p);
        NormalSampler normal;
        double r = r0, h = 0.0, consumed = 0.0;
        double c = policy_c.eval(r);
        double g_prev = std::pow(c, al);
        double disc = 1.0, acc = 0.0;
        for (std::size_t k = 1; k <= steps; ++k) {
            stepper.step(r, h, rng, normal);
            const double c_next = policy_c.eval(r);
            consumed += 0.5 * (c + c_next) * config.dt;
            c = c_next;
            const double g = std::pow(c, al) * std::exp(al * (h - consumed));
            acc += disc * (hw.first * g_prev + hw.second * g);
            disc *= decay;
            g_prev = g;
            if (k == late) at_late[p] = disc * g;
        }
        value[p] = std::pow(v, al) * acc;
        tail[p] = disc * g_prev;
    });
    const SampleStats s = sample_stats(value);
    double tail_mean = 0.0, late_mean = 0.0;
    for (std::size_t p = 0; p < config.n_paths; ++p) {
        tail_mean += tail[p];
        late_mean += at_late[p];
    }
    tail_mean /= static_cast<double>(config.n_paths);
    late_mean /= static_cast<double>(config.n_paths);
    if (tail_mean > late_mean && tail_mean > 0.0)
        throw NumericalError("discounted utility grows over the last tenth of the horizon: J appears infinite");
    Estimate e;
    e.mean = s.mean;
    e.std_error = s.std_error;
    const double va = std::pow(v, al);
    e.tail_bound = va * (spec.gamma > 0.0 ? tail_mean / spec.gamma : tail_mean * config.t_max);
    e.paths = config.n_paths;
    return e;
}

Estimate estimate_KL_mc(const ProblemSpec& spec, double r0, const PathConfig& config, std::size_t threads) {
    validate(spec);
    const auto* m = std::get_if<Vasicek>(&spec.model);
    if (!m) throw InvalidInput("hitting-time estimator requires the Vasicek model");
    if (!(r0 > 0.0)) throw InvalidInput("starting rate must be positive");
    if (config.n_paths < 2) throw InvalidInput("estimate needs at least two paths");
    const PathStepper stepper(spec.model, config.dt, Scheme::ExactOU);
    const std::size_t steps = step_count(config);
    const double s2dt = m->sigma * m->sigma * config.dt;
    const double al = spec.alpha, gm = spec.gamma;

    std::vector<double> value(config.n_paths, 0.0), tail(config.n_paths, 0.0);
    std::vector<char> absorbed(config.n_paths, 0);
    parallel_for(config.n_paths, threads, [&](std::size_t p) {
        auto rng = path_rng(config.seed, p);
        NormalSampler normal;
        double r = r0, h = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            const double t = static_cast<double>(k) * config.dt;
            const double r_prev = r, h_prev = h;
            stepper.step(r, h, rng, normal);
            double theta = -1.0;
            if (r <= 0.0) {
                theta = r_prev / (r_prev - r);
            } else {
                // Brownian-bridge probability that the path dipped below 0 inside the step.
                // Given a hit, the bridge to r has the pre-hit law of the bridge to -r (reflection),
                // so the crossing is placed where the chord to -r meets 0.
                const double expo = 2.0 * r_prev * r / s2dt;
                if (expo < 40.0) {
                    const double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
                    if (u < std::exp(-expo)) theta = r_prev / (r_prev + r);
                }
            }
            if (theta >= 0.0) {
                const double tau = t + theta * config.dt;
                const double h_tau = h_prev + theta * (h - h_prev);
                value[p] = std::exp(-gm * tau + al * h_tau);
                absorbed[p] = 1;
                return;
            }
        }
        tail[p] = std::exp(-gm * config.t_max + al * h);
    });
    const SampleStats s = sample_stats(value);
    std::size_t hits = 0;
    double tail_mean = 0.0;
    for (std::size_t p = 0; p < config.n_paths; ++p) {
        hits += absorbed[p] ? 1 : 0;
        tail_mean += tail[p];
    }
    tail_mean /= static_cast<double>(config.n_paths);
    Estimate e;
    e.mean = s.mean;
    e.std_error = s.std_error;
    e.tail_bound = tail_mean;
    e.absorbed_fraction = static_cast<double>(hits) / static_cast<double>(config.n_paths);
    e.paths = config.n_paths;
    if (e.absorbed_fraction < 0.99 && tail_mean > 1e-3 * std::max(e.mean, 1e-300))
        throw NumericalError("too few paths absorbed by the horizon and the unabsorbed tail is not negligible; "
                             "widen t_max");
    return e;
}

}  // namespace shortrate
