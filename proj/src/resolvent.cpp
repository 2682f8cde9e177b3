#include "shortrate/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shortrate/errors.hpp"
#include "shortrate/gaussian.hpp"
#include "shortrate/numerics.hpp"
#include "shortrate/simulate.hpp"

namespace shortrate {

namespace {

double envelope_rate(const ProblemSpec& spec) {
    if (const auto* m = std::get_if<Vasicek>(&spec.model)) return spec.alpha / m->b;
    return 0.0;
}

Extension psi_extension(const ProblemSpec& spec) {
    if (std::holds_alternative<Vasicek>(spec.model)) return Extension::envelope(envelope_rate(spec));
    return Extension::clamp();
}

// Growth rate of P_t 1 for Vasicek at large t.
double vasicek_growth(const ProblemSpec& spec, const Vasicek& m) {
    return spec.alpha * m.a / m.b + spec.alpha * spec.alpha * m.sigma * m.sigma / (2.0 * m.b * m.b);
}

UniformGrid refined(const UniformGrid& g, std::size_t refine) {
    if (refine <= 1) return g;
    return UniformGrid{g.r_min, g.r_max, (g.nodes - 1) * refine + 1};
}

}  // namespace

Boundary resolve_boundary(const ProblemSpec& spec, const UniformGrid& grid, Boundary requested, bool left_end) {
    if (requested.kind != Boundary::Kind::Auto) return requested;
    if (const auto* m = std::get_if<Vasicek>(&spec.model))
        return Boundary::robin(spec.alpha / ((1.0 - spec.alpha) * m->b));
    if (const auto* m = std::get_if<InvariantInterval>(&spec.model)) {
        const double end = left_end ? grid.r_min : grid.r_max;
        const double model_end = left_end ? m->a : m->b;
        if (std::abs(end - model_end) <= 1e-12 * std::max(1.0, std::abs(model_end))) return Boundary::degenerate();
        throw InvalidInput("interval model grids must end at the interval endpoints");
    }
    if (std::holds_alternative<ConstantRate>(spec.model)) return Boundary::degenerate();
    throw InvalidInput("no default boundary condition for " + model_name(spec.model));
}

std::vector<double> solve_linear_bvp(const ShortRateModel& model, const UniformGrid& grid, std::span<const double> c,
                                     std::span<const double> f, Boundary left, Boundary right) {
    grid.validate();
    const std::size_t n = grid.nodes;
    if (c.size() != n || f.size() != n) throw InvalidInput("coefficient size does not match the grid");
    const double h = grid.step();
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(f.begin(), f.end());

    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double r = grid.node(i);
        const double s = diffusion(model, r);
        const double mu = drift(model, r);
        const double D = 0.5 * s * s / (h * h);
        di[i] = c[i] + 2.0 * D;
        if (std::abs(mu) * h <= s * s) {
            lo[i] = -(D - 0.5 * mu / h);
            up[i] = -(D + 0.5 * mu / h);
        } else if (mu > 0.0) {
            lo[i] = -D;
            up[i] = -(D + mu / h);
            di[i] += mu / h;
        } else {
            lo[i] = -(D - mu / h);
            up[i] = -D;
            di[i] -= mu / h;
        }
    }

    auto end_row = [&](std::size_t i, std::size_t nb, Boundary b, bool is_left) -> std::pair<double, double> {
        // returns (diag, off) for row i with neighbour nb
        switch (b.kind) {
            case Boundary::Kind::Dirichlet:
                rhs[i] = b.value;
                return {1.0, 0.0};
            case Boundary::Kind::Robin: {
                rhs[i] = 0.0;
                const double kh = b.value * h;
                return is_left ? std::pair{1.0 + kh, -1.0} : std::pair{1.0 - kh, -1.0};
            }
            case Boundary::Kind::Degenerate: {
                const double r = grid.node(i);
                const double s = diffusion(model, r);
                if (s != 0.0) throw InvalidInput("degenerate boundary requires vanishing diffusion at the end");
                const double mu = drift(model, r);
                const double inward = is_left ? mu : -mu;
                (void)nb;
                if (inward > 0.0) return {c[i] + inward / h, -inward / h};
                return {c[i], 0.0};
            }
            case Boundary::Kind::Auto:
                break;
        }
        throw InvalidInput("unresolved boundary condition");
    };
    auto [d0, o0] = end_row(0, 1, left, true);
    di[0] = d0;
    up[0] = o0;
    auto [dn, on] = end_row(n - 1, n - 2, right, false);
    di[n - 1] = dn;
    lo[n - 1] = on;

    // Z-matrix with positive pivots is a nonsingular M-matrix: the inverse is entrywise non-negative.
    for (std::size_t i = 0; i < n; ++i) {
        if (lo[i] > 0.0 || up[i] > 0.0) throw NumericalError("discrete operator has positive off-diagonal entries");
    }
    double prev_c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pivot = di[i] - (i > 0 ? lo[i] * prev_c : 0.0);
        if (!(pivot > 0.0)) {
            std::ostringstream os;
            os << "discrete operator is not an M-matrix at node " << i << " (r = " << grid.node(i)
               << "); use a finer grid than h = " << h;
            throw NumericalError(os.str());
        }
        prev_c = up[i] / pivot;
    }
    return solve_tridiagonal(lo, di, up, rhs);
}

GridFunction resolvent_fd(const ProblemSpec& spec, const GridFunction& psi, double lambda,
                          const FiniteDifferenceBackend& backend) {
    validate(spec);
    if (!std::isfinite(lambda)) throw InvalidInput("lambda is not finite");
    const UniformGrid fine = refined(psi.grid(), backend.refine);
    const Boundary left = resolve_boundary(spec, fine, backend.left, true);
    const Boundary right = resolve_boundary(spec, fine, backend.right, false);
    std::vector<double> c(fine.nodes), f(fine.nodes);
    for (std::size_t i = 0; i < fine.nodes; ++i) {
        const double r = fine.node(i);
        c[i] = lambda + spec.gamma - spec.alpha * state_rate(spec.model, r);
        f[i] = psi.eval(r);
    }
    GridFunction u(fine, solve_linear_bvp(spec.model, fine, c, f, left, right));
    return backend.refine <= 1 ? u : u.resample(psi.grid());
}

GridFunction solve_linear_fk_ode(const ProblemSpec& spec, const UniformGrid& grid,
                                 const FiniteDifferenceBackend& backend) {
    validate(spec);
    const UniformGrid fine = refined(grid, backend.refine);
    const Boundary left = resolve_boundary(spec, fine, backend.left, true);
    const Boundary right = resolve_boundary(spec, fine, backend.right, false);
    std::vector<double> c(fine.nodes), f(fine.nodes, 1.0);
    for (std::size_t i = 0; i < fine.nodes; ++i)
        c[i] = (spec.gamma - spec.alpha * state_rate(spec.model, fine.node(i))) / (1.0 - spec.alpha);
    GridFunction u(fine, solve_linear_bvp(spec.model, fine, c, f, left, right));
    return backend.refine <= 1 ? u : u.resample(grid);
}

namespace {

class QuadratureResolvent final : public Resolvent {
public:
    QuadratureResolvent(const ProblemSpec& spec, const UniformGrid& grid, double lambda,
                        const QuadratureBackend& q, std::size_t threads)
        : spec_(spec), grid_(grid), ext_(psi_extension(spec)) {
        validate(spec);
        grid.validate();
        const double kappa = lambda + spec.gamma;
        if (const auto* c = std::get_if<ConstantRate>(&spec.model)) {
            const double rate = kappa - spec.alpha * c->r;
            if (!(rate > 0.0)) throw InvalidInput("lambda + gamma must exceed alpha r");
            constant_factor_ = 1.0 / rate;
            is_constant_ = true;
            return;
        }
        const auto* mp = std::get_if<Vasicek>(&spec.model);
        if (!mp) throw InvalidInput("quadrature backend requires the Vasicek or constant model");
        const Vasicek& m = *mp;
        if (!(q.dt > 0.0) || !(q.dy > 0.0)) throw InvalidInput("quadrature steps must be positive");
        const double growth = vasicek_growth(spec, m);
        if (!(kappa > growth)) throw InvalidInput("lambda + gamma must exceed the semigroup growth rate");
        const double t_max = q.t_max > 0.0 ? q.t_max : 30.0 / (kappa - growth);
        const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t_max / q.dt)));
        const double dt = q.dt;

        // Exponentially weighted trapezoid on [dt, t_max].
        std::vector<double> times(steps), omega(steps, 0.0);
        for (std::size_t k = 0; k < steps; ++k) times[k] = dt * static_cast<double>(k + 1);
        const HatWeights hw = exponential_hat_weights(kappa, dt);
        for (std::size_t k = 0; k + 1 < steps; ++k) {
            const double e = std::exp(-kappa * times[k]);
            omega[k] += e * hw.first;
            omega[k + 1] += e * hw.second;
        }

        const double stationary_var = m.sigma * m.sigma * -std::expm1(-2.0 * m.b * times.back()) / (2.0 * m.b);
        const double halfwidth = q.y_halfwidth > 0.0 ? q.y_halfwidth : 6.0 * std::sqrt(stationary_var);
        const long j_lo = static_cast<long>(std::floor(-halfwidth / q.dy));
        const long j_hi = static_cast<long>(std::ceil((grid.r_max - grid.r_min + halfwidth) / q.dy));
        for (long j = j_lo; j <= j_hi; ++j) ys_.push_back(grid.r_min + static_cast<double>(j) * q.dy);
        const std::size_t ny = ys_.size();
        const double y0 = ys_.front();

        first_cell_.resize(grid.nodes);
        matrix_.assign(grid.nodes * ny, 0.0);
        parallel_for(grid.nodes, threads, [&](std::size_t i) {
            const double r = grid.node(i);
            const double rate = kappa - spec.alpha * r;
            first_cell_[i] = std::abs(rate * dt) < 1e-12 ? dt : -std::expm1(-rate * dt) / rate;
            double* row = &matrix_[i * ny];
            std::vector<double> w;
            for (std::size_t k = 0; k < steps; ++k) {
                if (omega[k] == 0.0) continue;
                const FkKernel kern(m, spec.alpha, times[k], r);
                const double reach = 12.0 * kern.spread();
                const long a = std::max<long>(0, static_cast<long>(std::floor((kern.center() - reach - y0) / q.dy)));
                const long b = std::min<long>(static_cast<long>(ny) - 1,
                                              static_cast<long>(std::ceil((kern.center() + reach - y0) / q.dy)));
                if (a > b) continue;
                w.assign(static_cast<std::size_t>(b - a + 1), 0.0);
                double mass = 0.0;
                for (long j = a; j <= b; ++j) {
                    const double cell = (j == 0 || j + 1 == static_cast<long>(ny)) ? 0.5 * q.dy : q.dy;
                    const double v = kern(ys_[static_cast<std::size_t>(j)]) * cell;
                    w[static_cast<std::size_t>(j - a)] = v;
                    mass += v;
                }
                const double scale = (q.mass_correction && mass > 0.0) ? kern.mass() / mass : 1.0;
                const double factor = omega[k] * scale;
                for (long j = a; j <= b; ++j) row[j] += factor * w[static_cast<std::size_t>(j - a)];
            }
        });
    }

    GridFunction apply(const GridFunction& psi) const override {
        if (psi.grid().nodes != grid_.nodes) throw InvalidInput("psi grid does not match the resolvent grid");
        std::vector<double> out(grid_.nodes);
        if (is_constant_) {
            for (std::size_t i = 0; i < grid_.nodes; ++i) out[i] = psi[i] * constant_factor_;
            return GridFunction(grid_, std::move(out));
        }
        const std::size_t ny = ys_.size();
        std::vector<double> py(ny);
        for (std::size_t j = 0; j < ny; ++j) py[j] = psi.eval(ys_[j], ext_);
        for (std::size_t i = 0; i < grid_.nodes; ++i) {
            const double* row = &matrix_[i * ny];
            double acc = 0.0;
            for (std::size_t j = 0; j < ny; ++j) acc += row[j] * py[j];
            out[i] = first_cell_[i] * psi[i] + acc;
        }
        return GridFunction(grid_, std::move(out));
    }

private:
    ProblemSpec spec_;
    UniformGrid grid_;
    Extension ext_;
    bool is_constant_ = false;
    double constant_factor_ = 0.0;
    std::vector<double> ys_;
    std::vector<double> first_cell_;
    std::vector<double> matrix_;
};

class FdResolvent final : public Resolvent {
public:
    FdResolvent(const ProblemSpec& spec, double lambda, const FiniteDifferenceBackend& b)
        : spec_(spec), lambda_(lambda), backend_(b) {}
    GridFunction apply(const GridFunction& psi) const override { return resolvent_fd(spec_, psi, lambda_, backend_); }

private:
    ProblemSpec spec_;
    double lambda_;
    FiniteDifferenceBackend backend_;
};

class McResolvent final : public Resolvent {
public:
    McResolvent(const ProblemSpec& spec, double lambda, const MonteCarloBackend& b, std::size_t threads)
        : spec_(spec), lambda_(lambda), backend_(b), threads_(threads) {}
    GridFunction apply(const GridFunction& psi) const override {
        return resolvent_mc(spec_, psi, lambda_, backend_, threads_).mean;
    }

private:
    ProblemSpec spec_;
    double lambda_;
    MonteCarloBackend backend_;
    std::size_t threads_;
};

}  // namespace

GridFunction resolvent_quadrature(const ProblemSpec& spec, const GridFunction& psi, double lambda,
                                  const QuadratureBackend& backend, std::size_t threads) {
    return QuadratureResolvent(spec, psi.grid(), lambda, backend, threads).apply(psi);
}

std::vector<PointEstimate> resolvent_mc_at(const ProblemSpec& spec, const GridFunction& psi, double lambda,
                                           const MonteCarloBackend& backend, std::span<const double> rates,
                                           std::size_t threads) {
    validate(spec);
    if (backend.paths < 2) throw InvalidInput("Monte Carlo needs at least two paths");
    if (!(backend.dt > 0.0) || !(backend.t_max > backend.dt)) throw InvalidInput("invalid Monte Carlo horizon");
    const double kappa = lambda + spec.gamma;
    const Scheme scheme = std::holds_alternative<Vasicek>(spec.model) ? Scheme::ExactOU : Scheme::Euler;
    const PathStepper stepper(spec.model, backend.dt, scheme);
    const std::size_t steps = static_cast<std::size_t>(std::llround(backend.t_max / backend.dt));
    const HatWeights hw = exponential_hat_weights(kappa, backend.dt);
    const Extension ext = psi_extension(spec);
    const double decay = std::exp(-kappa * backend.dt);

    std::vector<PointEstimate> out;
    out.reserve(rates.size());
    std::vector<double> samples(backend.paths);
    for (double r0 : rates) {
        parallel_for(backend.paths, threads, [&](std::size_t p) {
            auto rng = path_rng(backend.seed, p);
            NormalSampler normal;
            double r = r0, h = 0.0;
            double g_prev = psi.eval(r, ext);
            double disc = 1.0;
            double acc = 0.0;
            for (std::size_t k = 0; k < steps; ++k) {
                stepper.step(r, h, rng, normal);
                const double g = psi.eval(r, ext) * std::exp(spec.alpha * h);
                acc += disc * (hw.first * g_prev + hw.second * g);
                disc *= decay;
                g_prev = g;
            }
            samples[p] = acc;
        });
        const SampleStats s = sample_stats(samples);
        out.push_back({s.mean, s.std_error});
    }
    return out;
}

MonteCarloResolvent resolvent_mc(const ProblemSpec& spec, const GridFunction& psi, double lambda,
                                 const MonteCarloBackend& backend, std::size_t threads) {
    const std::vector<double> rates = psi.grid().coordinates();
    const auto est = resolvent_mc_at(spec, psi, lambda, backend, rates, threads);
    std::vector<double> mean(est.size()), se(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) {
        mean[i] = est[i].mean;
        se[i] = est[i].std_error;
    }
    return {GridFunction(psi.grid(), std::move(mean)), std::move(se)};
}

std::unique_ptr<Resolvent> make_resolvent(const ProblemSpec& spec, const UniformGrid& grid, double lambda,
                                          const ResolventBackend& backend, std::size_t threads) {
    if (const auto* q = std::get_if<QuadratureBackend>(&backend))
        return std::make_unique<QuadratureResolvent>(spec, grid, lambda, *q, threads);
    if (const auto* f = std::get_if<FiniteDifferenceBackend>(&backend))
        return std::make_unique<FdResolvent>(spec, lambda, *f);
    return std::make_unique<McResolvent>(spec, lambda, std::get<MonteCarloBackend>(backend), threads);
}

}  // namespace shortrate
