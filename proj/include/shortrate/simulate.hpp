#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "shortrate/grid.hpp"
#include "shortrate/model.hpp"
#include "shortrate/numerics.hpp"

namespace shortrate {

enum class Scheme { ExactOU, Euler };

struct PathConfig {
    double dt = 0.01;
    double t_max = 40.0;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::ExactOU;
};

/// Advances (r, h) by one step of fixed size.
class PathStepper {
public:
    PathStepper(const ShortRateModel& model, double dt, Scheme scheme);

    void step(double& r, double& h, std::mt19937_64& rng, NormalSampler& normal) const;
    std::size_t clamp_events() const { return clamp_events_; }
    double dt() const { return dt_; }
    /// Diffusion coefficient used by the bridge crossing test.
    double local_sigma(double r) const;

private:
    ShortRateModel model_;
    double dt_;
    Scheme scheme_;
    // exact Vasicek step
    double decay_ = 0.0;
    double e1_over_b_ = 0.0;
    double l11_ = 0.0;
    double l21_ = 0.0;
    double l22_ = 0.0;
    mutable std::size_t clamp_events_ = 0;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<double> r;
    std::vector<double> h;
    std::vector<double> V;
    std::vector<double> C;
    std::vector<double> c;
    std::optional<double> tau_zero;
    std::size_t clamp_events = 0;
};

Trajectory sample_path(const ShortRateModel& model, double r0, const PathConfig& config,
                       std::uint64_t path_index = 0);

/// Wealth under c_t = policy(r_t): log V grows by the trapezoid integral of (r - c).
/// With `stop_at_zero`, the path is cut at the first time r reaches 0.
Trajectory wealth_trajectory(Trajectory path, const GridFunction& policy_c, double v, bool stop_at_zero = false);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double tail_bound = 0.0;
    double absorbed_fraction = 0.0;
    std::size_t paths = 0;
};

/// E int_0^t_max exp(-gamma t) C_t^alpha dt with C = policy(r) V.
Estimate estimate_J(const ProblemSpec& spec, const GridFunction& policy_c, double r0, double v,
                    const PathConfig& config, std::size_t threads = 1);

/// E exp(-gamma tau_0 + alpha h_{tau_0}) for the first hitting time of 0.
Estimate estimate_KL_mc(const ProblemSpec& spec, double r0, const PathConfig& config, std::size_t threads = 1);

}  // namespace shortrate
