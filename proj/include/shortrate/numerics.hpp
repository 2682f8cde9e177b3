#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <thread>
#include <vector>

namespace shortrate {

/// Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored. Throws on a zero pivot.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Romberg integration of f on [lo, hi] to relative tolerance `rel_tol`.
double romberg(const std::function<double(double)>& f, double lo, double hi, double rel_tol = 1e-12,
               int max_levels = 20);

/// Fixed-order Gauss-Legendre rule on [lo, hi].
double gauss_legendre(const std::function<double(double)>& f, double lo, double hi, int points = 16);

/// Integral of exp(-kappa t) against the two hat functions of the cell [0, h]:
/// first = int exp(-kappa s)(1 - s/h) ds, second = int exp(-kappa s)(s/h) ds.
struct HatWeights {
    double first;
    double second;
};
HatWeights exponential_hat_weights(double kappa, double h);

/// Deterministic per-path generator: the stream for path k depends only on (seed, k).
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path_index);

/// Standard normal draws that do not depend on the standard library's distribution code.
class NormalSampler {
public:
    double operator()(std::mt19937_64& rng);

private:
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Runs f(i) for i in [0, n) on up to `threads` workers with a static partition.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& f);

/// Mean and standard error of a sample.
struct SampleStats {
    double mean = 0.0;
    double std_error = 0.0;
};
SampleStats sample_stats(std::span<const double> xs);

}  // namespace shortrate
