#include "shortrate/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>

#include "shortrate/errors.hpp"

namespace shortrate {

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n) throw InvalidInput("tridiagonal size mismatch");
    std::vector<double> c(n), d(n), x(n);
    double pivot = diag[0];
    if (pivot == 0.0) throw NumericalError("zero pivot in tridiagonal solve");
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i] * c[i - 1];
        if (pivot == 0.0) throw NumericalError("zero pivot in tridiagonal solve");
        c[i] = (i + 1 < n) ? upper[i] / pivot : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

double romberg(const std::function<double(double)>& f, double lo, double hi, double rel_tol, int max_levels) {
    std::vector<double> prev, cur;
    double h = hi - lo;
    prev.push_back(0.5 * h * (f(lo) + f(hi)));
    std::size_t pieces = 1;
    for (int level = 1; level <= max_levels; ++level) {
        double sum = 0.0;
        for (std::size_t k = 0; k < pieces; ++k) sum += f(lo + (static_cast<double>(k) + 0.5) * h);
        cur.assign(static_cast<std::size_t>(level) + 1, 0.0);
        cur[0] = 0.5 * prev[0] + 0.5 * h * sum;
        double factor = 1.0;
        for (int j = 1; j <= level; ++j) {
            factor *= 4.0;
            cur[j] = cur[j - 1] + (cur[j - 1] - prev[j - 1]) / (factor - 1.0);
        }
        const double delta = std::abs(cur[level] - prev[level - 1]);
        if (level >= 4 && delta <= rel_tol * std::abs(cur[level])) return cur[level];
        if (level >= 4 && cur[level] == 0.0 && delta == 0.0) return 0.0;
        prev.swap(cur);
        h *= 0.5;
        pieces *= 2;
    }
    return prev.back();
}

namespace {

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

GaussRule make_gauss_rule(int n) {
    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        rule.x[i] = z;
        rule.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return rule;
}

const GaussRule& gauss_rule(int n) {
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_rule(n)).first;
    return it->second;
}

}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double lo, double hi, int points) {
    const GaussRule& rule = gauss_rule(points);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (int i = 0; i < points; ++i) sum += rule.w[i] * f(mid + half * rule.x[i]);
    return half * sum;
}

HatWeights exponential_hat_weights(double kappa, double h) {
    const double x = kappa * h;
    if (std::abs(x) < 0.5) {
        double first = 0.0, second = 0.0;
        double power = 1.0;
        double fact = 2.0;  // (k + 2)!
        for (int k = 0; k < 20; ++k) {
            first += power / fact;
            second += power * (k + 1) / fact;
            power *= -x;
            fact *= (k + 3);
        }
        return {h * first, h * second};
    }
    const double ex = std::exp(-x);
    return {h * (x - 1.0 + ex) / (x * x), h * (1.0 - ex - x * ex) / (x * x)};
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path_index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) + path_index));
}

double NormalSampler::operator()(std::mt19937_64& rng) {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    double u, v, s;
    do {
        u = 2.0 * (static_cast<double>(rng() >> 11) * scale) - 1.0;
        v = 2.0 * (static_cast<double>(rng() >> 11) * scale) - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& f) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    const std::size_t workers = std::min(threads, n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

SampleStats sample_stats(std::span<const double> xs) {
    SampleStats s;
    const std::size_t n = xs.size();
    if (n == 0) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(n);
    if (n < 2) return s;
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    return s;
}

}  // namespace shortrate
