#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace shortrate {

/// dr = (a - b r) dt + sigma dW
struct Vasicek {
    double a = 0.03;
    double b = 0.5;
    double sigma = 0.02;
};

/// dr = kappa((a + b)/2 - r) dt + sigma (r - a)(b - r) dW, confined to [a, b].
struct InvariantInterval {
    double a = 0.0;
    double b = 0.1;
    double kappa = 1.0;
    double sigma = 10.0;
};

/// dr = mu dt + sigma dW
struct DriftedBM {
    double mu = 0.0;
    double sigma = 0.02;
};

/// dr = mu r dt + sigma r dW
struct GeometricBM {
    double mu = 0.0;
    double sigma = 0.2;
};

/// r_t = r for all t. The grid coordinate is ignored by this model.
struct ConstantRate {
    double r = 0.05;
};

using ShortRateModel = std::variant<Vasicek, InvariantInterval, DriftedBM, GeometricBM, ConstantRate>;

enum class Variant { A, B, C };

struct ProblemSpec {
    ShortRateModel model = Vasicek{};
    double alpha = 0.5;
    double gamma = 1.5304;
    Variant variant = Variant::A;
};

/// Closed state interval; infinite ends are +-infinity.
struct Domain {
    double lower;
    double upper;
    bool contains(double r) const { return r >= lower && r <= upper; }
};

void validate(const ShortRateModel& model);
void validate(const ProblemSpec& spec);

std::string model_name(const ShortRateModel& model);
Domain domain(const ShortRateModel& model);

/// Drift and diffusion coefficients. Throws InvalidInput outside the domain.
double drift(const ShortRateModel& model, double r);
double diffusion(const ShortRateModel& model, double r);

/// Rate entering the discount at grid coordinate r (the fixed rate for ConstantRate).
double state_rate(const ShortRateModel& model, double r);

/// Q f = 0.5 sigma^2 f'' + mu f' from supplied derivatives.
double generator_apply(const ShortRateModel& model, double r, double fp, double fpp);

struct ScaleCheckOptions {
    double ratio = 0.5;       // geometric mesh ratio toward each endpoint
    int levels = 60;
    double threshold = 1e6;   // partial integral size that counts as divergence
};

struct EndpointDiagnostics {
    bool diverges = false;
    std::vector<double> log_partials;  // natural log of the partial scale integral per level
};

struct InvarianceReport {
    bool invariant = false;
    EndpointDiagnostics lower;
    EndpointDiagnostics upper;
};

/// Scale-function test on (a, b) with reference point (a + b)/2.
InvarianceReport scale_function_check(const std::function<double(double)>& mu,
                                      const std::function<double(double)>& sigma, double a, double b,
                                      const ScaleCheckOptions& options = {});

InvarianceReport invariance_check(const InvariantInterval& model, const ScaleCheckOptions& options = {});

}  // namespace shortrate
