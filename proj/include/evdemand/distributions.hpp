#pragma once

#include <string>
#include <variant>

#include "evdemand/rng.hpp"

namespace evd {

// Parameters are in hours (rates in 1/hours).
struct Gaussian {
    double mu, sigma;
};
struct Uniform {
    double c, d;  // support [c, d), 0 <= c < d
};
struct Exponential {
    double lambda;  // mean 1/lambda
};
// Gaussian restricted to [0, inf); mu/sigma are the pre-truncation
// parameters of the parent Gaussian.
struct TruncatedGaussian {
    double mu, sigma;
};
struct Rician {
    double nu, sigma;  // noncentrality and scale
};

using DistributionSpec = std::variant<Gaussian, Uniform, Exponential, TruncatedGaussian, Rician>;

enum class Family { gaussian, uniform, exponential, truncated_gaussian, rician };

// Throws ConfigError on parameter violations (names the offending field).
void validate(const DistributionSpec& spec);

double pdf(const DistributionSpec& spec, double x);
double cdf(const DistributionSpec& spec, double x);

// One draw. Uniform/Exponential by inverse transform, Gaussian by Box-Muller,
// TruncatedGaussian by accept-reject (bounded attempts), Rician from two
// independent Gaussians: sqrt((nu + s*Z1)^2 + (s*Z2)^2).
double sample(const DistributionSpec& spec, Rng& rng);

struct Moments {
    double mean, variance;
};
Moments moments(const DistributionSpec& spec);

// Smallest x with cdf(x) >= p, by bisection.
double quantile(const DistributionSpec& spec, double p);

double support_lower(const DistributionSpec& spec);
double support_upper(const DistributionSpec& spec);  // +inf when unbounded

// Picks parameters so the law's mean/variance hit the targets (1e-6 relative).
// Exponential has one degree of freedom: the mean is matched, the variance
// comes out as 1/lambda^2. Throws InfeasibleError when no parameters exist.
DistributionSpec match_moments(Family family, double target_mean, double target_variance);

// Gaussian tail probability Q(x) = P(Z > x), via erfc.
double q_function(double x);

// Standard normal density.
double std_normal_pdf(double x);

// Modified Bessel function of the first kind, order zero. Power series for
// x < 15, scaled asymptotic expansion above (overflow-safe via the scaled form).
double bessel_i0(double x);
double bessel_i0_scaled(double x);  // exp(-x) * I0(x), x >= 0

Family family_of(const DistributionSpec& spec);
std::string family_name(Family f);
Family family_from_name(const std::string& name);

// Human-readable spec, e.g. "gaussian(mu=19, sigma=3.16228)".
std::string describe(const DistributionSpec& spec);

}  // namespace evd
