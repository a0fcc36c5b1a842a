#include "evdemand/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evdemand/core.hpp"
#include "evdemand/numerics.hpp"

namespace evd {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Max draws for the truncated-Gaussian accept-reject loop. Unreachable for
// any sane parameterization (acceptance = Q(-mu/sigma)); guarantees
// termination for hostile ones.
constexpr long kAcceptRejectCap = 1000000;
}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

namespace {

double i0_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

// exp(-x) * I0(x) for x >= 15 via the asymptotic expansion; terms decrease
// well past the accuracy floor in this range.
double i0_scaled_asymptotic(double x) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 24; ++k) {
        const double odd = 2.0 * k + 1.0;
        term *= odd * odd / (8.0 * x * (k + 1.0));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum / std::sqrt(2.0 * kPi * x);
}

}  // namespace

double bessel_i0(double x) {
    if (x < 0.0) throw std::domain_error("bessel_i0: negative argument");
    if (x < 15.0) return i0_series(x);
    return std::exp(x) * i0_scaled_asymptotic(x);
}

double bessel_i0_scaled(double x) {
    if (x < 0.0) throw std::domain_error("bessel_i0_scaled: negative argument");
    if (x < 15.0) return std::exp(-x) * i0_series(x);
    return i0_scaled_asymptotic(x);
}

void validate(const DistributionSpec& spec) {
    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                if (!std::isfinite(d.mu)) throw ConfigError("gaussian: mu must be finite");
                if (!(d.sigma > 0.0) || !std::isfinite(d.sigma))
                    throw ConfigError("gaussian: sigma must be positive");
            } else if constexpr (std::is_same_v<T, Uniform>) {
                if (!(d.c >= 0.0) || !std::isfinite(d.c))
                    throw ConfigError("uniform: c must be nonnegative");
                if (!(d.d > d.c) || !std::isfinite(d.d))
                    throw ConfigError("uniform: d must exceed c");
            } else if constexpr (std::is_same_v<T, Exponential>) {
                if (!(d.lambda > 0.0) || !std::isfinite(d.lambda))
                    throw ConfigError("exponential: lambda must be positive");
            } else if constexpr (std::is_same_v<T, TruncatedGaussian>) {
                if (!std::isfinite(d.mu)) throw ConfigError("truncated_gaussian: mu must be finite");
                if (!(d.sigma > 0.0) || !std::isfinite(d.sigma))
                    throw ConfigError("truncated_gaussian: sigma must be positive");
            } else if constexpr (std::is_same_v<T, Rician>) {
                if (!(d.nu >= 0.0) || !std::isfinite(d.nu))
                    throw ConfigError("rician: nu must be nonnegative");
                if (!(d.sigma > 0.0) || !std::isfinite(d.sigma))
                    throw ConfigError("rician: sigma must be positive");
            }
        },
        spec);
}

namespace {

double rician_pdf(const Rician& r, double x) {
    if (x < 0.0) return 0.0;
    const double s2 = r.sigma * r.sigma;
    // The I0 factor grows like exp(x*nu/s2); evaluate in scaled form so the
    // combined exponent -(x - nu)^2 / (2 s2) never overflows.
    const double z = x * r.nu / s2;
    return x / s2 * std::exp(-0.5 * (x - r.nu) * (x - r.nu) / s2) * bessel_i0_scaled(z);
}

double rician_cdf(const Rician& r, double x) {
    if (x <= 0.0) return 0.0;
    const double hi = std::min(x, r.nu + 14.0 * r.sigma);
    if (hi <= 0.0) return 0.0;
    double v = adaptive_simpson([&](double t) { return rician_pdf(r, t); }, 0.0, hi, 1e-8);
    return std::clamp(v, 0.0, 1.0);
}

double rician_mean(const Rician& r) {
    const double hi = r.nu + 14.0 * r.sigma;
    return adaptive_simpson([&](double t) { return t * rician_pdf(r, t); }, 0.0, hi, 1e-9);
}

}  // namespace

double pdf(const DistributionSpec& spec, double x) {
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return std_normal_pdf((x - d.mu) / d.sigma) / d.sigma;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return (x >= d.c && x < d.d) ? 1.0 / (d.d - d.c) : 0.0;
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return x >= 0.0 ? d.lambda * std::exp(-d.lambda * x) : 0.0;
            } else if constexpr (std::is_same_v<T, TruncatedGaussian>) {
                if (x < 0.0) return 0.0;
                const double norm = q_function(-d.mu / d.sigma);
                return std_normal_pdf((x - d.mu) / d.sigma) / (d.sigma * norm);
            } else {
                return rician_pdf(d, x);
            }
        },
        spec);
}

double cdf(const DistributionSpec& spec, double x) {
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                // 1 - Q(z) evaluated as Q(-z): both tails stay accurate
                return q_function(-(x - d.mu) / d.sigma);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return std::clamp((x - d.c) / (d.d - d.c), 0.0, 1.0);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return x > 0.0 ? -std::expm1(-d.lambda * x) : 0.0;
            } else if constexpr (std::is_same_v<T, TruncatedGaussian>) {
                if (x <= 0.0) return 0.0;
                const double norm = q_function(-d.mu / d.sigma);
                return std::clamp(1.0 - q_function((x - d.mu) / d.sigma) / norm, 0.0, 1.0);
            } else {
                return rician_cdf(d, x);
            }
        },
        spec);
}

double sample(const DistributionSpec& spec, Rng& rng) {
    return std::visit(
        [&rng](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return d.mu + d.sigma * rng.normal();
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return rng.uniform(d.c, d.d);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return -std::log(1.0 - rng.uniform01()) / d.lambda;
            } else if constexpr (std::is_same_v<T, TruncatedGaussian>) {
                for (long i = 0; i < kAcceptRejectCap; ++i) {
                    const double g = d.mu + d.sigma * rng.normal();
                    if (g >= 0.0) return g;
                }
                throw NumericError("truncated_gaussian: accept-reject attempt cap reached");
            } else {
                const double z1 = rng.normal();
                const double z2 = rng.normal();
                const double a = d.nu + d.sigma * z1;
                const double b = d.sigma * z2;
                return std::sqrt(a * a + b * b);
            }
        },
        spec);
}

Moments moments(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& d) -> Moments {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return {d.mu, d.sigma * d.sigma};
            } else if constexpr (std::is_same_v<T, Uniform>) {
                const double w = d.d - d.c;
                return {0.5 * (d.c + d.d), w * w / 12.0};
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return {1.0 / d.lambda, 1.0 / (d.lambda * d.lambda)};
            } else if constexpr (std::is_same_v<T, TruncatedGaussian>) {
                // One-sided truncation at zero of the parent N(mu, sigma^2):
                // with alpha = -mu/sigma and hazard h = phi(alpha)/Q(alpha),
                // mean = mu + sigma h, var = sigma^2 (1 + alpha h - h^2).
                const double alpha = -d.mu / d.sigma;
                const double h = std_normal_pdf(alpha) / q_function(alpha);
                const double mean = d.mu + d.sigma * h;
                const double var = d.sigma * d.sigma * (1.0 + alpha * h - h * h);
                return {mean, var};
            } else {
                // Second moment is exact (nu^2 + 2 sigma^2); the mean has no
                // elementary closed form, quadrature matches it to ~1e-9.
                const double mean = rician_mean(d);
                const double second = d.nu * d.nu + 2.0 * d.sigma * d.sigma;
                return {mean, second - mean * mean};
            }
        },
        spec);
}

double support_lower(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>)
                return -kInf;
            else if constexpr (std::is_same_v<T, Uniform>)
                return d.c;
            else
                return 0.0;
        },
        spec);
}

double support_upper(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>)
                return d.d;
            else
                return kInf;
        },
        spec);
}

double quantile(const DistributionSpec& spec, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile: p must lie in (0, 1)");
    const Moments m = moments(spec);
    const double sd = std::sqrt(std::max(m.variance, 1e-30));

    double lo = support_lower(spec);
    if (!std::isfinite(lo)) lo = m.mean - 20.0 * sd;
    double hi = support_upper(spec);
    if (!std::isfinite(hi)) {
        hi = m.mean + 8.0 * sd;
        while (cdf(spec, hi) < p) {
            hi = m.mean + 2.0 * (hi - m.mean);
            if (hi > m.mean + 1e9 * sd) throw NumericError("quantile: bracket expansion failed");
        }
    }
    for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(spec, mid) >= p ? hi : lo) = mid;
    }
    return hi;
}

namespace {

DistributionSpec match_two_parameter(Family family, double m, double v) {
    // Squared relative moment residuals; smooth in both parameters.
    auto make = [family](double p0, double p1) -> DistributionSpec {
        if (family == Family::truncated_gaussian) return TruncatedGaussian{p0, p1};
        return Rician{std::abs(p0), p1};
    };
    auto objective = [&](double p0, double p1) -> double {
        if (p1 <= 1e-9) return 1e12 * (1.0 + (1e-9 - p1));
        const Moments got = moments(make(p0, p1));
        const double r1 = (got.mean - m) / m;
        const double r2 = (got.variance - v) / v;
        return r1 * r1 + r2 * r2;
    };

    const double sd = std::sqrt(v);
    std::array<double, 2> start{m, sd};
    if (family == Family::rician) {
        // start near the large-nu regime where Rician ~ N(nu, sigma^2)
        start = {std::sqrt(std::max(m * m - v, 0.01)), sd};
    }
    const auto nm = nelder_mead_2d(objective, start, {0.5 * sd, 0.5 * sd}, 500, 1e-18);

    const DistributionSpec result = make(nm.x[0], nm.x[1]);
    const Moments got = moments(result);
    if (std::abs(got.mean - m) > 1e-6 * std::abs(m) ||
        std::abs(got.variance - v) > 1e-6 * std::abs(v)) {
        throw InfeasibleError("match_moments: " + family_name(family) +
                              " cannot attain mean/variance (" + format_number(m) + ", " +
                              format_number(v) + "); best residual " + format_number(nm.fmin));
    }
    return result;
}

}  // namespace

DistributionSpec match_moments(Family family, double target_mean, double target_variance) {
    if (!(target_mean > 0.0)) throw ConfigError("match_moments: target mean must be positive");
    if (!(target_variance > 0.0)) throw ConfigError("match_moments: target variance must be positive");

    switch (family) {
        case Family::uniform: {
            const double w = std::sqrt(12.0 * target_variance);
            const double c = target_mean - 0.5 * w;
            if (c < 0.0)
                throw InfeasibleError("match_moments: uniform would need c < 0 for this variance");
            return Uniform{c, target_mean + 0.5 * w};
        }
        case Family::exponential:
            // One degree of freedom: the mean is matched, variance = mean^2.
            return Exponential{1.0 / target_mean};
        case Family::truncated_gaussian:
        case Family::rician:
            return match_two_parameter(family, target_mean, target_variance);
        case Family::gaussian:
            return Gaussian{target_mean, std::sqrt(target_variance)};
    }
    throw ConfigError("match_moments: unknown family");
}

Family family_of(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& d) -> Family {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) return Family::gaussian;
            else if constexpr (std::is_same_v<T, Uniform>) return Family::uniform;
            else if constexpr (std::is_same_v<T, Exponential>) return Family::exponential;
            else if constexpr (std::is_same_v<T, TruncatedGaussian>) return Family::truncated_gaussian;
            else return Family::rician;
        },
        spec);
}

std::string family_name(Family f) {
    switch (f) {
        case Family::gaussian: return "gaussian";
        case Family::uniform: return "uniform";
        case Family::exponential: return "exponential";
        case Family::truncated_gaussian: return "truncated_gaussian";
        case Family::rician: return "rician";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "uniform") return Family::uniform;
    if (name == "exponential") return Family::exponential;
    if (name == "truncated_gaussian") return Family::truncated_gaussian;
    if (name == "rician") return Family::rician;
    throw ConfigError("unknown distribution family: " + name);
}

std::string describe(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return "gaussian(mu=" + format_number(d.mu) + ", sigma=" + format_number(d.sigma) + ")";
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return "uniform(c=" + format_number(d.c) + ", d=" + format_number(d.d) + ")";
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return "exponential(lambda=" + format_number(d.lambda) + ")";
            } else if constexpr (std::is_same_v<T, TruncatedGaussian>) {
                return "truncated_gaussian(mu=" + format_number(d.mu) +
                       ", sigma=" + format_number(d.sigma) + ")";
            } else {
                return "rician(nu=" + format_number(d.nu) + ", sigma=" + format_number(d.sigma) + ")";
            }
        },
        spec);
}

}  // namespace evd
