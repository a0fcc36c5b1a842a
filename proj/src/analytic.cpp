#include "evdemand/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "evdemand/numerics.hpp"

namespace evd {

void validate(const ChargerModel& model) {
    if (!(model.power_kw > 0.0) || !std::isfinite(model.power_kw))
        throw ConfigError("ChargerModel: power_kw must be positive");
    validate(model.arrival);
    validate(model.charging_time);
    if (support_lower(model.charging_time) < 0.0)
        throw ConfigError("ChargerModel: charging_time must have nonnegative support");
}

namespace {

// Integration range for integrals against the charging-time density: the
// exact support when bounded, otherwise cut at the 0.9999 quantile.
struct ChargingRange {
    double lo, hi;
};

ChargingRange charging_integration_range(const DistributionSpec& charging) {
    const double lo = std::max(0.0, support_lower(charging));
    const double upper = support_upper(charging);
    // bounded supports are right-open; stay a hair inside so the integrand
    // is smooth on the whole quadrature interval
    const double hi = std::isfinite(upper) ? upper - 1e-9 * std::max(1.0, upper - lo)
                                           : quantile(charging, 0.9999);
    return {lo, hi};
}

// Extended evaluation axis: arrival support out to ~6 sigma plus the
// charging spillover, aligned to whole slots so wrapping stays exact.
struct Axis {
    double start;
    int count;
};

Axis make_axis(const ChargerModel& model, const TimeGrid& grid) {
    const double res = grid.resolution_hours();
    const Moments arr = moments(model.arrival);
    const double sd = std::sqrt(arr.variance);

    double lo = arr.mean - 6.0 * sd;
    const double arr_lower = support_lower(model.arrival);
    if (std::isfinite(arr_lower)) lo = std::max(lo, arr_lower);

    double hi = arr.mean + 6.0 * sd;
    const double arr_upper = support_upper(model.arrival);
    if (std::isfinite(arr_upper)) hi = std::min(hi, arr_upper);

    const double t_upper = support_upper(model.charging_time);
    hi += std::isfinite(t_upper) ? t_upper : quantile(model.charging_time, 0.999);

    const double start = std::floor(lo / res) * res;
    const int count = static_cast<int>(std::ceil((hi - start) / res - 1e-9)) + 1;
    return {start, count};
}

// E[x(t)] / a = F_t0(t) - integral of F_t0(t - T') f_T(T') dT'
// (the total-probability form; values are probabilities, clamped to [0,1]).
double expected_occupancy(const ChargerModel& model, const ChargingRange& range, double t) {
    const double direct = cdf(model.arrival, t);
    double carried = 0.0;
    try {
        carried = adaptive_simpson(
            [&](double dur) { return cdf(model.arrival, t - dur) * pdf(model.charging_time, dur); },
            range.lo, range.hi, 1e-8);
    } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (expected demand at t=" + format_number(t) +
                           " h, charging integral over [" + format_number(range.lo) + ", " +
                           format_number(range.hi) + "])");
    }
    return std::clamp(direct - carried, 0.0, 1.0);
}

// Evaluates one value per slot midpoint, optionally under OpenMP. Slot
// evaluations are independent, so thread count cannot change the result.
template <class Eval>
std::vector<double> evaluate_slots(int count, Exec exec, Eval&& eval) {
    std::vector<double> out(static_cast<std::size_t>(count), 0.0);
    if (exec == Exec::parallel) {
        std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16)
        for (int i = 0; i < count; ++i) {
            try {
                out[static_cast<std::size_t>(i)] = eval(i);
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
    } else {
        for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = eval(i);
    }
    return out;
}

}  // namespace

ExtendedProfile expected_profile_extended(const ChargerModel& model, const TimeGrid& grid,
                                          Exec exec) {
    validate(model);
    const Axis axis = make_axis(model, grid);
    const ChargingRange range = charging_integration_range(model.charging_time);
    const double res = grid.resolution_hours();
    const double a = model.power_kw;

    ExtendedProfile ext;
    ext.start_hours = axis.start;
    ext.resolution_hours = res;
    ext.values = evaluate_slots(axis.count, exec, [&](int i) {
        const double t = axis.start + res * (i + 0.5);
        return a * expected_occupancy(model, range, t);
    });
    return ext;
}

DemandProfile expected_profile(const ChargerModel& model, const TimeGrid& grid, Exec exec) {
    return wrap_modulo_horizon(expected_profile_extended(model, grid, exec), grid);
}

namespace {

// Closed form for Gaussian arrivals and Uniform[c,d) charging time:
// a * [1 - Q((t-mu)/sigma)
//      + sigma/(d-c) * (c' Q(c') - d' Q(d') + f(d') - f(c') + d' - c')]
// with c' = (t-c-mu)/sigma, d' = (t-d-mu)/sigma.
double closed_form_value(double mu, double sigma, double c, double d, double t) {
    const double cp = (t - c - mu) / sigma;
    const double dp = (t - d - mu) / sigma;
    const double bracket = cp * q_function(cp) - dp * q_function(dp) + std_normal_pdf(dp) -
                           std_normal_pdf(cp) + dp - cp;
    const double v = q_function(-(t - mu) / sigma) + sigma / (d - c) * bracket;
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace

ExtendedProfile expected_profile_uniform_closed_form_extended(double a, double mu, double sigma,
                                                              double c, double d,
                                                              const TimeGrid& grid) {
    const ChargerModel model{a, Gaussian{mu, sigma}, Uniform{c, d}};
    validate(model);
    const Axis axis = make_axis(model, grid);
    const double res = grid.resolution_hours();

    ExtendedProfile ext;
    ext.start_hours = axis.start;
    ext.resolution_hours = res;
    ext.values.resize(static_cast<std::size_t>(axis.count));
    for (int i = 0; i < axis.count; ++i) {
        const double t = axis.start + res * (i + 0.5);
        ext.values[static_cast<std::size_t>(i)] = a * closed_form_value(mu, sigma, c, d, t);
    }
    return ext;
}

DemandProfile expected_profile_uniform_closed_form(double a, double mu, double sigma, double c,
                                                   double d, const TimeGrid& grid) {
    return wrap_modulo_horizon(expected_profile_uniform_closed_form_extended(a, mu, sigma, c, d, grid),
                               grid);
}

DemandProfile wrap_modulo_horizon(const ExtendedProfile& extended, const TimeGrid& grid) {
    if (!grid.circular()) throw ConfigError("wrap_modulo_horizon: grid must be circular");
    const double res = grid.resolution_hours();
    if (std::abs(extended.resolution_hours - res) > 1e-12 * res)
        throw ConfigError("wrap_modulo_horizon: resolution mismatch");
    const double offset_real = extended.start_hours / res;
    const double offset_rounded = std::round(offset_real);
    if (std::abs(offset_real - offset_rounded) > 1e-9)
        throw ConfigError("wrap_modulo_horizon: extended axis is not slot-aligned");
    const long long offset = static_cast<long long>(offset_rounded);

    std::vector<double> folded(static_cast<std::size_t>(grid.slot_count()), 0.0);
    for (std::size_t i = 0; i < extended.values.size(); ++i) {
        const int slot = grid.wrap_slot(offset + static_cast<long long>(i));
        folded[static_cast<std::size_t>(slot)] += extended.values[i];
    }
    return DemandProfile(grid, std::move(folded));
}

PeakTime peak_time(const ChargerModel& model, const TimeGrid& grid) {
    const ExtendedProfile ext = expected_profile_extended(model, grid, Exec::parallel);
    const auto& v = ext.values;
    const int n = static_cast<int>(v.size());

    int best = 0;
    for (int i = 1; i < n; ++i)
        if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;

    PeakTime result;
    const double vmax = v[static_cast<std::size_t>(best)];
    const double vmin = *std::min_element(v.begin(), v.end());
    // a plateau of near-max slots means the maximizer is not unique
    int near_max = 0;
    for (double val : v)
        if (vmax - val <= 1e-9 * model.power_kw) ++near_max;
    result.degenerate =
        (best == 0 || best == n - 1 || near_max > 3 || vmax - vmin <= 1e-9 * model.power_kw);

    // Local quadratic refinement around the argmax slot midpoint.
    double t_star = ext.slot_mid(best);
    if (!result.degenerate) {
        const double ym = v[static_cast<std::size_t>(best - 1)];
        const double y0 = vmax;
        const double yp = v[static_cast<std::size_t>(best + 1)];
        const double denom = ym - 2.0 * y0 + yp;
        if (denom < -1e-300) {
            const double shift = 0.5 * (ym - yp) / denom;
            t_star += std::clamp(shift, -0.5, 0.5) * ext.resolution_hours;
        }
    }
    result.t_max_hours = t_star;

    // Stationarity check: f_t0(t*) should equal (f_t0 conv f_T)(t*).
    const ChargingRange range = charging_integration_range(model.charging_time);
    auto conv_gap = [&](double t) {
        const double carried = adaptive_simpson(
            [&](double dur) { return pdf(model.arrival, t - dur) * pdf(model.charging_time, dur); },
            range.lo, range.hi, 1e-10);
        return pdf(model.arrival, t) - carried;
    };
    const double h = ext.resolution_hours;
    const double g0 = conv_gap(t_star);
    const double slope = (conv_gap(t_star + h) - conv_gap(t_star - h)) / (2.0 * h);
    result.residual = std::abs(g0);
    result.residual_tol =
        std::abs(slope) * h + 1e-6 * pdf(model.arrival, moments(model.arrival).mean);
    return result;
}

}  // namespace evd
