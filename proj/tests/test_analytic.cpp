#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evdemand/analytic.hpp"

using namespace evd;

namespace {

const TimeGrid kGrid = TimeGrid::daily(0.1);

ChargerModel evening_uniform_model(double mu = 19.0) {
    return ChargerModel{1.0, Gaussian{mu, std::sqrt(10.0)}, Uniform{1.0, 11.0}};
}

double extended_energy(const ExtendedProfile& ext) {
    double sum = 0.0;
    for (double v : ext.values) sum += v;
    return sum * ext.resolution_hours;
}

double max_abs_diff(const DemandProfile& a, const DemandProfile& b) {
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("expected profile integrates to a * E[T] (uniform charging time)") {
    const ExtendedProfile ext = expected_profile_extended(evening_uniform_model(), kGrid);
    // Fubini: the unwrapped expectation integrates to a * mean charging time.
    CHECK(extended_energy(ext) == doctest::Approx(6.0).epsilon(0.005));
}

TEST_CASE("expected profile: probability bounds and vanishing tails") {
    const ChargerModel model = evening_uniform_model();
    const ExtendedProfile ext = expected_profile_extended(model, kGrid);
    for (double v : ext.values) {
        CHECK(v >= 0.0);
        CHECK(v <= model.power_kw);
    }
    // t far below the arrival support: F_t0 is ~1e-9 there
    CHECK(ext.values.front() < 1e-6 * model.power_kw);
    CHECK(ext.values.back() < 1e-6 * model.power_kw);
}

TEST_CASE("narrow charging-time limit reduces to a * [F(t) - F(t-6)]") {
    ChargerModel model = evening_uniform_model();
    model.charging_time = Uniform{5.99, 6.01};  // delta-sifting limit
    const ExtendedProfile ext = expected_profile_extended(model, kGrid);
    const DistributionSpec arrival = model.arrival;
    for (std::size_t i = 0; i < ext.values.size(); i += 7) {
        const double t = ext.slot_mid(static_cast<int>(i));
        const double sifted = cdf(arrival, t) - cdf(arrival, t - 6.0);
        CHECK(std::abs(ext.values[i] - sifted) < 1e-6);
    }
}

TEST_CASE("closed form matches the numeric convolution within 1e-6 * a") {
    const DemandProfile numeric = expected_profile(evening_uniform_model(), kGrid);
    const DemandProfile closed =
        expected_profile_uniform_closed_form(1.0, 19.0, std::sqrt(10.0), 1.0, 11.0, kGrid);
    CHECK(max_abs_diff(numeric, closed) < 1e-6);
}

TEST_CASE("closed form: tail limit and degenerate width") {
    // far-left tail of the unwrapped closed form is ~0
    const ExtendedProfile ext =
        expected_profile_uniform_closed_form_extended(1.0, 19.0, std::sqrt(10.0), 1.0, 11.0, kGrid);
    CHECK(ext.values.front() < 1e-6);

    // degenerate width d - c -> 0+ approaches the sifting case
    const double eps = 1e-5;
    const ExtendedProfile narrow = expected_profile_uniform_closed_form_extended(
        1.0, 19.0, std::sqrt(10.0), 6.0 - eps, 6.0 + eps, kGrid);
    const DistributionSpec arrival = Gaussian{19.0, std::sqrt(10.0)};
    for (std::size_t i = 0; i < narrow.values.size(); i += 11) {
        const double t = narrow.slot_mid(static_cast<int>(i));
        const double sifted = cdf(arrival, t) - cdf(arrival, t - 6.0);
        CHECK(std::abs(narrow.values[i] - sifted) < 1e-6);
    }
}

TEST_CASE("wrapping: energy preserved, identity inside one day, spike folding") {
    const ExtendedProfile ext = expected_profile_extended(evening_uniform_model(), kGrid);
    const DemandProfile wrapped = wrap_modulo_horizon(ext, kGrid);
    CHECK(energy_kwh(wrapped) ==
          doctest::Approx(extended_energy(ext)).epsilon(1e-12));

    // profile supported entirely inside [0, 24) is unchanged
    const TimeGrid hourly = TimeGrid::daily(1.0);
    ExtendedProfile inside;
    inside.start_hours = 3.0;
    inside.resolution_hours = 1.0;
    inside.values = {1.0, 2.0, 3.0};
    const DemandProfile folded = wrap_modulo_horizon(inside, hourly);
    CHECK(folded[3] == 1.0);
    CHECK(folded[4] == 2.0);
    CHECK(folded[5] == 3.0);
    CHECK(energy_kwh(folded) == 6.0);

    // a unit spike at t = 25 h lands in the 1-o'clock slot
    ExtendedProfile spike;
    spike.start_hours = 25.0;
    spike.resolution_hours = 1.0;
    spike.values = {1.0};
    const DemandProfile s = wrap_modulo_horizon(spike, hourly);
    CHECK(s[1] == 1.0);
    CHECK(energy_kwh(s) == 1.0);

    ExtendedProfile misaligned;
    misaligned.start_hours = 0.25;
    misaligned.resolution_hours = 1.0;
    misaligned.values = {1.0};
    CHECK_THROWS_AS(wrap_modulo_horizon(misaligned, hourly), ConfigError);
}

TEST_CASE("serial and parallel slot evaluation produce identical profiles") {
    const ChargerModel model = evening_uniform_model();
    const ExtendedProfile a = expected_profile_extended(model, kGrid, Exec::serial);
    const ExtendedProfile b = expected_profile_extended(model, kGrid, Exec::parallel);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("peak time: argmax oracle, stationarity residual, equivariance") {
    const ChargerModel model = evening_uniform_model();
    const PeakTime peak = peak_time(model, kGrid);
    CHECK_FALSE(peak.degenerate);
    CHECK(peak.residual < peak.residual_tol);

    // direct argmax oracle on the numeric profile
    const ExtendedProfile ext = expected_profile_extended(model, kGrid);
    int best = 0;
    for (std::size_t i = 1; i < ext.values.size(); ++i)
        if (ext.values[i] > ext.values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    CHECK(std::abs(peak.t_max_hours - ext.slot_mid(best)) <= 0.5 * kGrid.resolution_hours());

    // narrow charging time near zero: peak sits just above the arrival mean
    ChargerModel narrow = model;
    narrow.charging_time = Uniform{0.0, 0.1};
    const PeakTime p2 = peak_time(narrow, kGrid);
    CHECK(p2.residual < p2.residual_tol);
    CHECK(std::abs(p2.t_max_hours - 19.05) < 0.2);

    // brute-force scan of the stationarity gap near the peak
    const DistributionSpec arrival = narrow.arrival;
    const DistributionSpec charging = narrow.charging_time;
    double best_t = 0.0, best_gap = 1e300;
    for (double t = 18.0; t <= 20.0; t += 0.001) {
        double conv = 0.0;
        const int steps = 64;  // midpoint rule stays inside the open support
        for (int k = 0; k < steps; ++k) {
            const double dur = 0.1 * (k + 0.5) / steps;
            conv += pdf(arrival, t - dur) * pdf(charging, dur) * (0.1 / steps);
        }
        const double gap = std::abs(pdf(arrival, t) - conv);
        if (gap < best_gap) {
            best_gap = gap;
            best_t = t;
        }
    }
    CHECK(std::abs(p2.t_max_hours - best_t) < 0.06);

    // shifting the arrival mean by +2 h shifts the peak by +2 h
    const PeakTime shifted = peak_time(evening_uniform_model(21.0), kGrid);
    CHECK(std::abs(shifted.t_max_hours - peak.t_max_hours - 2.0) < 1e-9);

    // a charging time much longer than the arrival spread produces a plateau
    // of maximal expectation: reported as degenerate, tie broken earliest
    ChargerModel plateau{1.0, Uniform{0.0, 1.0}, Uniform{23.0, 25.0}};
    const PeakTime p3 = peak_time(plateau, kGrid);
    CHECK(p3.degenerate);
    CHECK(p3.t_max_hours < 3.0);
}

TEST_CASE("matched-moment families produce near-identical profiles, exponential differs") {
    const Moments target{6.0, 25.0 / 3.0};
    const DistributionSpec uni = match_moments(Family::uniform, target.mean, target.variance);
    const DistributionSpec tg = match_moments(Family::truncated_gaussian, target.mean, target.variance);
    const DistributionSpec ric = match_moments(Family::rician, target.mean, target.variance);
    const DistributionSpec expo = match_moments(Family::exponential, target.mean, target.variance);

    auto profile_for = [&](const DistributionSpec& charging) {
        const ChargerModel m{1.0, Gaussian{19.0, std::sqrt(10.0)}, charging};
        return expected_profile(m, kGrid);
    };
    const DemandProfile pu = profile_for(uni);
    const DemandProfile pt = profile_for(tg);
    const DemandProfile pr = profile_for(ric);
    const DemandProfile pe = profile_for(expo);

    const double pair_max = std::max({max_abs_diff(pu, pt), max_abs_diff(pu, pr), max_abs_diff(pt, pr)});
    const double exp_min = std::min({max_abs_diff(pu, pe), max_abs_diff(pt, pe), max_abs_diff(pr, pe)});
    INFO("pairwise max ", pair_max, " vs exponential min ", exp_min);
    CHECK(pair_max < exp_min);
}

TEST_CASE("energy identity holds for all four charging-time families") {
    const Moments target{6.0, 25.0 / 3.0};
    for (Family f : {Family::uniform, Family::exponential, Family::truncated_gaussian, Family::rician}) {
        const DistributionSpec charging = match_moments(f, target.mean, target.variance);
        const ChargerModel model{1.0, Gaussian{19.0, std::sqrt(10.0)}, charging};
        const ExtendedProfile ext = expected_profile_extended(model, kGrid);
        const double expect = moments(charging).mean;  // a = 1
        INFO("family ", family_name(f));
        CHECK(extended_energy(ext) == doctest::Approx(expect).epsilon(0.005));
        const DemandProfile wrapped = wrap_modulo_horizon(ext, kGrid);
        CHECK(energy_kwh(wrapped) == doctest::Approx(extended_energy(ext)).epsilon(1e-12));
    }
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(validate(ChargerModel{0.0, Gaussian{19.0, 1.0}, Uniform{1.0, 2.0}}), ConfigError);
    // charging time must have nonnegative support
    CHECK_THROWS_AS(validate(ChargerModel{1.0, Gaussian{19.0, 1.0}, Gaussian{6.0, 1.0}}), ConfigError);
    CHECK_NOTHROW(validate(ChargerModel{1.0, Gaussian{19.0, 1.0}, TruncatedGaussian{6.0, 1.0}}));
}
