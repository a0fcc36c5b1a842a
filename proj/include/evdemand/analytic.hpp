#pragma once

#include "evdemand/core.hpp"
#include "evdemand/distributions.hpp"

namespace evd {

// Constant-power charger: one session delivers power_kw for the drawn
// charging duration, so session energy = power_kw * duration.
struct ChargerModel {
    double power_kw = 1.0;
    DistributionSpec arrival;        // plug-in time t0
    DistributionSpec charging_time;  // duration T, nonnegative support
};

void validate(const ChargerModel& model);

// Profile on a linear (unwrapped) time axis. start_hours is an integer
// multiple of resolution_hours; value i is the expected power at the
// midpoint of [start + i*res, start + (i+1)*res).
struct ExtendedProfile {
    double start_hours = 0.0;
    double resolution_hours = 1.0;
    std::vector<double> values;

    double end_hours() const { return start_hours + resolution_hours * static_cast<double>(values.size()); }
    double slot_mid(int i) const { return start_hours + resolution_hours * (i + 0.5); }
};

// Expected uncoordinated demand E[x(t)] = a*(F_t0(t) - integral of
// F_t0(t - T') f_T(T') dT'), evaluated slot-by-slot on an axis covering the
// arrival support plus charging spillover. Slot evaluations are independent;
// Exec::parallel distributes them over OpenMP threads with identical results.
ExtendedProfile expected_profile_extended(const ChargerModel& model, const TimeGrid& grid,
                                          Exec exec = Exec::parallel);

// The extended profile folded onto the grid's (wrapped) day.
DemandProfile expected_profile(const ChargerModel& model, const TimeGrid& grid,
                               Exec exec = Exec::parallel);

// Closed form for Gaussian(mu, sigma) arrivals and Uniform[c, d) charging
// time, in terms of Q and the normal density; wrapped like expected_profile.
DemandProfile expected_profile_uniform_closed_form(double a, double mu, double sigma, double c,
                                                   double d, const TimeGrid& grid);
ExtendedProfile expected_profile_uniform_closed_form_extended(double a, double mu, double sigma,
                                                              double c, double d,
                                                              const TimeGrid& grid);

// Folds a linear-axis profile modulo the grid horizon by summing values at
// congruent times. Preserves total energy exactly.
DemandProfile wrap_modulo_horizon(const ExtendedProfile& extended, const TimeGrid& grid);

struct PeakTime {
    double t_max_hours = 0.0;  // on the unwrapped axis
    double residual = 0.0;     // |f_t0(t*) - (f_t0 conv f_T)(t*)|
    double residual_tol = 0.0;
    bool degenerate = false;
};

// Argmax of the expected profile (grid argmax + local quadratic refinement,
// ties to the earliest time), verified against the stationarity condition
// f_t0(t*) = (f_t0 conv f_T)(t*).
PeakTime peak_time(const ChargerModel& model, const TimeGrid& grid);

}  // namespace evd
