#pragma once

#include <cstdint>
#include <vector>

#include "evdemand/analytic.hpp"
#include "evdemand/core.hpp"
#include "evdemand/rng.hpp"

namespace evd {

// One vehicle's day. departure_hours is arrival-day-relative and may exceed
// 24 (a clock value earlier than the arrival means the next day).
struct EvSession {
    double arrival_hours = 0.0;
    double duration_hours = 0.0;
    double departure_hours = 0.0;
    double energy_kwh = 0.0;  // power * duration
    double p_max_kw = 0.0;
};

void validate(const EvSession& s);

struct FleetSpec {
    int n_users = 1;
    ChargerModel charger;
    DistributionSpec departure;
    std::uint64_t seed = 1;
};

void validate(const FleetSpec& f);

// Draws (t0, T, beta) independently and accepts only when
// beta >= t0 + T (beta bumped to the next day when its clock value precedes
// the arrival). Retries on rejection; errors out if the acceptance rate is
// pathologically low.
EvSession sample_session(const FleetSpec& fleet, int user_index, Rng& rng);
// Convenience: derives the per-user substream from (fleet.seed, user_index).
EvSession sample_session(const FleetSpec& fleet, int user_index);
std::vector<EvSession> sample_fleet(const FleetSpec& fleet);

// Constant power_kw over [arrival, arrival + duration) wrapped modulo the
// horizon; partial slots weighted by exact interval overlap, so
// energy(profile) = power_kw * duration.
DemandProfile realize_demand(const EvSession& session, double power_kw, const TimeGrid& grid);

struct EmpiricalProfile {
    DemandProfile mean;
    std::vector<double> stderr_kw;  // per-slot standard error of the mean
};

// Mean of n_samples independent realizations of the pure (t0, T) process —
// no departure rejection, matching the expectation formula it is compared
// against. Samples are accumulated in fixed-size blocks so the result is
// bit-identical for any worker count; Exec::parallel runs blocks under OpenMP.
EmpiricalProfile empirical_expected_profile(const FleetSpec& fleet, int n_samples,
                                            const TimeGrid& grid, Exec exec = Exec::parallel);

}  // namespace evd
