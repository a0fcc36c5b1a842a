#pragma once

#include <vector>

#include "evdemand/core.hpp"
#include "evdemand/montecarlo.hpp"

namespace evd {

enum class UpdateRule { gauss_seidel, jacobi };

struct DrConfig {
    bool v2g_enabled = false;
    int max_iterations = 50;
    // <= 0 means auto: 1e-3 times the mean of the initial aggregate.
    double convergence_eps_kw = 0.0;
    UpdateRule update_rule = UpdateRule::gauss_seidel;
    std::vector<int> update_order;  // empty = identity permutation
};

struct DrOutcome {
    std::vector<DemandProfile> schedules;  // per-user EV load
    DemandProfile aggregate;               // base + EV, all users
    int iterations_used = 0;
    bool converged = false;
    double par_before = 0.0, par_after = 0.0;
    double peak_before_kw = 0.0, peak_after_kw = 0.0;

    DrOutcome(DemandProfile agg) : aggregate(std::move(agg)) {}
};

// Fraction of each slot covered by the charging window [arrival, departure],
// wrapped onto the grid; clamped to 1 when the window exceeds the horizon.
std::vector<double> window_weights(const EvSession& session, const TimeGrid& grid);

// Charge at full power from arrival for the whole duration (plug-in-and-go).
DemandProfile uncoordinated_schedule(const EvSession& session, double power_kw,
                                     const TimeGrid& grid);

// Minimizes <schedule, others_load> over the feasible set: energy fixed at
// the session's requirement, per-slot bound p_max scaled by window overlap,
// zero outside the window; bounds become symmetric with V2G. Solved exactly
// by greedy fill (ties broken to the lower slot index), extended with
// charge/discharge pairing when V2G is enabled.
DemandProfile best_response(const EvSession& session, const DemandProfile& others_load, bool v2g,
                            const TimeGrid& grid);

// Iterative aggregator loop: starts from uncoordinated schedules and sweeps
// users, each re-solving its best response against the latest aggregate minus
// its own EV load. Stops when the aggregate moves less than the tolerance
// over a full sweep, or at max_iterations (converged flag reported honestly).
DrOutcome run_dr(const std::vector<EvSession>& sessions,
                 const std::vector<DemandProfile>& base_loads, double charger_power_kw,
                 const DrConfig& cfg, const TimeGrid& grid);

// Inner product of the two kW vectors (the quantity each user minimizes).
double dr_objective(const DemandProfile& schedule, const DemandProfile& others_load);

// Post-hoc feasibility: energy within tol_kwh, box bounds, zero outside the
// window, nonnegative unless v2g.
bool schedule_feasible(const DemandProfile& schedule, const EvSession& session, bool v2g,
                       double tol_kwh = 1e-9);

}  // namespace evd
