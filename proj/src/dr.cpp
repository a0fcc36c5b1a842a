#include "evdemand/dr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace evd {

std::vector<double> window_weights(const EvSession& session, const TimeGrid& grid) {
    const double horizon = grid.horizon_hours();
    const double res = grid.resolution_hours();
    const int n = grid.slot_count();
    const double alpha = session.arrival_hours;
    const double beta = session.departure_hours;

    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    const long long k0 = static_cast<long long>(std::floor(alpha / horizon)) - 1;
    const long long k1 = static_cast<long long>(std::ceil(beta / horizon)) + 1;
    for (int j = 0; j < n; ++j) {
        double covered = 0.0;
        for (long long k = k0; k <= k1; ++k) {
            const double shift = static_cast<double>(k) * horizon;
            const double lo = std::max(alpha, j * res + shift);
            const double hi = std::min(beta, (j + 1) * res + shift);
            if (hi > lo) covered += hi - lo;
        }
        w[static_cast<std::size_t>(j)] = std::min(covered, res) / res;
    }
    return w;
}

DemandProfile uncoordinated_schedule(const EvSession& session, double power_kw,
                                     const TimeGrid& grid) {
    return realize_demand(session, power_kw, grid);
}

double dr_objective(const DemandProfile& schedule, const DemandProfile& others_load) {
    if (schedule.grid() != others_load.grid())
        throw ConfigError("dr_objective: profiles live on different grids");
    double dot = 0.0;
    for (int i = 0; i < schedule.size(); ++i) dot += schedule[i] * others_load[i];
    return dot;
}

DemandProfile best_response(const EvSession& session, const DemandProfile& others_load, bool v2g,
                            const TimeGrid& grid) {
    validate(session);
    if (others_load.grid() != grid) throw ConfigError("best_response: grid mismatch");
    const double res = grid.resolution_hours();
    const int n = grid.slot_count();

    const std::vector<double> w = window_weights(session, grid);
    std::vector<double> cap_kwh(static_cast<std::size_t>(n));  // per-slot energy bound
    double capacity = 0.0;
    for (int j = 0; j < n; ++j) {
        cap_kwh[static_cast<std::size_t>(j)] = session.p_max_kw * w[static_cast<std::size_t>(j)] * res;
        capacity += cap_kwh[static_cast<std::size_t>(j)];
    }
    if (session.energy_kwh > capacity + 1e-9)
        throw InfeasibleError("best_response: session energy exceeds window capacity");

    // In-window slots by (cost, index): the exact LP solution is to fill the
    // cheapest slots to their bound and put the remainder in the marginal one.
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        if (w[static_cast<std::size_t>(j)] > 0.0) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (others_load[a] != others_load[b]) return others_load[a] < others_load[b];
        return a < b;
    });

    std::vector<double> x(static_cast<std::size_t>(n), 0.0);  // kWh per slot
    double remaining = session.energy_kwh;
    for (int j : order) {
        if (remaining <= 0.0) break;
        const double take = std::min(cap_kwh[static_cast<std::size_t>(j)], remaining);
        x[static_cast<std::size_t>(j)] = take;
        remaining -= take;
    }

    if (v2g) {
        // Pair extra charge in the cheapest non-full slot with discharge in
        // the most expensive non-empty one while strictly profitable. Each
        // pass saturates one side, so the loop is linear in the window size.
        for (std::size_t guard = 0; guard <= 2 * order.size() + 2; ++guard) {
            int cheap = -1, dear = -1;
            for (int j : order) {
                const std::size_t js = static_cast<std::size_t>(j);
                if (cap_kwh[js] - x[js] > 1e-12 &&
                    (cheap < 0 || others_load[j] < others_load[cheap]))
                    cheap = j;
            }
            for (int j : order) {
                const std::size_t js = static_cast<std::size_t>(j);
                if (j != cheap && x[js] + cap_kwh[js] > 1e-12 &&
                    (dear < 0 || others_load[j] > others_load[dear]))
                    dear = j;
            }
            if (cheap < 0 || dear < 0 || !(others_load[cheap] < others_load[dear])) break;
            const std::size_t ci = static_cast<std::size_t>(cheap);
            const std::size_t di = static_cast<std::size_t>(dear);
            const double move = std::min(cap_kwh[ci] - x[ci], x[di] + cap_kwh[di]);
            x[ci] += move;
            x[di] -= move;
        }
    }

    std::vector<double> kw(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) kw[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] / res;
    return DemandProfile(grid, std::move(kw));
}

bool schedule_feasible(const DemandProfile& schedule, const EvSession& session, bool v2g,
                       double tol_kwh) {
    const TimeGrid& grid = schedule.grid();
    const double res = grid.resolution_hours();
    const std::vector<double> w = window_weights(session, grid);

    double total = 0.0;
    for (int j = 0; j < schedule.size(); ++j) {
        const double bound = session.p_max_kw * w[static_cast<std::size_t>(j)];
        const double l = schedule[j];
        if (std::abs(l) > bound + 1e-9) return false;
        if (!v2g && l < -1e-12) return false;
        if (w[static_cast<std::size_t>(j)] == 0.0 && l != 0.0) return false;
        total += l * res;
    }
    return std::abs(total - session.energy_kwh) <= tol_kwh;
}

DrOutcome run_dr(const std::vector<EvSession>& sessions,
                 const std::vector<DemandProfile>& base_loads, double charger_power_kw,
                 const DrConfig& cfg, const TimeGrid& grid) {
    const std::size_t n_users = sessions.size();
    if (n_users == 0) throw ConfigError("run_dr: no sessions");
    if (base_loads.size() != n_users)
        throw ConfigError("run_dr: sessions and base_loads must have equal length");
    if (cfg.max_iterations < 1) throw ConfigError("run_dr: max_iterations must be >= 1");

    std::vector<int> order(n_users);
    std::iota(order.begin(), order.end(), 0);
    if (!cfg.update_order.empty()) {
        if (cfg.update_order.size() != n_users)
            throw ConfigError("run_dr: update_order length must equal the user count");
        order = cfg.update_order;
        for (int idx : order)
            if (idx < 0 || static_cast<std::size_t>(idx) >= n_users)
                throw ConfigError("run_dr: update_order index out of range");
    }

    DemandProfile base_total(grid);
    for (const auto& b : base_loads) base_total = add(base_total, b);

    std::vector<DemandProfile> schedules;
    schedules.reserve(n_users);
    for (std::size_t i = 0; i < n_users; ++i)
        schedules.push_back(uncoordinated_schedule(sessions[i], charger_power_kw, grid));

    DemandProfile aggregate = base_total;
    for (const auto& s : schedules) aggregate = add(aggregate, s);

    DrOutcome out(aggregate);
    out.par_before = par(aggregate);
    out.peak_before_kw = peak_kw(aggregate);

    const double eps =
        cfg.convergence_eps_kw > 0.0 ? cfg.convergence_eps_kw : 1e-3 * mean_kw(aggregate);

    std::vector<double> agg = aggregate.values();
    const int n_slots = grid.slot_count();

    for (int sweep = 1; sweep <= cfg.max_iterations; ++sweep) {
        const std::vector<double> agg_before = agg;

        if (cfg.update_rule == UpdateRule::gauss_seidel) {
            for (int u : order) {
                const std::size_t ui = static_cast<std::size_t>(u);
                std::vector<double> others(agg);
                for (int j = 0; j < n_slots; ++j)
                    others[static_cast<std::size_t>(j)] -= schedules[ui][j];
                DemandProfile next =
                    best_response(sessions[ui], DemandProfile(grid, others), cfg.v2g_enabled, grid);
                for (int j = 0; j < n_slots; ++j)
                    agg[static_cast<std::size_t>(j)] += next[j] - schedules[ui][j];
                schedules[ui] = std::move(next);
            }
        } else {  // Jacobi: every user responds to the sweep-start aggregate
            std::vector<DemandProfile> next_schedules = schedules;
            for (int u : order) {
                const std::size_t ui = static_cast<std::size_t>(u);
                std::vector<double> others(agg_before);
                for (int j = 0; j < n_slots; ++j)
                    others[static_cast<std::size_t>(j)] -= schedules[ui][j];
                next_schedules[ui] =
                    best_response(sessions[ui], DemandProfile(grid, others), cfg.v2g_enabled, grid);
            }
            schedules = std::move(next_schedules);
            agg = base_total.values();
            for (const auto& s : schedules)
                for (int j = 0; j < n_slots; ++j) agg[static_cast<std::size_t>(j)] += s[j];
        }

        out.iterations_used = sweep;
        double delta = 0.0;
        for (int j = 0; j < n_slots; ++j)
            delta = std::max(delta,
                             std::abs(agg[static_cast<std::size_t>(j)] -
                                      agg_before[static_cast<std::size_t>(j)]));
        if (delta < eps) {
            out.converged = true;
            break;
        }
    }

    // Rebuild the final aggregate from scratch so it is exactly the sum of
    // its parts, free of incremental-update drift.
    DemandProfile final_agg = base_total;
    for (const auto& s : schedules) final_agg = add(final_agg, s);
    out.aggregate = final_agg;
    out.schedules = std::move(schedules);
    out.par_after = par(final_agg);
    out.peak_after_kw = peak_kw(final_agg);
    return out;
}

}  // namespace evd
