#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "evdemand/dr.hpp"
#include "evdemand/rng.hpp"

using namespace evd;

namespace {

EvSession make_session(double arrival, double duration, double departure, double p_max) {
    EvSession s;
    s.arrival_hours = arrival;
    s.duration_hours = duration;
    s.departure_hours = departure;
    s.energy_kwh = p_max * duration;
    s.p_max_kw = p_max;
    return s;
}

// Brute-force LP oracle: minimize sum(cost_j * x_j) subject to sum(x_j) = E
// and x_j in [lo_j, hi_j]. Every vertex has at most one variable strictly
// inside its box, so enumerate (fractional index, bound assignment) pairs.
double brute_force_lp(const std::vector<double>& cost, const std::vector<double>& lo,
                      const std::vector<double>& hi, double energy) {
    const int n = static_cast<int>(cost.size());
    double best = std::numeric_limits<double>::infinity();
    for (int frac = -1; frac < n; ++frac) {
        std::vector<int> free_idx;
        for (int j = 0; j < n; ++j)
            if (j != frac) free_idx.push_back(j);
        const int m = static_cast<int>(free_idx.size());
        for (int mask = 0; mask < (1 << m); ++mask) {
            double sum = 0.0, obj = 0.0;
            for (int k = 0; k < m; ++k) {
                const int j = free_idx[static_cast<std::size_t>(k)];
                const double x = (mask >> k) & 1 ? hi[static_cast<std::size_t>(j)]
                                                 : lo[static_cast<std::size_t>(j)];
                sum += x;
                obj += cost[static_cast<std::size_t>(j)] * x;
            }
            if (frac >= 0) {
                const double x = energy - sum;
                if (x < lo[static_cast<std::size_t>(frac)] - 1e-12 ||
                    x > hi[static_cast<std::size_t>(frac)] + 1e-12)
                    continue;
                obj += cost[static_cast<std::size_t>(frac)] * x;
            } else if (std::abs(sum - energy) > 1e-9) {
                continue;
            }
            best = std::min(best, obj);
        }
    }
    return best;
}

// Greedy-vs-brute comparison on a random small instance.
void check_instance(Rng& rng, bool v2g) {
    const int n_slots = 2 + static_cast<int>(rng.uniform01() * 5.0);  // 2..6
    const TimeGrid grid(static_cast<double>(n_slots), 1.0, true);

    // window inside the horizon, sometimes with fractional edges
    double alpha = rng.uniform(0.0, n_slots - 1.0);
    double beta = rng.uniform(alpha + 0.5, static_cast<double>(n_slots));
    if (rng.uniform01() < 0.5) {
        alpha = std::floor(alpha);
        beta = std::ceil(beta);
    }
    const double p_max = rng.uniform(0.5, 3.0);
    const double capacity = p_max * (beta - alpha);
    const double energy = rng.uniform01() * capacity;
    const double duration = std::max(energy / p_max, 1e-6);

    EvSession s = make_session(alpha, duration, beta, p_max);
    s.energy_kwh = energy;

    std::vector<double> others(static_cast<std::size_t>(n_slots));
    for (double& o : others) o = rng.uniform(0.0, 10.0);
    const DemandProfile others_profile(grid, others);

    const DemandProfile sched = best_response(s, others_profile, v2g, grid);
    REQUIRE(schedule_feasible(sched, s, v2g));

    const std::vector<double> w = window_weights(s, grid);
    std::vector<double> lo(static_cast<std::size_t>(n_slots)), hi(static_cast<std::size_t>(n_slots));
    for (int j = 0; j < n_slots; ++j) {
        const double cap = p_max * w[static_cast<std::size_t>(j)];  // kWh with 1 h slots
        hi[static_cast<std::size_t>(j)] = cap;
        lo[static_cast<std::size_t>(j)] = v2g ? -cap : 0.0;
    }
    const double brute = brute_force_lp(others, lo, hi, energy);
    const double greedy = dr_objective(sched, others_profile);
    CHECK(std::abs(greedy - brute) < 1e-9);
}

}  // namespace

TEST_CASE("best_response: valley fill example") {
    const TimeGrid grid(3.0, 1.0, true);
    const DemandProfile others(grid, {5.0, 1.0, 3.0});
    const EvSession s = make_session(0.0, 2.0, 3.0, 1.0);
    const DemandProfile sched = best_response(s, others, false, grid);
    CHECK(sched[0] == doctest::Approx(0.0));
    CHECK(sched[1] == doctest::Approx(1.0));
    CHECK(sched[2] == doctest::Approx(1.0));
}

TEST_CASE("best_response: V2G arbitrage with zero net energy") {
    const TimeGrid grid(3.0, 1.0, true);
    const DemandProfile others(grid, {5.0, 1.0, 3.0});
    EvSession s = make_session(0.0, 1.0, 3.0, 1.0);
    s.energy_kwh = 0.0;  // net-zero: pure shifting
    const DemandProfile sched = best_response(s, others, true, grid);
    CHECK(sched[0] == doctest::Approx(-1.0));
    CHECK(sched[1] == doctest::Approx(1.0));
    CHECK(sched[2] == doctest::Approx(0.0));
    CHECK(dr_objective(sched, others) == doctest::Approx(-4.0));
}

TEST_CASE("best_response: constant load ties break to the earliest slots") {
    const TimeGrid grid(4.0, 1.0, true);
    const DemandProfile others(grid, {2.0, 2.0, 2.0, 2.0});
    const EvSession s = make_session(0.0, 2.0, 4.0, 1.0);
    const DemandProfile sched = best_response(s, others, false, grid);
    CHECK(sched[0] == doctest::Approx(1.0));
    CHECK(sched[1] == doctest::Approx(1.0));
    CHECK(sched[2] == doctest::Approx(0.0));
    CHECK(sched[3] == doctest::Approx(0.0));
    // objective depends only on total energy against a flat load
    CHECK(dr_objective(sched, others) == doctest::Approx(2.0 * 2.0));
}

TEST_CASE("best_response: infeasible energy is an explicit error") {
    const TimeGrid grid(3.0, 1.0, true);
    const DemandProfile others(grid, {1.0, 1.0, 1.0});
    EvSession s = make_session(0.0, 2.0, 3.0, 1.0);
    s.energy_kwh = 4.0;  // window capacity is 3 kWh
    CHECK_THROWS_AS(best_response(s, others, false, grid), InfeasibleError);
}

TEST_CASE("best_response equals the brute-force LP optimum on random instances") {
    Rng rng(314159);
    for (int i = 0; i < 200; ++i) check_instance(rng, i % 2 == 1);
}

TEST_CASE("best_response never increases the user's objective") {
    Rng rng(99);
    const TimeGrid grid = TimeGrid::daily(1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const double alpha = rng.uniform(0.0, 20.0);
        const double beta = alpha + rng.uniform(3.0, 14.0);
        const double dur = rng.uniform(0.5, beta - alpha);
        const EvSession s = make_session(alpha, dur, beta, 3.0);
        std::vector<double> load(24);
        for (double& v : load) v = rng.uniform(0.0, 8.0);
        const DemandProfile others(grid, load);
        const bool v2g = trial % 2 == 0;

        const DemandProfile before = uncoordinated_schedule(s, 3.0, grid);
        const DemandProfile after = best_response(s, others, v2g, grid);
        CHECK(dr_objective(after, others) <= dr_objective(before, others) + 1e-9);
        CHECK(schedule_feasible(after, s, v2g));
        if (!v2g)
            for (int j = 0; j < after.size(); ++j) CHECK(after[j] >= 0.0);
        else
            for (int j = 0; j < after.size(); ++j) CHECK(std::abs(after[j]) <= 3.0 + 1e-12);
    }
}

TEST_CASE("run_dr: single user valley-fills its own base load") {
    const TimeGrid grid(4.0, 1.0, true);
    const DemandProfile base(grid, {4.0, 1.0, 2.0, 3.0});
    const EvSession s = make_session(0.0, 2.0, 4.0, 1.0);

    DrConfig cfg;
    const DrOutcome out = run_dr({s}, {base}, 1.0, cfg, grid);
    CHECK(out.converged);
    CHECK(out.iterations_used <= 2);
    const DemandProfile direct = best_response(s, base, false, grid);
    for (int j = 0; j < 4; ++j) CHECK(out.schedules[0][j] == doctest::Approx(direct[j]));
    CHECK(out.par_after <= out.par_before + 1e-12);
}

TEST_CASE("run_dr: disjoint windows reduce to independent best responses") {
    const TimeGrid grid = TimeGrid::daily(1.0);
    std::vector<EvSession> sessions = {make_session(0.0, 2.0, 6.0, 2.0),
                                       make_session(8.0, 2.0, 14.0, 2.0),
                                       make_session(16.0, 2.0, 22.0, 2.0)};
    std::vector<double> base_values(24);
    Rng rng(17);
    for (double& v : base_values) v = rng.uniform(0.5, 4.0);
    const DemandProfile base(grid, base_values);
    const std::vector<DemandProfile> bases = {base, base, base};

    DrConfig cfg;
    const DrOutcome out = run_dr(sessions, bases, 2.0, cfg, grid);
    CHECK(out.converged);
    CHECK(out.iterations_used <= 2);

    const DemandProfile base_total = scale(base, 3.0);
    for (std::size_t n = 0; n < sessions.size(); ++n) {
        const DemandProfile indep = best_response(sessions[n], base_total, false, grid);
        for (int j = 0; j < 24; ++j) CHECK(out.schedules[n][j] == doctest::Approx(indep[j]));
    }
}

TEST_CASE("run_dr: three-user instance reaches Nash stability at p_max granularity") {
    const TimeGrid grid(4.0, 1.0, true);
    std::vector<EvSession> sessions = {make_session(0.0, 2.0, 3.0, 1.0),
                                       make_session(1.0, 2.0, 4.0, 1.0),
                                       make_session(0.0, 1.0, 4.0, 1.0)};
    const std::vector<DemandProfile> bases = {DemandProfile(grid, {1.5, 0.5, 0.5, 0.0}),
                                              DemandProfile(grid, {1.0, 0.3, 0.7, 0.0}),
                                              DemandProfile(grid, {0.5, 0.2, 0.8, 0.0})};
    DrConfig cfg;
    const DrOutcome out = run_dr(sessions, bases, 1.0, cfg, grid);
    CHECK(out.converged);

    // Brute force: no user can improve by any unilateral deviation placing
    // whole p_max*dt quanta inside its window.
    for (std::size_t n = 0; n < sessions.size(); ++n) {
        DemandProfile others = out.aggregate;
        others = add(others, scale(out.schedules[n], -1.0));
        const double current = dr_objective(out.schedules[n], others);

        const std::vector<double> w = window_weights(sessions[n], grid);
        std::vector<int> window;
        for (int j = 0; j < 4; ++j)
            if (w[static_cast<std::size_t>(j)] > 0.0) window.push_back(j);
        const int quanta = static_cast<int>(std::round(sessions[n].energy_kwh));
        const int m = static_cast<int>(window.size());

        // enumerate every placement of `quanta` unit-energy blocks
        std::vector<int> combo(static_cast<std::size_t>(m), 0);
        const int total = 1 << m;
        for (int mask = 0; mask < total; ++mask) {
            int bits = 0;
            for (int k = 0; k < m; ++k) bits += (mask >> k) & 1;
            if (bits != quanta) continue;
            std::vector<double> dev(4, 0.0);
            for (int k = 0; k < m; ++k)
                if ((mask >> k) & 1) dev[static_cast<std::size_t>(window[static_cast<std::size_t>(k)])] = 1.0;
            const double obj = dr_objective(DemandProfile(grid, dev), others);
            CHECK(current <= obj + 1e-9);
        }
    }
}

TEST_CASE("run_dr: feasibility, conservation, and PAR improvement on random instances") {
    Rng rng(271828);
    const TimeGrid grid = TimeGrid::daily(1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const int n_users = 5 + static_cast<int>(rng.uniform01() * 10);
        std::vector<EvSession> sessions;
        std::vector<DemandProfile> bases;
        double total_energy = 0.0;
        for (int u = 0; u < n_users; ++u) {
            const double alpha = rng.uniform(0.0, 23.0);
            const double window = rng.uniform(2.0, 16.0);
            const double dur = rng.uniform(0.5, window);
            sessions.push_back(make_session(alpha, dur, alpha + window, 3.0));
            total_energy += sessions.back().energy_kwh;
            std::vector<double> b(24);
            for (double& v : b) v = rng.uniform(0.2, 2.0);
            bases.emplace_back(grid, b);
        }
        DrConfig cfg;
        cfg.v2g_enabled = trial % 2 == 0;
        const DrOutcome out = run_dr(sessions, bases, 3.0, cfg, grid);

        double scheduled = 0.0;
        for (int u = 0; u < n_users; ++u) {
            CHECK(schedule_feasible(out.schedules[static_cast<std::size_t>(u)],
                                    sessions[static_cast<std::size_t>(u)], cfg.v2g_enabled));
            scheduled += energy_kwh(out.schedules[static_cast<std::size_t>(u)]);
        }
        CHECK(scheduled == doctest::Approx(total_energy).epsilon(1e-9));
        CHECK(out.par_after <= out.par_before + 1e-9);

        // aggregate equals the sum of its parts
        DemandProfile rebuilt(grid);
        for (const auto& b : bases) rebuilt = add(rebuilt, b);
        for (const auto& s : out.schedules) rebuilt = add(rebuilt, s);
        for (int j = 0; j < 24; ++j) CHECK(rebuilt[j] == doctest::Approx(out.aggregate[j]).epsilon(1e-12));
    }
}

TEST_CASE("run_dr: custom update order stays feasible and convergent") {
    const TimeGrid grid = TimeGrid::daily(1.0);
    std::vector<EvSession> sessions = {make_session(18.0, 4.0, 30.0, 2.0),
                                       make_session(19.0, 3.0, 31.0, 2.0),
                                       make_session(20.0, 5.0, 32.0, 2.0)};
    std::vector<DemandProfile> bases;
    Rng rng(55);
    for (int u = 0; u < 3; ++u) {
        std::vector<double> b(24);
        for (double& v : b) v = rng.uniform(0.3, 2.5);
        bases.emplace_back(grid, b);
    }
    DrConfig cfg;
    cfg.update_order = {2, 0, 1};
    const DrOutcome out = run_dr(sessions, bases, 2.0, cfg, grid);
    CHECK(out.converged);
    for (std::size_t u = 0; u < 3; ++u) CHECK(schedule_feasible(out.schedules[u], sessions[u], false));

    DrConfig bad;
    bad.update_order = {0, 1};  // wrong length
    CHECK_THROWS_AS(run_dr(sessions, bases, 2.0, bad, grid), ConfigError);
}

TEST_CASE("run_dr: jacobi update rule also settles") {
    const TimeGrid grid = TimeGrid::daily(1.0);
    std::vector<EvSession> sessions = {make_session(18.0, 4.0, 30.0, 2.0),
                                       make_session(20.0, 3.0, 32.0, 2.0)};
    std::vector<double> b(24, 1.0);
    b[19] = 4.0;
    b[20] = 5.0;
    const std::vector<DemandProfile> bases = {DemandProfile(grid, b), DemandProfile(grid, b)};
    DrConfig cfg;
    cfg.update_rule = UpdateRule::jacobi;
    cfg.max_iterations = 100;
    const DrOutcome out = run_dr(sessions, bases, 2.0, cfg, grid);
    for (std::size_t u = 0; u < sessions.size(); ++u)
        CHECK(schedule_feasible(out.schedules[u], sessions[u], false));
    CHECK(out.iterations_used >= 1);
}

TEST_CASE("uncoordinated_schedule matches realize_demand") {
    const TimeGrid grid = TimeGrid::daily(0.5);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const double alpha = rng.uniform(0.0, 23.0);
        const double dur = rng.uniform(0.2, 10.0);
        const EvSession s = make_session(alpha, dur, alpha + dur + rng.uniform(0.0, 5.0), 2.0);
        const DemandProfile a = uncoordinated_schedule(s, 2.0, grid);
        const DemandProfile b = realize_demand(s, 2.0, grid);
        for (int j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);
        CHECK(energy_kwh(a) == doctest::Approx(s.energy_kwh).epsilon(1e-9));
    }
}
