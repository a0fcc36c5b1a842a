#include "evdemand/montecarlo.hpp"

#include <cmath>
#include <exception>

namespace evd {

namespace {
// Session accept-reject bound; evening-arrival configs accept ~93% of draws.
constexpr long kSessionAttemptCap = 1000000;
// Substream purpose tags, so fleet users and empirical samples never share
// a stream.
constexpr std::uint64_t kUserStream = 0;
constexpr std::uint64_t kEmpiricalStream = 1;
// Fixed accumulation block size: block boundaries depend only on n_samples,
// which keeps empirical sums bit-identical for any thread count.
constexpr int kBlockSize = 512;
}  // namespace

void validate(const EvSession& s) {
    if (!(s.duration_hours > 0.0)) throw ConfigError("EvSession: duration must be positive");
    if (!(s.p_max_kw > 0.0)) throw ConfigError("EvSession: p_max_kw must be positive");
    if (s.departure_hours < s.arrival_hours + s.duration_hours - 1e-9)
        throw InfeasibleError("EvSession: departure precedes arrival + duration");
    if (s.energy_kwh < 0.0) throw ConfigError("EvSession: energy must be nonnegative");
    if (s.energy_kwh > s.p_max_kw * (s.departure_hours - s.arrival_hours) + 1e-9)
        throw InfeasibleError("EvSession: energy exceeds window capacity at p_max");
}

void validate(const FleetSpec& f) {
    if (f.n_users < 1) throw ConfigError("FleetSpec: n_users must be at least 1");
    validate(f.charger);
    validate(f.departure);
}

EvSession sample_session(const FleetSpec& fleet, int user_index, Rng& rng) {
    const double a = fleet.charger.power_kw;
    for (long attempt = 0; attempt < kSessionAttemptCap; ++attempt) {
        const double t0 = sample(fleet.charger.arrival, rng);
        const double dur = sample(fleet.charger.charging_time, rng);
        double dep = sample(fleet.departure, rng);
        if (dep < t0) dep += 24.0;  // clock value before the arrival: next day
        if (dep >= t0 + dur && dur > 0.0) {
            EvSession s;
            s.arrival_hours = t0;
            s.duration_hours = dur;
            s.departure_hours = dep;
            s.energy_kwh = a * dur;
            s.p_max_kw = a;
            return s;
        }
    }
    throw ConfigError(
        "sample_session: acceptance rate below 1e-6 over 1e6 attempts for user " +
        std::to_string(user_index) + "; the distribution triple is infeasible");
}

EvSession sample_session(const FleetSpec& fleet, int user_index) {
    Rng rng = substream(fleet.seed, static_cast<std::uint64_t>(user_index), kUserStream);
    return sample_session(fleet, user_index, rng);
}

std::vector<EvSession> sample_fleet(const FleetSpec& fleet) {
    validate(fleet);
    std::vector<EvSession> out;
    out.reserve(static_cast<std::size_t>(fleet.n_users));
    for (int u = 0; u < fleet.n_users; ++u) out.push_back(sample_session(fleet, u));
    return out;
}

namespace {

// Spreads power * [t0, t0+dur) onto the wrapped grid, apportioning partial
// slots by exact interval overlap.
void realize_into(double t0, double dur, double power_kw, const TimeGrid& grid,
                  std::vector<double>& acc) {
    const double res = grid.resolution_hours();
    double t = t0;
    const double t_end = t0 + dur;
    while (t_end - t > 1e-12) {
        double slot_real = std::floor(t / res);
        double boundary = (slot_real + 1.0) * res;
        if (boundary <= t) {  // t sits on the boundary after rounding
            slot_real += 1.0;
            boundary += res;
        }
        const double seg_end = std::min(t_end, boundary);
        const int idx = grid.wrap_slot(static_cast<long long>(slot_real));
        acc[static_cast<std::size_t>(idx)] += power_kw * (seg_end - t) / res;
        t = seg_end;
    }
}

}  // namespace

DemandProfile realize_demand(const EvSession& session, double power_kw, const TimeGrid& grid) {
    validate(session);
    if (!grid.circular()) throw ConfigError("realize_demand: grid must be circular");
    std::vector<double> values(static_cast<std::size_t>(grid.slot_count()), 0.0);
    realize_into(session.arrival_hours, session.duration_hours, power_kw, grid, values);
    return DemandProfile(grid, std::move(values));
}

EmpiricalProfile empirical_expected_profile(const FleetSpec& fleet, int n_samples,
                                            const TimeGrid& grid, Exec exec) {
    validate(fleet);
    if (n_samples < 1) throw ConfigError("empirical_expected_profile: n_samples must be >= 1");
    if (!grid.circular()) throw ConfigError("empirical_expected_profile: grid must be circular");

    const int n_slots = grid.slot_count();
    const std::size_t slots = static_cast<std::size_t>(n_slots);
    const int n_blocks = (n_samples + kBlockSize - 1) / kBlockSize;
    const double a = fleet.charger.power_kw;

    std::vector<std::vector<double>> block_sum(static_cast<std::size_t>(n_blocks));
    std::vector<std::vector<double>> block_sumsq(static_cast<std::size_t>(n_blocks));

    // One block: draw the pure (t0, T) process of the uncoordinated demand
    // definition — no departure variable, no rejection.
    auto run_block = [&](int b) {
        auto& sum = block_sum[static_cast<std::size_t>(b)];
        auto& sumsq = block_sumsq[static_cast<std::size_t>(b)];
        sum.assign(slots, 0.0);
        sumsq.assign(slots, 0.0);
        std::vector<double> scratch(slots);
        const int lo = b * kBlockSize;
        const int hi = std::min(n_samples, lo + kBlockSize);
        for (int s = lo; s < hi; ++s) {
            Rng rng = substream(fleet.seed, static_cast<std::uint64_t>(s), kEmpiricalStream);
            const double t0 = sample(fleet.charger.arrival, rng);
            const double dur = sample(fleet.charger.charging_time, rng);
            std::fill(scratch.begin(), scratch.end(), 0.0);
            if (dur > 0.0) realize_into(t0, dur, a, grid, scratch);
            for (std::size_t i = 0; i < slots; ++i) {
                sum[i] += scratch[i];
                sumsq[i] += scratch[i] * scratch[i];
            }
        }
    };

    if (exec == Exec::parallel) {
        std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
        for (int b = 0; b < n_blocks; ++b) {
            try {
                run_block(b);
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
    } else {
        for (int b = 0; b < n_blocks; ++b) run_block(b);
    }

    // Merge in block order (fixed reduction order = reproducible bits).
    std::vector<double> sum(slots, 0.0), sumsq(slots, 0.0);
    for (int b = 0; b < n_blocks; ++b) {
        for (std::size_t i = 0; i < slots; ++i) {
            sum[i] += block_sum[static_cast<std::size_t>(b)][i];
            sumsq[i] += block_sumsq[static_cast<std::size_t>(b)][i];
        }
    }

    const double n = static_cast<double>(n_samples);
    std::vector<double> mean(slots), se(slots, 0.0);
    for (std::size_t i = 0; i < slots; ++i) {
        mean[i] = sum[i] / n;
        if (n_samples > 1) {
            const double var = std::max(0.0, (sumsq[i] - n * mean[i] * mean[i]) / (n - 1.0));
            se[i] = std::sqrt(var / n);
        }
    }
    return EmpiricalProfile{DemandProfile(grid, std::move(mean)), std::move(se)};
}

}  // namespace evd
