// Compares the serial reference kernels against the OpenMP paths and checks
// that both produce identical results.

#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "evdemand/analytic.hpp"
#include "evdemand/montecarlo.hpp"

using namespace evd;

namespace {

template <class F>
double time_ms(F&& f, int repeats = 3) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

bool identical(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled\n");
#endif

    const TimeGrid grid = TimeGrid::daily(0.05);
    const DistributionSpec rician = match_moments(Family::rician, 6.0, 25.0 / 3.0);
    const ChargerModel model{1.0, Gaussian{19.0, std::sqrt(10.0)}, rician};

    DemandProfile serial_p(grid), parallel_p(grid);
    const double t_serial =
        time_ms([&] { serial_p = expected_profile(model, grid, Exec::serial); });
    const double t_parallel =
        time_ms([&] { parallel_p = expected_profile(model, grid, Exec::parallel); });
    std::printf("expected_profile (rician, %d slots): serial %.1f ms, openmp %.1f ms, speedup %.2fx, identical=%s\n",
                grid.slot_count(), t_serial, t_parallel, t_serial / t_parallel,
                identical(serial_p.values(), parallel_p.values()) ? "yes" : "NO");

    const FleetSpec fleet{1, ChargerModel{1.0, Gaussian{19.0, std::sqrt(10.0)}, Uniform{1.0, 11.0}},
                          Gaussian{31.5, 1.0}, 42};
    const TimeGrid mc_grid = TimeGrid::daily(0.1);
    const int n_samples = 200000;
    EmpiricalProfile emp_serial{DemandProfile(mc_grid), {}};
    EmpiricalProfile emp_parallel{DemandProfile(mc_grid), {}};
    const double m_serial = time_ms(
        [&] { emp_serial = empirical_expected_profile(fleet, n_samples, mc_grid, Exec::serial); });
    const double m_parallel = time_ms([&] {
        emp_parallel = empirical_expected_profile(fleet, n_samples, mc_grid, Exec::parallel);
    });
    const bool same = identical(emp_serial.mean.values(), emp_parallel.mean.values()) &&
                      identical(emp_serial.stderr_kw, emp_parallel.stderr_kw);
    std::printf("empirical_expected_profile (%d samples): serial %.1f ms, openmp %.1f ms, speedup %.2fx, identical=%s\n",
                n_samples, m_serial, m_parallel, m_serial / m_parallel, same ? "yes" : "NO");
    return 0;
}
