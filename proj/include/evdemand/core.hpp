#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace evd {

// Error categories surfaced through the CLI exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Execution policy for the data-parallel kernels. `serial` is the reference
// path kept for testing; `parallel` uses OpenMP. Both produce bit-identical
// results (fixed-block accumulation, see montecarlo.cpp).
enum class Exec { serial, parallel };

/// Uniform discretization of a scheduling horizon into slots.
class TimeGrid {
public:
    TimeGrid(double horizon_hours, double resolution_hours, bool circular = true);

    static TimeGrid daily(double resolution_hours) { return TimeGrid(24.0, resolution_hours, true); }

    double horizon_hours() const { return horizon_hours_; }
    double resolution_hours() const { return resolution_hours_; }
    int slot_count() const { return slot_count_; }
    bool circular() const { return circular_; }

    double slot_start(int i) const { return resolution_hours_ * i; }
    double slot_mid(int i) const { return resolution_hours_ * (i + 0.5); }

    // Slot index holding time t; wraps modulo the horizon when circular.
    int slot_of(double t_hours) const;
    // Maps a raw (possibly negative or out-of-range) slot index into [0, slot_count).
    int wrap_slot(long long raw) const;

    bool operator==(const TimeGrid& o) const;
    bool operator!=(const TimeGrid& o) const { return !(*this == o); }

private:
    double horizon_hours_;
    double resolution_hours_;
    int slot_count_;
    bool circular_;
};

/// Per-slot power values (kW) over one horizon. Immutable after construction;
/// all operations return new profiles.
class DemandProfile {
public:
    explicit DemandProfile(const TimeGrid& grid);  // all zeros
    DemandProfile(const TimeGrid& grid, std::vector<double> values);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    int size() const { return static_cast<int>(values_.size()); }

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

// Discrete integral: sum of values times slot width.
double energy_kwh(const DemandProfile& p);

// max / mean; requires a strictly positive mean.
double par(const DemandProfile& p);

double peak_kw(const DemandProfile& p);
double mean_kw(const DemandProfile& p);

DemandProfile add(const DemandProfile& a, const DemandProfile& b);
DemandProfile scale(const DemandProfile& a, double k);

// CSV: header `time_hours,value_kw`, one row per slot, time at slot start,
// 6 significant digits.
void write_csv(std::ostream& os, const DemandProfile& p);
// Same with an extra `stderr_kw` column (empirical profiles).
void write_csv(std::ostream& os, const DemandProfile& p, const std::vector<double>& stderr_kw);
void write_csv_file(const std::string& path, const DemandProfile& p);
void write_csv_file(const std::string& path, const DemandProfile& p, const std::vector<double>& stderr_kw);

// Fixed-width numeric formatting used by every CSV/summary writer (%.6g,
// negative zero canonicalized) so reruns are byte-identical.
std::string format_number(double v);

}  // namespace evd
