#include "evdemand/core.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace evd {

TimeGrid::TimeGrid(double horizon_hours, double resolution_hours, bool circular)
    : horizon_hours_(horizon_hours), resolution_hours_(resolution_hours), circular_(circular) {
    if (!(horizon_hours > 0.0) || !std::isfinite(horizon_hours))
        throw ConfigError("TimeGrid: horizon_hours must be positive and finite");
    if (!(resolution_hours > 0.0) || !std::isfinite(resolution_hours))
        throw ConfigError("TimeGrid: resolution_hours must be positive and finite");
    const double ratio = horizon_hours / resolution_hours;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * ratio)
        throw ConfigError("TimeGrid: resolution_hours must divide horizon_hours exactly");
    slot_count_ = static_cast<int>(rounded);
    if (slot_count_ < 2) throw ConfigError("TimeGrid: slot_count must be at least 2");
}

int TimeGrid::slot_of(double t_hours) const {
    long long raw = static_cast<long long>(std::floor(t_hours / resolution_hours_));
    return wrap_slot(raw);
}

int TimeGrid::wrap_slot(long long raw) const {
    const long long n = slot_count_;
    if (circular_) {
        long long m = raw % n;
        if (m < 0) m += n;
        return static_cast<int>(m);
    }
    if (raw < 0 || raw >= n) throw std::out_of_range("TimeGrid: slot index outside non-circular grid");
    return static_cast<int>(raw);
}

bool TimeGrid::operator==(const TimeGrid& o) const {
    return horizon_hours_ == o.horizon_hours_ && resolution_hours_ == o.resolution_hours_ &&
           slot_count_ == o.slot_count_ && circular_ == o.circular_;
}

DemandProfile::DemandProfile(const TimeGrid& grid)
    : grid_(grid), values_(static_cast<std::size_t>(grid.slot_count()), 0.0) {}

DemandProfile::DemandProfile(const TimeGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(grid_.slot_count()))
        throw ConfigError("DemandProfile: value count does not match the grid slot count");
    for (double v : values_)
        if (!std::isfinite(v)) throw NumericError("DemandProfile: values must be finite");
}

double energy_kwh(const DemandProfile& p) {
    double sum = 0.0;
    for (double v : p.values()) sum += v;
    return sum * p.grid().resolution_hours();
}

double peak_kw(const DemandProfile& p) {
    double m = p.values().front();
    for (double v : p.values())
        if (v > m) m = v;
    return m;
}

double mean_kw(const DemandProfile& p) {
    double sum = 0.0;
    for (double v : p.values()) sum += v;
    return sum / static_cast<double>(p.size());
}

double par(const DemandProfile& p) {
    const double mean = mean_kw(p);
    if (!(mean > 0.0)) throw std::domain_error("par: profile mean must be positive");
    return peak_kw(p) / mean;
}

DemandProfile add(const DemandProfile& a, const DemandProfile& b) {
    if (a.grid() != b.grid()) throw ConfigError("add: profiles live on different grids");
    std::vector<double> out(a.values());
    for (int i = 0; i < b.size(); ++i) out[static_cast<std::size_t>(i)] += b[i];
    return DemandProfile(a.grid(), std::move(out));
}

DemandProfile scale(const DemandProfile& a, double k) {
    if (!std::isfinite(k)) throw NumericError("scale: factor must be finite");
    std::vector<double> out(a.values());
    for (double& v : out) v *= k;
    return DemandProfile(a.grid(), std::move(out));
}

std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_csv(std::ostream& os, const DemandProfile& p) {
    os << "time_hours,value_kw\n";
    for (int i = 0; i < p.size(); ++i)
        os << format_number(p.grid().slot_start(i)) << ',' << format_number(p[i]) << '\n';
}

void write_csv(std::ostream& os, const DemandProfile& p, const std::vector<double>& stderr_kw) {
    if (stderr_kw.size() != static_cast<std::size_t>(p.size()))
        throw ConfigError("write_csv: stderr column length does not match the profile");
    os << "time_hours,value_kw,stderr_kw\n";
    for (int i = 0; i < p.size(); ++i)
        os << format_number(p.grid().slot_start(i)) << ',' << format_number(p[i]) << ','
           << format_number(stderr_kw[static_cast<std::size_t>(i)]) << '\n';
}

namespace {
std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open output file: " + path);
    return os;
}
}  // namespace

void write_csv_file(const std::string& path, const DemandProfile& p) {
    auto os = open_out(path);
    write_csv(os, p);
}

void write_csv_file(const std::string& path, const DemandProfile& p,
                    const std::vector<double>& stderr_kw) {
    auto os = open_out(path);
    write_csv(os, p, stderr_kw);
}

}  // namespace evd
