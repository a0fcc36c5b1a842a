#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "evdemand/dr.hpp"
#include "evdemand/montecarlo.hpp"

namespace evd {

// Synthetic per-user inflexible household load: base + morning and evening
// Gaussian bumps, with deterministic per-user multiplicative jitter.
struct BaselineTemplate {
    double base_kw = 0.4;
    double morning_peak_kw = 0.8;
    double morning_center_hours = 7.5;
    double morning_width_hours = 1.3;
    double evening_peak_kw = 2.2;
    double evening_center_hours = 20.0;
    double evening_width_hours = 2.2;
    double jitter = 0.1;  // fraction in [0, 0.5]
    std::uint64_t seed = 1;
};

void validate(const BaselineTemplate& t);

enum class Case { no_ev, uncoordinated, dr, dr_v2g, analytic_comparison };

std::string case_name(Case c);

struct ScenarioConfig {
    TimeGrid grid = TimeGrid::daily(1.0);      // DR scheduling grid
    double analytic_resolution_hours = 0.1;    // grid for expected-profile curves
    FleetSpec fleet;
    BaselineTemplate baseline;
    DrConfig dr;
    int mc_samples = 0;  // >0: analytic_comparison also writes empirical curves
    std::vector<Case> cases;
    std::string out_dir = "out";
    bool emit_extended = false;
    bool write_schedules = false;

    ScenarioConfig();
};

// Flat key=value config with dotted section prefixes; unknown keys and
// constraint violations are rejected naming the key. Distribution sections
// accept either explicit parameters or match_mean/match_variance directives.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);

std::vector<DemandProfile> synth_baseline(const BaselineTemplate& t, int n_users,
                                          const TimeGrid& grid);

struct RunReport {
    // key=value lines, in emission order; also written to <out_dir>/summary.txt
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::string> files_written;

    const std::string* find(const std::string& key) const;
};

// Executes the requested cases on one shared sampled fleet and baseline,
// writing one aggregate CSV per case plus summary.txt.
RunReport run_cases(const ScenarioConfig& cfg);

}  // namespace evd
