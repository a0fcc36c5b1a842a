#include "evdemand/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "evdemand/analytic.hpp"

namespace evd {

namespace {
constexpr std::uint64_t kBaselineStream = 2;  // distinct from montecarlo's tags
}

void validate(const BaselineTemplate& t) {
    auto nonneg = [](double v, const char* key) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("baseline.") + key + " must be nonnegative");
    };
    nonneg(t.base_kw, "base_kw");
    nonneg(t.morning_peak_kw, "morning_peak_kw");
    nonneg(t.evening_peak_kw, "evening_peak_kw");
    if (!(t.morning_width_hours > 0.0)) throw ConfigError("baseline.morning_width_hours must be positive");
    if (!(t.evening_width_hours > 0.0)) throw ConfigError("baseline.evening_width_hours must be positive");
    if (!(t.jitter >= 0.0 && t.jitter <= 0.5)) throw ConfigError("baseline.jitter must lie in [0, 0.5]");
}

std::string case_name(Case c) {
    switch (c) {
        case Case::no_ev: return "no_ev";
        case Case::uncoordinated: return "uncoordinated";
        case Case::dr: return "dr";
        case Case::dr_v2g: return "dr_v2g";
        case Case::analytic_comparison: return "analytic_comparison";
    }
    return "?";
}

namespace {

Case case_from_name(const std::string& s) {
    if (s == "no_ev") return Case::no_ev;
    if (s == "uncoordinated") return Case::uncoordinated;
    if (s == "dr") return Case::dr;
    if (s == "dr_v2g") return Case::dr_v2g;
    if (s == "analytic_comparison") return Case::analytic_comparison;
    throw ConfigError("run.cases: unknown case '" + s + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Key/value store that tracks consumption so leftovers can be reported as
// unknown keys.
class KvStore {
public:
    void insert(const std::string& key, const std::string& value) {
        if (kv_.count(key)) throw ConfigError("duplicate config key: " + key);
        kv_[key] = value;
    }
    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    bool has_prefix(const std::string& prefix) const {
        auto it = kv_.lower_bound(prefix);
        return it != kv_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
    }
    std::string take(const std::string& key) {
        auto it = kv_.find(key);
        std::string v = it->second;
        kv_.erase(it);
        return v;
    }
    double take_number(const std::string& key) {
        const std::string v = take(key);
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0' || !std::isfinite(x))
            throw ConfigError(key + ": not a finite number: '" + v + "'");
        return x;
    }
    long long take_integer(const std::string& key) {
        const double x = take_number(key);
        if (x != std::floor(x)) throw ConfigError(key + ": expected an integer");
        return static_cast<long long>(x);
    }
    bool take_bool(const std::string& key) {
        const std::string v = take(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError(key + ": expected true/false");
    }
    void reject_leftovers() const {
        if (!kv_.empty()) throw ConfigError("unknown config key: " + kv_.begin()->first);
    }

private:
    std::map<std::string, std::string> kv_;
};

// A distribution section: either explicit parameters for the family, or
// match_mean/match_variance directives resolved through moment matching.
DistributionSpec parse_distribution(KvStore& kv, const std::string& section,
                                    const DistributionSpec& fallback) {
    if (!kv.has_prefix(section + ".")) return fallback;
    if (!kv.has(section + ".family")) throw ConfigError(section + ".family is required");
    const Family fam = family_from_name(kv.take(section + ".family"));

    const bool matching = kv.has(section + ".match_mean") || kv.has(section + ".match_variance");
    DistributionSpec spec = fallback;
    if (matching) {
        if (!kv.has(section + ".match_mean"))
            throw ConfigError(section + ".match_mean is required for moment matching");
        const double m = kv.take_number(section + ".match_mean");
        double v = m * m;  // exponential: single degree of freedom, variance implied
        if (fam == Family::exponential) {
            if (kv.has(section + ".match_variance")) (void)kv.take_number(section + ".match_variance");
        } else {
            if (!kv.has(section + ".match_variance"))
                throw ConfigError(section + ".match_variance is required for moment matching");
            v = kv.take_number(section + ".match_variance");
        }
        spec = match_moments(fam, m, v);
    } else {
        switch (fam) {
            case Family::gaussian:
                spec = Gaussian{kv.take_number(section + ".mu"), kv.take_number(section + ".sigma")};
                break;
            case Family::uniform:
                spec = Uniform{kv.take_number(section + ".c"), kv.take_number(section + ".d")};
                break;
            case Family::exponential:
                spec = Exponential{kv.take_number(section + ".lambda")};
                break;
            case Family::truncated_gaussian:
                spec = TruncatedGaussian{kv.take_number(section + ".mu"),
                                         kv.take_number(section + ".sigma")};
                break;
            case Family::rician:
                spec = Rician{kv.take_number(section + ".nu"), kv.take_number(section + ".sigma")};
                break;
        }
    }
    try {
        validate(spec);
    } catch (const ConfigError& e) {
        throw ConfigError(section + ": " + e.what());
    }
    return spec;
}

}  // namespace

ScenarioConfig::ScenarioConfig() {
    fleet.n_users = 200;
    fleet.seed = 1;
    fleet.charger.power_kw = 3.0;
    fleet.charger.arrival = Gaussian{19.0, std::sqrt(10.0)};
    fleet.charger.charging_time = Uniform{1.0, 11.0};
    fleet.departure = Gaussian{31.5, 1.0};
    cases = {Case::no_ev, Case::uncoordinated, Case::dr, Case::dr_v2g};
}

ScenarioConfig parse_config(std::istream& in) {
    KvStore kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        kv.insert(key, trim(t.substr(eq + 1)));
    }

    ScenarioConfig cfg;

    double horizon = 24.0, resolution = 1.0;
    if (kv.has("grid.horizon_hours")) horizon = kv.take_number("grid.horizon_hours");
    if (kv.has("grid.resolution_hours")) resolution = kv.take_number("grid.resolution_hours");
    cfg.grid = TimeGrid(horizon, resolution, true);
    if (kv.has("grid.analytic_resolution_hours"))
        cfg.analytic_resolution_hours = kv.take_number("grid.analytic_resolution_hours");
    (void)TimeGrid(horizon, cfg.analytic_resolution_hours, true);  // reject bad resolutions now

    if (kv.has("fleet.n_users")) {
        const long long n = kv.take_integer("fleet.n_users");
        if (n < 1) throw ConfigError("fleet.n_users must be at least 1");
        cfg.fleet.n_users = static_cast<int>(n);
    }
    if (kv.has("fleet.seed")) cfg.fleet.seed = static_cast<std::uint64_t>(kv.take_integer("fleet.seed"));
    if (kv.has("fleet.charger_power_kw")) {
        cfg.fleet.charger.power_kw = kv.take_number("fleet.charger_power_kw");
        if (!(cfg.fleet.charger.power_kw > 0.0))
            throw ConfigError("fleet.charger_power_kw must be positive");
    }

    cfg.fleet.charger.arrival = parse_distribution(kv, "arrival", cfg.fleet.charger.arrival);
    cfg.fleet.charger.charging_time =
        parse_distribution(kv, "charging", cfg.fleet.charger.charging_time);
    cfg.fleet.departure = parse_distribution(kv, "departure", cfg.fleet.departure);

    if (kv.has("baseline.base_kw")) cfg.baseline.base_kw = kv.take_number("baseline.base_kw");
    if (kv.has("baseline.morning_peak_kw"))
        cfg.baseline.morning_peak_kw = kv.take_number("baseline.morning_peak_kw");
    if (kv.has("baseline.morning_center_hours"))
        cfg.baseline.morning_center_hours = kv.take_number("baseline.morning_center_hours");
    if (kv.has("baseline.morning_width_hours"))
        cfg.baseline.morning_width_hours = kv.take_number("baseline.morning_width_hours");
    if (kv.has("baseline.evening_peak_kw"))
        cfg.baseline.evening_peak_kw = kv.take_number("baseline.evening_peak_kw");
    if (kv.has("baseline.evening_center_hours"))
        cfg.baseline.evening_center_hours = kv.take_number("baseline.evening_center_hours");
    if (kv.has("baseline.evening_width_hours"))
        cfg.baseline.evening_width_hours = kv.take_number("baseline.evening_width_hours");
    if (kv.has("baseline.jitter")) cfg.baseline.jitter = kv.take_number("baseline.jitter");
    if (kv.has("baseline.seed"))
        cfg.baseline.seed = static_cast<std::uint64_t>(kv.take_integer("baseline.seed"));
    validate(cfg.baseline);

    if (kv.has("dr.max_iterations")) {
        const long long it = kv.take_integer("dr.max_iterations");
        if (it < 1) throw ConfigError("dr.max_iterations must be at least 1");
        cfg.dr.max_iterations = static_cast<int>(it);
    }
    if (kv.has("dr.convergence_eps_kw")) {
        cfg.dr.convergence_eps_kw = kv.take_number("dr.convergence_eps_kw");
        if (!(cfg.dr.convergence_eps_kw > 0.0))
            throw ConfigError("dr.convergence_eps_kw must be positive");
    }
    if (kv.has("dr.update_rule")) {
        const std::string r = kv.take("dr.update_rule");
        if (r == "gauss_seidel") cfg.dr.update_rule = UpdateRule::gauss_seidel;
        else if (r == "jacobi") cfg.dr.update_rule = UpdateRule::jacobi;
        else throw ConfigError("dr.update_rule: expected gauss_seidel or jacobi");
    }

    if (kv.has("mc.samples")) {
        const long long s = kv.take_integer("mc.samples");
        if (s < 0) throw ConfigError("mc.samples must be nonnegative");
        cfg.mc_samples = static_cast<int>(s);
    }

    if (kv.has("run.cases")) {
        cfg.cases.clear();
        std::stringstream ss(kv.take("run.cases"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string name = trim(item);
            if (!name.empty()) cfg.cases.push_back(case_from_name(name));
        }
        if (cfg.cases.empty()) throw ConfigError("run.cases: at least one case is required");
    }
    if (kv.has("run.out_dir")) cfg.out_dir = kv.take("run.out_dir");
    if (kv.has("run.write_schedules")) cfg.write_schedules = kv.take_bool("run.write_schedules");
    if (kv.has("run.emit_extended")) cfg.emit_extended = kv.take_bool("run.emit_extended");

    kv.reject_leftovers();
    validate(cfg.fleet);
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

std::vector<DemandProfile> synth_baseline(const BaselineTemplate& t, int n_users,
                                          const TimeGrid& grid) {
    validate(t);
    if (n_users < 1) throw ConfigError("synth_baseline: n_users must be at least 1");

    auto bump = [](double x, double peak, double center, double width) {
        const double z = (x - center) / width;
        return peak * std::exp(-0.5 * z * z);
    };

    std::vector<double> shape(static_cast<std::size_t>(grid.slot_count()));
    for (int i = 0; i < grid.slot_count(); ++i) {
        const double tm = grid.slot_mid(i);
        shape[static_cast<std::size_t>(i)] =
            t.base_kw + bump(tm, t.morning_peak_kw, t.morning_center_hours, t.morning_width_hours) +
            bump(tm, t.evening_peak_kw, t.evening_center_hours, t.evening_width_hours);
    }

    std::vector<DemandProfile> out;
    out.reserve(static_cast<std::size_t>(n_users));
    for (int u = 0; u < n_users; ++u) {
        Rng rng = substream(t.seed, static_cast<std::uint64_t>(u), kBaselineStream);
        const double factor = 1.0 + t.jitter * (2.0 * rng.uniform01() - 1.0);
        std::vector<double> values(shape);
        for (double& v : values) v *= factor;
        out.emplace_back(grid, std::move(values));
    }
    return out;
}

const std::string* RunReport::find(const std::string& key) const {
    for (const auto& [k, v] : summary)
        if (k == key) return &v;
    return nullptr;
}

namespace {

void write_extended_csv(const std::string& path, const ExtendedProfile& ext) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open output file: " + path);
    os << "time_hours,value_kw\n";
    for (std::size_t i = 0; i < ext.values.size(); ++i)
        os << format_number(ext.start_hours + ext.resolution_hours * static_cast<double>(i)) << ','
           << format_number(ext.values[i]) << '\n';
}

void write_schedules_csv(const std::string& path, const std::vector<DemandProfile>& schedules) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open output file: " + path);
    os << "user,time_hours,value_kw\n";
    for (std::size_t u = 0; u < schedules.size(); ++u)
        for (int i = 0; i < schedules[u].size(); ++i)
            os << u << ',' << format_number(schedules[u].grid().slot_start(i)) << ','
               << format_number(schedules[u][i]) << '\n';
}

void write_summary(const std::string& out_dir, const RunReport& rep) {
    std::ofstream os(out_dir + "/summary.txt");
    if (!os) throw ConfigError("cannot open output file: " + out_dir + "/summary.txt");
    for (const auto& [k, v] : rep.summary) os << k << '=' << v << '\n';
}

}  // namespace

RunReport run_cases(const ScenarioConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    RunReport rep;
    auto put = [&rep](const std::string& k, const std::string& v) {
        rep.summary.emplace_back(k, v);
    };
    auto out_path = [&cfg](const std::string& name) { return cfg.out_dir + "/" + name; };
    auto write_profile = [&](const std::string& name, const DemandProfile& p) {
        write_csv_file(out_path(name), p);
        rep.files_written.push_back(out_path(name));
    };

    put("scenario.n_users", std::to_string(cfg.fleet.n_users));
    put("scenario.seed", std::to_string(cfg.fleet.seed));
    put("scenario.charger_power_kw", format_number(cfg.fleet.charger.power_kw));

    try {
        const bool needs_fleet =
            std::any_of(cfg.cases.begin(), cfg.cases.end(), [](Case c) {
                return c == Case::uncoordinated || c == Case::dr || c == Case::dr_v2g;
            });

        // One shared fleet and baseline: cases b/c/d see identical sessions.
        std::vector<DemandProfile> bases =
            synth_baseline(cfg.baseline, cfg.fleet.n_users, cfg.grid);
        DemandProfile base_total(cfg.grid);
        for (const auto& b : bases) base_total = add(base_total, b);
        std::vector<EvSession> sessions;
        if (needs_fleet) sessions = sample_fleet(cfg.fleet);

        for (Case c : cfg.cases) {
            const std::string name = case_name(c);
            switch (c) {
                case Case::no_ev: {
                    write_profile(name + ".csv", base_total);
                    put(name + ".par", format_number(par(base_total)));
                    put(name + ".peak_kw", format_number(peak_kw(base_total)));
                    break;
                }
                case Case::uncoordinated: {
                    DemandProfile agg = base_total;
                    for (const auto& s : sessions)
                        agg = add(agg, uncoordinated_schedule(s, cfg.fleet.charger.power_kw, cfg.grid));
                    write_profile(name + ".csv", agg);
                    put(name + ".par", format_number(par(agg)));
                    put(name + ".peak_kw", format_number(peak_kw(agg)));
                    break;
                }
                case Case::dr:
                case Case::dr_v2g: {
                    DrConfig dr_cfg = cfg.dr;
                    dr_cfg.v2g_enabled = (c == Case::dr_v2g);
                    const DrOutcome outcome =
                        run_dr(sessions, bases, cfg.fleet.charger.power_kw, dr_cfg, cfg.grid);
                    write_profile(name + ".csv", outcome.aggregate);
                    put(name + ".par", format_number(outcome.par_after));
                    put(name + ".peak_kw", format_number(outcome.peak_after_kw));
                    put(name + ".par_before", format_number(outcome.par_before));
                    put(name + ".peak_before_kw", format_number(outcome.peak_before_kw));
                    put(name + ".iterations", std::to_string(outcome.iterations_used));
                    put(name + ".converged", outcome.converged ? "true" : "false");
                    if (cfg.write_schedules) {
                        const std::string spath = out_path(name + "_schedules.csv");
                        write_schedules_csv(spath, outcome.schedules);
                        rep.files_written.push_back(spath);
                    }
                    break;
                }
                case Case::analytic_comparison: {
                    const TimeGrid agrid(cfg.grid.horizon_hours(), cfg.analytic_resolution_hours, true);
                    const Moments target = moments(cfg.fleet.charger.charging_time);
                    const Family families[] = {Family::uniform, Family::exponential,
                                               Family::truncated_gaussian, Family::rician};
                    for (Family f : families) {
                        const DistributionSpec charging =
                            match_moments(f, target.mean, target.variance);
                        ChargerModel model = cfg.fleet.charger;
                        model.charging_time = charging;
                        const ExtendedProfile ext = expected_profile_extended(model, agrid);
                        const DemandProfile wrapped = wrap_modulo_horizon(ext, agrid);
                        const std::string base = "expected_" + family_name(f);
                        write_profile(base + ".csv", wrapped);
                        put(base + ".energy_kwh", format_number(energy_kwh(wrapped)));
                        put(base + ".peak_kw", format_number(peak_kw(wrapped)));
                        if (cfg.emit_extended) {
                            const std::string epath = out_path(base + "_extended.csv");
                            write_extended_csv(epath, ext);
                            rep.files_written.push_back(epath);
                        }
                        if (cfg.mc_samples > 0) {
                            FleetSpec one = cfg.fleet;
                            one.n_users = 1;
                            one.charger = model;
                            const EmpiricalProfile emp =
                                empirical_expected_profile(one, cfg.mc_samples, agrid);
                            const std::string mpath = out_path("empirical_" + family_name(f) + ".csv");
                            write_csv_file(mpath, emp.mean, emp.stderr_kw);
                            rep.files_written.push_back(mpath);
                        }
                    }
                    break;
                }
            }
        }
    } catch (const std::exception& e) {
        put("run.failed", e.what());
        write_summary(cfg.out_dir, rep);
        throw;
    }

    write_summary(cfg.out_dir, rep);
    rep.files_written.push_back(cfg.out_dir + "/summary.txt");
    return rep;
}

}  // namespace evd
