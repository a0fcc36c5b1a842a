#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "evdemand/scenario.hpp"

namespace {

struct Overrides {
    long long seed = -1;
    std::string out_dir;
    long long samples = -1;
    bool emit_extended = false;
};

void apply(evd::ScenarioConfig& cfg, const Overrides& ov) {
    if (ov.seed >= 0) cfg.fleet.seed = static_cast<std::uint64_t>(ov.seed);
    if (!ov.out_dir.empty()) cfg.out_dir = ov.out_dir;
    if (ov.samples >= 0) cfg.mc_samples = static_cast<int>(ov.samples);
    if (ov.emit_extended) cfg.emit_extended = true;
}

void add_overrides(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "override fleet.seed");
    cmd->add_option("--out-dir", ov.out_dir, "override run.out_dir");
    cmd->add_option("--samples", ov.samples, "override mc.samples (empirical curves)");
    cmd->add_flag("--emit-extended", ov.emit_extended, "also write unwrapped expected profiles");
}

int execute(const evd::ScenarioConfig& cfg) {
    const evd::RunReport rep = evd::run_cases(cfg);
    for (const auto& [k, v] : rep.summary) std::cout << k << '=' << v << '\n';
    std::cout << "files_written=" << rep.files_written.size() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evdemand: residential EV charging demand profiles and demand response"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    CLI::App* run = app.add_subcommand("run", "execute the cases requested by a config file");
    run->add_option("config", config_path, "scenario config path")->required();
    add_overrides(run, ov);

    CLI::App* expected = app.add_subcommand("expected", "write the analytic expected-profile curves only");
    expected->add_option("config", config_path, "scenario config path")->required();
    add_overrides(expected, ov);

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a config file");
    validate->add_option("config", config_path, "scenario config path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        evd::ScenarioConfig cfg = evd::load_config(config_path);
        if (validate->parsed()) {
            std::cout << "config OK\n";
            std::cout << "fleet.n_users=" << cfg.fleet.n_users << '\n';
            std::cout << "fleet.seed=" << cfg.fleet.seed << '\n';
            std::cout << "fleet.charger_power_kw=" << evd::format_number(cfg.fleet.charger.power_kw) << '\n';
            std::cout << "arrival=" << evd::describe(cfg.fleet.charger.arrival) << '\n';
            std::cout << "charging=" << evd::describe(cfg.fleet.charger.charging_time) << '\n';
            std::cout << "departure=" << evd::describe(cfg.fleet.departure) << '\n';
            std::cout << "cases=";
            for (std::size_t i = 0; i < cfg.cases.size(); ++i)
                std::cout << (i ? "," : "") << evd::case_name(cfg.cases[i]);
            std::cout << '\n';
            return 0;
        }
        apply(cfg, ov);
        if (expected->parsed()) cfg.cases = {evd::Case::analytic_comparison};
        return execute(cfg);
    } catch (const evd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const evd::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return 2;
    } catch (const evd::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
