// susy - scenario runner and spectrum explorer for the isospectral-partner
// toolkit. Subcommands: run <config.json>, list, spectrum --system <name>.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "susy/scenario.hpp"

namespace {

int apply_env_grid_override(susy::ScenarioConfig& cfg) {
    if (const char* env = std::getenv("SUSY_GRID_N")) {
        try {
            cfg.grid_n = std::stoi(env);
        } catch (const std::exception&) {
            std::cerr << "SUSY_GRID_N is not an integer: " << env << "\n";
            return 2;
        }
        if (cfg.grid_n < 16) {
            std::cerr << "SUSY_GRID_N must be at least 16\n";
            return 2;
        }
    }
    return 0;
}

int run_config(const std::string& path) {
    susy::ScenarioConfig cfg;
    try {
        std::ifstream f(path);
        if (!f) {
            std::cerr << "cannot open config file: " << path << "\n";
            return 2;
        }
        susy::ordered_json j = susy::ordered_json::parse(f);
        cfg = susy::config_from_json(j);
    } catch (const susy::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    }
    if (int rc = apply_env_grid_override(cfg)) return rc;

    try {
        susy::ScenarioOutcome out = susy::run_scenario(cfg);
        for (const auto& c : out.checks)
            std::printf("[%s] %-12s measured=%.3e tolerance=%.3e\n", c.pass ? "PASS" : "FAIL",
                        c.name.c_str(), c.measured, c.tolerance);
        return out.exit_code;
    } catch (const susy::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    }
}

int run_spectrum(susy::ScenarioConfig cfg) {
    if (int rc = apply_env_grid_override(cfg)) return rc;
    try {
        cfg.checks = {"spectrum"};
        susy::Grid box = susy::make_grid(cfg.grid_xmin, cfg.grid_xmax, cfg.grid_n);
        susy::AssembledScenario a = susy::assemble(cfg);
        if (a.two_d) {
            auto probes = susy::lowest_product_states(a.x.S, a.y.S, 3 * cfg.levels);
            std::printf("level  ix  iy  %-22s residual\n", "energy");
            int level = 0;
            for (const auto& p : probes) {
                double resid = std::hypot(a.x.S.residuals[static_cast<std::size_t>(p.i)],
                                          a.y.S.residuals[static_cast<std::size_t>(p.j)]);
                std::printf("%5d %3d %3d  %-22.15g %.3e\n", level++, p.i, p.j, p.energy, resid);
            }
        } else {
            std::printf("level  %-22s residual\n", "energy");
            for (std::size_t i = 0; i < a.x.S.energies.size(); ++i)
                std::printf("%5zu  %-22.15g %.3e\n", i, a.x.S.energies[i], a.x.S.residuals[i]);
        }
        (void)box;
        return 0;
    } catch (const susy::ConfigError& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"isospectral-partner Hamiltonians, ladder operators and 2-D integrals"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario config and write report files");
    std::string config_path;
    run->add_option("config", config_path, "path to a scenario config (JSON)")->required();

    auto* list = app.add_subcommand("list", "list the named scenario systems");

    auto* spec = app.add_subcommand("spectrum", "print the spectrum of a named system");
    susy::ScenarioConfig cfg;
    std::string system_name_arg = "mielnik2d";
    std::string family_arg;
    spec->add_option("--system", system_name_arg, "system name")->required();
    spec->add_option("--levels", cfg.levels, "number of levels (<= 40)");
    spec->add_option("--gamma", cfg.params.gamma, "isospectral family parameter");
    spec->add_option("--a0", cfg.params.a0, "error-function family scale");
    spec->add_option("--omega", cfg.params.omega, "oscillator frequency");
    spec->add_option("--alpha-p4", cfg.params.alpha_p4, "Painleve-IV alpha");
    spec->add_option("--beta-p4", cfg.params.beta_p4, "Painleve-IV beta");
    spec->add_option("--eps", cfg.params.eps, "branch sign (+1 or -1)");
    spec->add_option("--family", family_arg, "potential family for the custom system");
    spec->add_option("--grid-n", cfg.grid_n, "grid sample count");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return run_config(config_path);
    if (list->parsed()) {
        std::fputs(susy::list_scenarios().c_str(), stdout);
        return 0;
    }
    if (spec->parsed()) {
        try {
            cfg.system = susy::system_from_name(system_name_arg);
            if (!family_arg.empty()) {
                susy::ordered_json j;
                j["system"] = system_name_arg;
                j["params"] = {{"family", family_arg}};
                susy::ScenarioConfig tmp = susy::config_from_json(j);
                cfg.params.family = tmp.params.family;
            }
        } catch (const susy::ConfigError& e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
        return run_spectrum(cfg);
    }
    return 0;
}
