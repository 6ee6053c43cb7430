// llq: command line front end for the quench simulator.
//
// Exit codes: 0 success, 1 validation failure, 2 config error, 3 runtime abort.

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "llq/error.hpp"
#include "llq/experiment.hpp"

namespace {

using namespace llq;

void log_line(const std::string& msg) {
    static const auto t0 = std::chrono::steady_clock::now();
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "[%9.2fs] %s\n", s, msg.c_str());
    std::fflush(stderr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lieb-Liniger quench simulator (TEBD, two-particle Bethe ansatz, exact diagonalization)"};

    std::string config_path, scenario_name, out_dir;
    std::optional<double> gamma, dt, t_final;
    std::optional<int> n_particles, sites, chi;
    std::optional<std::uint64_t> seed;
    bool paper_scale = false;

    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--scenario", scenario_name, "spectrum | quench | two-particle | validate");
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--gamma", gamma, "post-quench Tonks parameter");
    app.add_option("--n-particles", n_particles, "number of particles");
    app.add_option("--sites", sites, "lattice sites M");
    app.add_option("--chi", chi, "maximum bond dimension");
    app.add_option("--dt", dt, "time step in units of 1/J");
    app.add_option("--t-final", t_final, "final time in units of 4/rho^2");
    app.add_option("--seed", seed, "random seed (validation property suites)");
    app.add_flag("--paper-scale", paper_scale, "N=18, M=1280, chi=100 defaults (long-running)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    experiment::ExperimentConfig cfg;
    try {
        std::optional<experiment::Scenario> scen;
        if (!scenario_name.empty()) scen = experiment::parse_scenario(scenario_name);
        std::optional<bool> ps;
        if (paper_scale) ps = true;

        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw ConfigError("--config: cannot open " + config_path);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(is);
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError(config_path + ": " + e.what());
            }
            cfg = experiment::from_json(j, scen, ps);
        } else {
            cfg = experiment::defaults(scen.value_or(experiment::Scenario::Quench), paper_scale);
        }

        if (gamma) cfg.gamma = *gamma;
        if (n_particles) cfg.n_particles = *n_particles;
        if (sites) cfg.n_sites = *sites;
        if (chi) cfg.policy.chi_max = *chi;
        if (dt) cfg.dt = *dt;
        if (t_final) cfg.t_final = *t_final;
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        log_line("scenario " + experiment::to_string(cfg.scenario) + " -> " + cfg.output_dir);
        nlohmann::json result = experiment::run(cfg, cfg.output_dir, log_line);
        if (cfg.scenario == experiment::Scenario::Validate && !result.value("passed", false)) {
            log_line("validation FAILED");
            return 1;
        }
        log_line("done");
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const TruncationAbort& e) {
        std::cerr << "runtime abort: " << e.what() << " (weight " << e.weight() << " at t = " << e.time() << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "runtime abort: " << e.what() << '\n';
        return 3;
    }
}
