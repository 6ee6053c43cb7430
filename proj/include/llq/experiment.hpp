#pragma once

// Experiment drivers behind the command line tool: configuration, the quench
// pipeline (prepare TG state, measure its central density, switch the
// interaction, evolve), the two-particle comparison and the spectrum sweep.
// Every driver writes CSV files, a resolved config.json, run_info.json and
// SVG plots into its output directory.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "llq/model.hpp"
#include "llq/mps.hpp"
#include "llq/observables.hpp"

namespace llq::experiment {

enum class Scenario { Spectrum, Quench, TwoParticle, Validate };
enum class Preparation { Exact, Imaginary };

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& s);  ///< throws ConfigError

/// Default quench strength of the correlation runs and of the two-particle
/// comparison.
inline constexpr double kDeskGamma = -18.7931;
inline constexpr double kTwoParticleGamma = -89.0355;

struct ExperimentConfig {
    Scenario scenario = Scenario::Quench;
    bool paper_scale = false;

    // physics
    int n_particles = 6;
    double gamma = kDeskGamma;  ///< post-quench Tonks parameter at the cloud center
    double omega = 1.0;
    double box_length = 0.0;  ///< 0 selects default_box_length(n_particles, omega)

    // lattice
    int n_sites = 256;
    int n_max = 4;

    // evolution
    double dt = 0.25;  ///< time step in units of 1/J
    double t_final = 0.081;  ///< units of 4/rho^2
    int measure_every = 1;
    int max_steps = 0;  ///< 0: no cap; otherwise stop after this many steps
    double abort_truncation = 1e-3;
    Preparation preparation = Preparation::Exact;
    /// Correlation-row snapshots, in periods of the pair binding energy. For
    /// gamma >= 0 only t = 0 and the final time are written.
    std::vector<double> snapshot_periods{0.0, 0.25, 0.5, 3.5, 4.0, 4.5};
    /// Snapshots at or beyond this many periods carry the hard-sphere column.
    double hs_from_periods = 3.0;

    // truncation
    TruncationPolicy policy{50, 1e-10};

    // spectrum
    double inv_gamma_min = -1.0;
    double inv_gamma_max = 1.0;
    int spectrum_points = 201;
    int spectrum_branches = 4;

    // two-particle
    int bethe_branches = 4000;
    int n_times = 2001;
    std::string overlay;  ///< optional trajectory.csv to draw over the exact curve

    std::uint64_t seed = 12345;
    std::string output_dir = "out";

    /// Throws ConfigError naming the offending field.
    void validate() const;
    nlohmann::json to_json() const;
    double box() const;
};

/// Defaults for a scenario; paper_scale switches the quench to N=18, M=1280,
/// chi=100.
ExperimentConfig defaults(Scenario scenario, bool paper_scale = false);

/// Defaults for the scenario named in the document (or the override), with
/// the document's fields laid on top. Unknown keys are rejected.
ExperimentConfig from_json(const nlohmann::json& j, std::optional<Scenario> scenario_override = std::nullopt,
                           std::optional<bool> paper_scale_override = std::nullopt);

using Log = std::function<void(const std::string&)>;

/// TG state prepared on the pre-quench lattice and the post-quench lattice
/// built from its measured central density.
struct PreparedQuench {
    ContinuumParams cp;  ///< g filled in after the density measurement
    LatticeParams initial;
    LatticeParams final;
    SymmetricMPS state;
    Snapshot t0;
    int anchor = 0;
    double rho_center = 0.0;
    double time_unit = 0.0;
    double prep_energy = 0.0;  ///< lattice energy of the initial state
    std::string prep_method;
};

PreparedQuench prepare_quench(const ContinuumParams& cp, int n_sites, int n_max, double gamma,
                              const TruncationPolicy& policy, Preparation prep, const Log& log = {});

/// Beat period 2 pi / E_b in units of 4/rho^2, E_b from the two-particle
/// bound state at gamma. NaN for gamma >= 0.
double pair_period(double gamma);

/// Hard-sphere reference sampled on the grid of `row`: the t = 0 row shifted
/// outwards by a and scaled by (1 - a rho), linearly interpolated. Returns
/// (values, valid) with NaN inside |x| < a or outside the grid; valid marks
/// |x| <= 1/rho.
std::pair<std::vector<double>, std::vector<bool>> hs_on_grid(const CorrelationRow& t0, double a_1d, double rho);

nlohmann::json run_quench(const ExperimentConfig& cfg, const std::filesystem::path& out, const Log& log = {});
nlohmann::json run_spectrum(const ExperimentConfig& cfg, const std::filesystem::path& out, const Log& log = {});
nlohmann::json run_two_particle(const ExperimentConfig& cfg, const std::filesystem::path& out, const Log& log = {});
/// Writes validation.json; the returned document has "passed".
nlohmann::json run_validate(const ExperimentConfig& cfg, const std::filesystem::path& out, const Log& log = {});

/// Dispatch on cfg.scenario. Creates the directory and writes config.json.
nlohmann::json run(const ExperimentConfig& cfg, const std::filesystem::path& out, const Log& log = {});

}  // namespace llq::experiment
