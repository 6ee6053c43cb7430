#pragma once

// Oracle-equivalence and asymptotics checks. Each check reports the measured
// quantity next to its tolerance; the acceptance binary and `llq --scenario
// validate` share these routines.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "llq/mps.hpp"

namespace llq::validation {

struct Check {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;

    nlohmann::json to_json() const;
};

bool all_passed(const std::vector<Check>& checks);

/// Strong-coupling limits of the bound root, bound-state g2, the gas branch 0
/// root and the TG-bound overlap.
std::vector<Check> bethe_asymptotics();

/// Branch-0 continuity across 1/gamma = 0, bound energy against -gamma^2 and
/// the ground energy at |gamma| = 1e-4 (both signs).
std::vector<Check> spectrum_endpoints();

/// Weak-coupling limit of the ground energy, E -> 2 gamma (first-order
/// perturbation theory on the uniform ring state), checked at |gamma| = 1e-4
/// for both signs.
Check weak_coupling_ground_energy();

/// Exact two-particle quench: dominant frequency, later-time accuracy of the
/// two-state against the single-mode formula, and g2(0) = 0.
std::vector<Check> exact_beating(double gamma);

/// Global error at a fixed final time against exact evolution for step sizes
/// dt0, dt0/2, ... on a 6-site, 2-particle chain (J = 1). The final time is
/// raised to 8 dt0 when shorter.
struct TrotterOrder {
    std::vector<double> dts;
    std::vector<double> errors;  ///< 2-norm of the state difference
    double slope = 0.0;          ///< least-squares log-log slope
    std::vector<double> local_slopes;  ///< between consecutive halvings
};

TrotterOrder trotter_order(double dt0, int levels = 4, double t_final = 2.0);
/// Passes when the fitted slope and every pairwise slope lie within tol.
Check trotter_order_check(const TrotterOrder& r, double target = 4.0, double tol = 0.3);

/// Small quench (open box, no trap) evolved by TEBD and by the ED oracle over
/// one lattice beat period.
struct EdComparison {
    int n_sites = 0;
    int n_particles = 0;
    double gamma = 0.0;
    std::size_t basis_dim = 0;
    int steps = 0;
    double period = 0.0;          ///< units of 4/rho^2
    double initial_overlap = 0.0;  ///< |<ED TG state|MPS TG state>|
    double max_g2_dev = 0.0;
    double max_norm_loss = 0.0;
    double max_number_dev = 0.0;
    double energy_drift = 0.0;  ///< max |E(t) - E(0)| / |E(0)|
    double truncation_weight = 0.0;  ///< summed over the run
};

EdComparison tebd_vs_ed(const TruncationPolicy& policy, double dt_j, int n_sites = 32, int n_particles = 2,
                        double gamma = -20.0);
std::vector<Check> ed_checks(const EdComparison& r);

/// Randomized property suites on small chains.
Check canonical_form_property(int cases, std::uint64_t seed);
Check charge_conservation_property(int cases, std::uint64_t seed);
Check truncation_monotonicity_property(int cases, std::uint64_t seed);
Check reversibility_property(int cases, std::uint64_t seed);

}  // namespace llq::validation
