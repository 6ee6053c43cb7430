#pragma once

// Time-evolving block decimation for the Bose-Hubbard discretization of the
// Lieb-Liniger gas:
//
//   H = -J sum_i (b_i^+ b_{i+1} + h.c.) + U/2 sum_i n_i (n_i - 1) + sum_i V_i n_i
//
// split into bond terms, composed with a symmetric fourth-order product
// formula, for imaginary-time ground-state preparation and real-time quenches.

#include <complex>
#include <functional>
#include <map>
#include <vector>

#include "llq/model.hpp"
#include "llq/mps.hpp"

namespace llq {

enum class Layer { Even, Odd };  ///< bonds 0,2,4,... and 1,3,5,...

struct TrotterSubstep {
    Layer layer;
    double fraction;  ///< of the full step
};

struct TrotterScheme {
    int order = 4;

    /// Fractional substeps of one step. Adjacent substeps on the same layer
    /// are merged, so layers alternate.
    std::vector<TrotterSubstep> substeps() const;
    void validate() const;
};

/// Coefficient s = 1/(4 - 4^(1/3)) of the fourth-order composition
/// S2(s) S2(s) S2(1-4s) S2(s) S2(s).
double suzuki_coefficient();

/// (layer, fraction * dt) entries of one fourth-order step.
std::vector<std::pair<Layer, double>> fourth_order_steps(double dt);

/// Dense two-site Hamiltonian of a bond. On-site terms are split half/half
/// between the two bonds touching a site; the end sites give their full term
/// to their only bond.
RealMatrix bond_hamiltonian(const LatticeParams& lp, int bond);

/// exp(-i tau h_bond). tau = dt for real time, tau = -i dtau for imaginary
/// time.
TwoSiteGate build_bond_gate(const LatticeParams& lp, int bond, std::complex<double> tau);

/// <psi|H|psi> for a normalized state.
double energy(const SymmetricMPS& state, const LatticeParams& lp);

/// One-step propagator with cached gates. Sweep direction alternates between
/// layers so that the orthogonality center travels without extra QR sweeps.
class TebdPropagator {
public:
    TebdPropagator(const LatticeParams& lp, double dt, TrotterScheme scheme = {}, bool imaginary = false);

    struct StepStats {
        double truncation_weight = 0.0;  ///< sum over all gates of the step
        double norm_loss = 0.0;          ///< max |1 - norm| seen before renormalization
    };

    StepStats step(SymmetricMPS& state, const TruncationPolicy& policy);

    double dt() const { return dt_; }
    const LatticeParams& lattice() const { return lp_; }

private:
    StepStats apply_layer(SymmetricMPS& state, Layer layer, const std::vector<TwoSiteGate>& gates,
                          const TruncationPolicy& policy);

    LatticeParams lp_;
    double dt_;
    bool imaginary_;
    std::vector<std::pair<Layer, std::size_t>> sequence_;  ///< layer, gate-set index
    std::vector<std::vector<TwoSiteGate>> gate_sets_;
};

struct EvolutionConfig {
    double dt = 0.0;  ///< physical time step
    int n_steps = 1;
    TruncationPolicy policy;
    int measure_every = 1;
    TrotterScheme scheme;
    double time_unit = 1.0;  ///< 4/rho^2; trajectory times are t / time_unit
    /// Largest discarded weight tolerated in a single step.
    double abort_truncation = 1e-3;
    bool track_energy = true;

    void validate() const;
};

/// Diagnostics recorded at every measurement stride, including t = 0.
struct Trajectory {
    std::vector<double> time;  ///< units of time_unit
    std::vector<double> truncation_weight;  ///< accumulated since the previous row
    std::vector<double> max_entropy;
    std::vector<double> energy;
    std::vector<double> norm_loss;
    std::vector<double> particle_number;
};

/// Observer callback: (time in units, state, trajectory so far including the
/// row for this time). Runs on the driving thread.
using Observer = std::function<void(double, const SymmetricMPS&, const Trajectory&)>;

/// Real-time evolution with post-quench lattice parameters. The observer is
/// invoked at t = 0 and after every measure_every steps.
Trajectory evolve_real(SymmetricMPS& state, const LatticeParams& lp, const EvolutionConfig& config,
                       const Observer& observer = {});

struct GroundStateConfig {
    double dt = 0.0;     ///< first imaginary time step; 0 selects 2 / J
    int stages = 4;      ///< each stage divides dt by 4
    int max_steps = 20000;  ///< per stage
    int check_every = 10;
    double tolerance = 1e-12;  ///< relative energy change per step
    bool hardcore = true;   ///< prepare with n_max = 1, then embed
    TruncationPolicy policy;
    /// Strang splitting by default: every substep is a positive imaginary
    /// time, so large early steps stay contractive.
    TrotterScheme scheme{2};
    /// Upper bound on the prepared state's local g2 at the density maximum.
    double max_contact_g2 = 1e-2;
};

struct GroundStateResult {
    SymmetricMPS state;
    double energy = 0.0;
    int steps = 0;
    std::vector<double> energy_history;  ///< energy at each convergence check
};

/// Evenly spaced Fock seed over the central cloud region: the Thomas-Fermi
/// extent of a TG cloud when trapped, the whole box otherwise.
std::vector<int> spread_fock_seed(const LatticeParams& lp, int n_particles, double omega);

/// Imaginary-time preparation of the pre-quench ground state. Throws
/// NumericalError if the final stage does not converge within its budget or
/// the result lacks the fermionization signature.
GroundStateResult prepare_ground_state(const LatticeParams& lp, int n_particles, const GroundStateConfig& config,
                                       double omega = 0.0);

/// Exact ground state of hardcore bosons (the gamma -> +inf limit) on the
/// open chain. Through the Jordan-Wigner mapping this is the Slater
/// determinant of the lowest single-particle orbitals; it is compiled into a
/// circuit of nearest-neighbour Givens rotations that decouple one mode at a
/// time from the correlation matrix, and the circuit is applied to a Fock
/// state. `mode_tol` bounds min(lambda, 1 - lambda) of each decoupled mode.
/// The returned state is embedded with cutoff lp.n_max; energy is the sum of
/// the occupied orbital energies.
GroundStateResult hardcore_ground_state(const LatticeParams& lp, int n_particles, const TruncationPolicy& policy,
                                        double mode_tol = 1e-14);

}  // namespace llq
