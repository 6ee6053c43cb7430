#pragma once

// Continuum Lieb-Liniger parameters, their Bose-Hubbard discretization and
// unit conversions. Units: hbar = m = 1 unless stated otherwise.

#include <vector>

namespace llq {

/// Reduced Planck constant in SI units (J s).
inline constexpr double kHbarSI = 1.054571817e-34;

/// Largest mean site occupation accepted by discretize().
inline constexpr double kMaxMeanFilling = 0.15;

struct ContinuumParams {
    int n_particles = 1;
    double g = 0.0;      ///< contact interaction strength, 1/length
    double rho = 1.0;    ///< reference linear density
    double omega = 0.0;  ///< harmonic trap frequency
    double box_length = 1.0;

    /// Throws ConfigError if any field invariant is violated.
    void validate() const;
    double gamma() const;
};

struct LatticeParams {
    int n_sites = 0;
    double dx = 0.0;
    double hopping = 0.0;   ///< J
    double onsite_u = 0.0;  ///< U
    std::vector<double> potential;
    int n_max = 4;

    /// Site position measured from the box center.
    double position(int site) const;
    /// Per-particle constant dropped from the lattice Hamiltonian: the
    /// diagonal 2J of the discretized Laplacian. Adding n_particles times this
    /// value to a lattice energy gives the continuum energy.
    double kinetic_offset() const { return 2.0 * hopping; }
    /// Two-body bound-state energy on the lattice for U < 0, relative to two
    /// particles at the band bottom (zero pair momentum).
    double lattice_binding_energy() const;
};

struct UnitSystem {
    double hbar = 1.0;
    double mass = 1.0;
    double time_unit = 1.0;  ///< 4/rho^2

    static UnitSystem for_density(double rho);
    double to_units(double t_physical) const { return t_physical / time_unit; }
    double to_physical(double t_units) const { return t_units * time_unit; }
};

/// Continuum to lattice map: dx = L/M, J = 1/(2 dx^2), U = g/dx,
/// V_i = omega^2 x_i^2 / 2 with x_i the site center measured from the box
/// center. Rejects mean occupation >= kMaxMeanFilling and n_max < 2.
LatticeParams discretize(const ContinuumParams& cp, int n_sites, int n_max);

double tonks_parameter(double g, double rho);

/// 1D scattering length a = -2/g. Throws for g == 0.
double scattering_length(double g);

/// Asymptotic pair beat frequency gamma^2 hbar rho^2 / (4 m).
double beat_frequency(double gamma, double rho, double mass = 1.0, double hbar = 1.0);

/// Same frequency expressed through the longitudinal trap frequency of a
/// harmonically trapped TG cloud: gamma^2 N omega / 4.
double beat_frequency_trap(double gamma, int n_particles, double omega_trap);

/// Thomas-Fermi radius sqrt(2N/omega) of a trapped TG gas.
double tg_cloud_radius(int n_particles, double omega);

/// Central density sqrt(2N omega)/pi of a trapped TG gas.
double tg_central_density(int n_particles, double omega);

/// Default box: the cloud radius covers 40% of the box length.
double default_box_length(int n_particles, double omega);

}  // namespace llq
