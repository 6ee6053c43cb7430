#include "llq/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "llq/error.hpp"

namespace llq {

void ContinuumParams::validate() const {
    if (n_particles < 1) throw ConfigError("n_particles must be >= 1");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be positive and finite");
    if (!(box_length > 0.0) || !std::isfinite(box_length))
        throw ConfigError("box_length must be positive and finite");
    if (!std::isfinite(g)) throw ConfigError("g must be finite");
    if (!(omega >= 0.0) || !std::isfinite(omega)) throw ConfigError("omega must be >= 0");
}

double ContinuumParams::gamma() const { return tonks_parameter(g, rho); }

double LatticeParams::position(int site) const {
    return (site + 0.5) * dx - 0.5 * n_sites * dx;
}

double LatticeParams::lattice_binding_energy() const {
    if (onsite_u >= 0.0) return 0.0;
    // E_pair = -sqrt(U^2 + 16 J^2) against the band bottom -4J.
    return std::sqrt(onsite_u * onsite_u + 16.0 * hopping * hopping) - 4.0 * hopping;
}

UnitSystem UnitSystem::for_density(double rho) {
    if (!(rho > 0.0)) throw ConfigError("density must be positive to define the time unit");
    return UnitSystem{1.0, 1.0, 4.0 / (rho * rho)};
}

LatticeParams discretize(const ContinuumParams& cp, int n_sites, int n_max) {
    cp.validate();
    if (n_max < 2) throw ConfigError("n_max must be >= 2");
    if (n_sites < 2 * cp.n_particles)
        throw ConfigError("n_sites must be at least twice n_particles");
    double filling = static_cast<double>(cp.n_particles) / n_sites;
    if (filling >= kMaxMeanFilling)
        throw ConfigError("mean occupation " + std::to_string(filling) +
                          " too large for the sparse-filling discretization");

    LatticeParams lp;
    lp.n_sites = n_sites;
    lp.n_max = n_max;
    lp.dx = cp.box_length / n_sites;
    lp.hopping = 1.0 / (2.0 * lp.dx * lp.dx);
    lp.onsite_u = cp.g / lp.dx;
    lp.potential.resize(n_sites);
    for (int i = 0; i < n_sites; ++i) {
        double x = lp.position(i);
        lp.potential[i] = 0.5 * cp.omega * cp.omega * x * x;
    }
    return lp;
}

double tonks_parameter(double g, double rho) {
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    return g / rho;
}

double scattering_length(double g) {
    if (g == 0.0) throw ConfigError("scattering length undefined for g = 0");
    return -2.0 / g;
}

double beat_frequency(double gamma, double rho, double mass, double hbar) {
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    if (!(mass > 0.0)) throw ConfigError("mass must be positive");
    return gamma * gamma * hbar * rho * rho / (4.0 * mass);
}

double beat_frequency_trap(double gamma, int n_particles, double omega_trap) {
    return gamma * gamma * n_particles * omega_trap / 4.0;
}

double tg_cloud_radius(int n_particles, double omega) {
    if (!(omega > 0.0)) throw ConfigError("cloud radius needs omega > 0");
    return std::sqrt(2.0 * n_particles / omega);
}

double tg_central_density(int n_particles, double omega) {
    return std::sqrt(2.0 * n_particles * omega) / std::numbers::pi;
}

double default_box_length(int n_particles, double omega) {
    return 2.5 * tg_cloud_radius(n_particles, omega);
}

}  // namespace llq
