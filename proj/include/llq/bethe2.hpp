#pragma once

// Two bosons with contact interaction on a ring of length 1 at density 2.
// Relative-coordinate eigenstates in the primary sector 0 <= y <= 1:
//
//   phi(y) = 2 A e^{i delta/4} cos(delta (y - 1/2) / 2),   E = delta^2 / 4
//
// with delta a root of delta / (2 gamma) = cot(delta / 4), gamma = g/2.
// Real roots are scattering (gas) states. For gamma < 0 there is one purely
// imaginary root delta = i d, the bound pair, with E = -d^2/4. Time is in
// units of 4/rho^2 = 1.

#include <complex>
#include <limits>
#include <vector>

#include "llq/observables.hpp"

namespace llq::bethe2 {

using cplx = std::complex<double>;

inline constexpr int kBoundBranch = -1;

struct BetheRoot {
    cplx delta;       ///< real for gas branches, i * d for the bound branch
    int branch = 0;   ///< 0, 1, 2, ... gas; kBoundBranch for the pair
    double energy = 0.0;
    double gamma = 0.0;
    bool analytic = false;  ///< gamma == 0: free-particle value, no root search

    bool bound() const { return branch == kBoundBranch; }
    /// Magnitude of the bound decay constant d for the bound branch.
    double dtilde() const { return delta.imag(); }
    /// |delta/(2 gamma) - cot(delta/4)| relative to max(1, |cot(delta/4)|),
    /// continued to delta = i d for the bound branch. NaN for analytic roots.
    double residual() const;
};

/// d > 0 with d tanh(d/4) = -2 gamma. This is the Bethe equation evaluated at
/// delta = i d: tan(i x) = i tanh(x), so delta/(2 gamma) = cot(delta/4)
/// becomes i d/(2 gamma) = -i / tanh(d/4).
BetheRoot solve_bound_root(double gamma);

/// Gas branch k. The root lies between consecutive zeros of sin and cos of
/// delta/4: (4 pi k, 2 pi (2k+1)) for gamma > 0 and (2 pi (2k+1), 4 pi (k+1))
/// for gamma < 0. gamma == 0 returns delta = 4 pi k, flagged analytic.
BetheRoot solve_gas_root(double gamma, int branch);
std::vector<BetheRoot> solve_gas_roots(double gamma, int n_branches);

struct TwoParticleState {
    BetheRoot root;
    double norm_a = 0.0;
    cplx contact_amp;

    /// phi(y) on the primary sector.
    cplx operator()(double y) const;
};

/// Closed-form normalization of the primary-sector wavefunction:
///   gas:   4 A^2 (1/2 + sin(delta/2)/delta) = 1
///   bound: phi = A (e^{d(y-1)/2} + e^{-d y/2}),
///          A^2 (2 (1 - e^{-d})/d + 2 e^{-d/2}) = 1
double normalization(const BetheRoot& root);

/// phi(0): 2 A e^{i delta/4} cos(delta/4); A (1 + e^{-d/2}) for the pair.
cplx contact_amplitude(const BetheRoot& root, double norm_a);

TwoParticleState make_state(const BetheRoot& root);

/// g2 = |phi(0)|^2 / 2.
double g2_of_state(cplx contact_amp);

/// <phi_0 | phi_root> with phi_0(y) = i sqrt(2) sin(pi y), the gamma = +inf
/// ground state. Closed form of the primary-sector integral.
cplx overlap_tg(const BetheRoot& root);

/// <phi_0 | phi_bound>; with the phase convention of phi_0 above this is
/// -i sqrt(2) A (1 + e^{-d/2}) 2 pi / (pi^2 + d^2/4).
cplx overlap_tg_bound(double gamma);

/// Expansion of phi_0 in the eigenbasis at gamma < 0 (bound state first).
struct QuenchExpansion {
    double gamma = 0.0;
    std::vector<double> energies;
    std::vector<cplx> coeffs;    ///< <phi_n | phi_0>
    std::vector<cplx> contacts;  ///< phi_n(0)
    double completeness = 0.0;   ///< sum |c_n|^2

    /// phi(0, t) = sum_n c_n phi_n(0) (e^{-i E_n t} - 1). The subtracted form
    /// uses phi_0(0) = 0 and makes g2(0) = 0 exact.
    cplx contact_at(double t) const;
};

QuenchExpansion expand_tg(double gamma, int n_branches);

/// g2(t) after quenching phi_0 to gamma < 0. Throws NumericalError if the
/// expansion completeness is below min_completeness.
std::vector<double> g2_exact_quench(double gamma, const std::vector<double>& times, int n_branches = 4000,
                                    double min_completeness = 1.0 - 1e-8);

/// Single-mode beating: 8 pi^2 / gamma^2 (1 - cos(gamma^2 t)).
double g2_single_mode(double gamma, double t);
/// Two-state beating: (5 - 4 cos((gamma^2 + pi^2) t)) pi^2 / gamma^2.
double g2_two_state(double gamma, double t);

/// Binding energy d^2/4 of the pair at gamma < 0.
double binding_energy(double gamma);

struct SpectrumPoint {
    double inv_gamma = 0.0;
    double gamma = 0.0;
    double bound_energy = std::numeric_limits<double>::quiet_NaN();  ///< NaN for gamma >= 0
    std::vector<double> gas_energies;                                ///< ascending branch index
};

/// gamma == 0 entries are evaluated analytically.
std::vector<SpectrumPoint> spectrum(const std::vector<double>& gammas, int n_branches);

/// Hard-sphere reference from the t = 0 correlation row: separations are
/// shifted away from the anchor by a_1d (|x| -> |x| + a_1d, sign kept) and
/// values multiplied by (1 - a_1d rho). `valid` marks |x| + a_1d <= 1/rho,
/// where the excluded-volume picture applies.
struct HsReference {
    CorrelationRow row;
    std::vector<bool> valid;
};

HsReference hs_reference(const CorrelationRow& g2_t0, double a_1d, double rho);

/// Quadrature self-checks (adaptive Gauss-Kronrod on [0, 1]).
double norm_by_quadrature(const TwoParticleState& s);
cplx overlap_by_quadrature(const TwoParticleState& a, const TwoParticleState& b);

}  // namespace llq::bethe2
