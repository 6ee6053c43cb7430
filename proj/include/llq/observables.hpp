#pragma once

// Continuum-normalized correlation functions of a lattice MPS. Lattice
// factors of dx cancel in every normalized correlator, so g2 and g3 are read
// off directly from site occupations.

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "llq/model.hpp"
#include "llq/mps.hpp"

namespace llq {

/// Sites with <n> below this are excluded from normalized correlators.
inline constexpr double kDensityGuard = 1e-12;

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct CorrelationRow {
    double anchor_x = 0.0;
    int anchor_site = 0;
    std::vector<double> xs;
    std::vector<double> g2;  ///< NaN where a density guard tripped
    double time = 0.0;       ///< units of 4/rho^2
};

struct LocalSeries {
    std::vector<double> times;
    std::vector<double> g2_local;
    std::vector<double> g3_local;
    std::vector<double> density_center;

    void push(double t, double g2, double g3, double rho);
    void validate() const;
};

/// rho_i = <n_i> / dx.
std::vector<double> density_profile(const SymmetricMPS& state, const LatticeParams& lp);

/// Site of maximal density; ties go to the smaller index.
int anchor_site(const std::vector<double>& density);

/// g2 between the anchor and every site, normalized by local densities. The
/// anchor entry is normal ordered: <n(n-1)>/<n>^2.
CorrelationRow g2_row(const SymmetricMPS& state, const LatticeParams& lp, std::optional<int> anchor = std::nullopt);

double g2_local(const SymmetricMPS& state, const LatticeParams& lp, int site);
/// Requires n_max >= 3.
double g3_local(const SymmetricMPS& state, const LatticeParams& lp, int site);

/// sum_j dx rho_j g2(a, j) = <n_a (N - 1)> / <n_a>. Equals N - 1 exactly for
/// a number eigenstate; guarded entries are skipped.
double sum_rule(const CorrelationRow& row, const std::vector<double>& density, double dx);

/// Least-squares slope of log g2 against log t over times in [t_lo, t_hi].
/// Throws std::invalid_argument for non-positive samples or fewer than two
/// points in the window.
double fit_power_law(const LocalSeries& series, std::pair<double, double> window);
double fit_power_law(const std::vector<double>& times, const std::vector<double>& values,
                     std::pair<double, double> window);

/// Angular frequency in [w_lo, w_hi] maximizing the discrete-time Fourier
/// magnitude of the mean-subtracted samples. Grid search then golden-section
/// refinement.
double dominant_frequency(const std::vector<double>& times, const std::vector<double>& values, double w_lo,
                          double w_hi);

/// Everything the quench driver logs per snapshot, from one set of
/// environments.
struct Snapshot {
    std::vector<double> density;
    CorrelationRow row;
    double g2_local = 0.0;
    double g3_local = kMissing;  ///< missing when n_max < 3
    double sum_rule = 0.0;
};

Snapshot measure(const SymmetricMPS& state, const LatticeParams& lp, std::optional<int> anchor = std::nullopt,
                 double time = 0.0);

}  // namespace llq
