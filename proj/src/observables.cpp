#include "llq/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace llq {

void LocalSeries::push(double t, double g2, double g3, double rho) {
    times.push_back(t);
    g2_local.push_back(g2);
    g3_local.push_back(g3);
    density_center.push_back(rho);
}

void LocalSeries::validate() const {
    std::size_t n = times.size();
    if (g2_local.size() != n || g3_local.size() != n || density_center.size() != n)
        throw std::logic_error("LocalSeries arrays differ in length");
    for (std::size_t k = 1; k < n; ++k)
        if (!(times[k] > times[k - 1])) throw std::logic_error("LocalSeries times must increase strictly");
    for (double g3 : g3_local)
        if (g3 < -1e-10) throw std::logic_error("negative g3 beyond tolerance: " + std::to_string(g3));
}

namespace {

void check_lattice(const SymmetricMPS& state, const LatticeParams& lp) {
    if (state.n_sites() != lp.n_sites) throw std::invalid_argument("state and lattice sizes differ");
    if (!(lp.dx > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
}

std::vector<double> occupations(const Environments& env, int m, int n_max, double norm2) {
    Matrix n = local_ops::number(n_max);
    std::vector<double> out(m);
    for (int i = 0; i < m; ++i) out[i] = env.onsite(i, n).real() / norm2;
    return out;
}

double guarded(double num, double den) { return den < kDensityGuard ? kMissing : num / den; }

CorrelationRow row_from(const Environments& env, const SymmetricMPS& state, const LatticeParams& lp,
                        const std::vector<double>& occ, int anchor, double norm2) {
    const int nm = state.n_max();
    CorrelationRow row;
    row.anchor_site = anchor;
    row.anchor_x = lp.position(anchor);
    auto raw = env.correlation_row(anchor, local_ops::number(nm), local_ops::number(nm), local_ops::pair(nm));
    row.xs.resize(state.n_sites());
    row.g2.resize(state.n_sites());
    const double na = occ[anchor];
    for (int j = 0; j < state.n_sites(); ++j) {
        row.xs[j] = lp.position(j) - row.anchor_x;
        double nj = occ[j];
        double den = j == anchor ? na * na : na * nj;
        row.g2[j] = (na < kDensityGuard || nj < kDensityGuard) ? kMissing : raw[j].real() / norm2 / den;
    }
    return row;
}

}  // namespace

std::vector<double> density_profile(const SymmetricMPS& state, const LatticeParams& lp) {
    check_lattice(state, lp);
    Environments env(state);
    auto occ = occupations(env, state.n_sites(), state.n_max(), env.norm2().real());
    for (double& v : occ) v /= lp.dx;
    return occ;
}

int anchor_site(const std::vector<double>& density) {
    if (density.empty()) throw std::invalid_argument("empty density profile");
    return static_cast<int>(std::max_element(density.begin(), density.end()) - density.begin());
}

CorrelationRow g2_row(const SymmetricMPS& state, const LatticeParams& lp, std::optional<int> anchor) {
    check_lattice(state, lp);
    Environments env(state);
    double norm2 = env.norm2().real();
    auto occ = occupations(env, state.n_sites(), state.n_max(), norm2);
    int a = anchor.value_or(anchor_site(occ));
    if (a < 0 || a >= state.n_sites()) throw std::out_of_range("anchor site out of range");
    return row_from(env, state, lp, occ, a, norm2);
}

double g2_local(const SymmetricMPS& state, const LatticeParams& lp, int site) {
    check_lattice(state, lp);
    double n = expectation_onsite(state, site, local_ops::number(state.n_max())).real();
    double p = expectation_onsite(state, site, local_ops::pair(state.n_max())).real();
    return guarded(p, n * n);
}

double g3_local(const SymmetricMPS& state, const LatticeParams& lp, int site) {
    check_lattice(state, lp);
    if (state.n_max() < 3) throw std::invalid_argument("g3 needs n_max >= 3: the cutoff cannot resolve triples");
    double n = expectation_onsite(state, site, local_ops::number(state.n_max())).real();
    double t = expectation_onsite(state, site, local_ops::triple(state.n_max())).real();
    return guarded(t, n * n * n);
}

double sum_rule(const CorrelationRow& row, const std::vector<double>& density, double dx) {
    if (row.g2.size() != density.size()) throw std::invalid_argument("row and density on different grids");
    double s = 0.0;
    for (std::size_t j = 0; j < density.size(); ++j)
        if (!std::isnan(row.g2[j])) s += dx * density[j] * row.g2[j];
    return s;
}

double fit_power_law(const std::vector<double>& times, const std::vector<double>& values,
                     std::pair<double, double> window) {
    if (times.size() != values.size()) throw std::invalid_argument("times and values differ in length");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        double t = times[k];
        if (t < window.first || t > window.second) continue;
        if (!(t > 0.0) || !(values[k] > 0.0))
            throw std::invalid_argument("power-law fit needs positive samples; got " + std::to_string(values[k]) +
                                        " at t = " + std::to_string(t));
        double x = std::log(t), y = std::log(values[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("power-law window holds fewer than two samples");
    double den = n * sxx - sx * sx;
    if (den <= 0.0) throw std::invalid_argument("degenerate power-law window");
    return (n * sxy - sx * sy) / den;
}

double fit_power_law(const LocalSeries& series, std::pair<double, double> window) {
    return fit_power_law(series.times, series.g2_local, window);
}

double dominant_frequency(const std::vector<double>& times, const std::vector<double>& values, double w_lo,
                          double w_hi) {
    if (times.size() != values.size() || times.size() < 4) throw std::invalid_argument("need >= 4 samples");
    if (!(w_hi > w_lo && w_lo >= 0.0)) throw std::invalid_argument("invalid frequency window");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    auto power = [&](double w) {
        std::complex<double> s = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k)
            s += (values[k] - mean) * std::exp(std::complex<double>(0.0, -w * times[k]));
        return std::abs(s);
    };
    double span = times.back() - times.front();
    if (!(span > 0.0)) throw std::invalid_argument("times must span a positive interval");
    // Resolution 2 pi / span, oversampled 16x.
    double step = 2.0 * M_PI / span / 16.0;
    int n = std::max(64, static_cast<int>(std::ceil((w_hi - w_lo) / step)));
    step = (w_hi - w_lo) / n;
    double best_w = w_lo, best_p = -1.0;
    for (int k = 0; k <= n; ++k) {
        double w = w_lo + k * step;
        double p = power(w);
        if (p > best_p) {
            best_p = p;
            best_w = w;
        }
    }
    double a = std::max(w_lo, best_w - step), b = std::min(w_hi, best_w + step);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double pc = power(c), pd = power(d);
    for (int it = 0; it < 80 && (b - a) > 1e-12 * std::max(1.0, std::abs(best_w)); ++it) {
        if (pc > pd) {
            b = d;
            d = c;
            pd = pc;
            c = b - r * (b - a);
            pc = power(c);
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + r * (b - a);
            pd = power(d);
        }
    }
    double w = 0.5 * (a + b);
    return power(w) >= best_p ? w : best_w;
}

Snapshot measure(const SymmetricMPS& state, const LatticeParams& lp, std::optional<int> anchor, double time) {
    check_lattice(state, lp);
    Environments env(state);
    double norm2 = env.norm2().real();
    auto occ = occupations(env, state.n_sites(), state.n_max(), norm2);
    int a = anchor.value_or(anchor_site(occ));
    if (a < 0 || a >= state.n_sites()) throw std::out_of_range("anchor site out of range");
    Snapshot s;
    s.row = row_from(env, state, lp, occ, a, norm2);
    s.row.time = time;
    s.g2_local = s.row.g2[a];
    if (state.n_max() >= 3)
        s.g3_local = guarded(env.onsite(a, local_ops::triple(state.n_max())).real() / norm2, occ[a] * occ[a] * occ[a]);
    s.density.resize(occ.size());
    for (std::size_t i = 0; i < occ.size(); ++i) s.density[i] = occ[i] / lp.dx;
    s.sum_rule = sum_rule(s.row, s.density, lp.dx);
    return s;
}

}  // namespace llq
