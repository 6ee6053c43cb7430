#include "llq/bethe2.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "llq/error.hpp"

namespace llq::bethe2 {

namespace {

constexpr double kPi = M_PI;

// Safeguarded Newton iteration on a bracket with a sign change: Newton steps
// are accepted only when they stay inside the current bracket and shrink it
// reasonably, otherwise bisect.
double newton_bisect(const std::function<double(double)>& f, const std::function<double(double)>& df, double lo,
                     double hi) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw NumericalError("root bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] has no sign change");
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
        double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0) == (flo > 0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return x;
        double d = df(x);
        double xn = d != 0.0 ? x - fx / d : lo - 1.0;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

void require_finite(double gamma) {
    if (!std::isfinite(gamma)) throw ConfigError("gamma must be finite");
}

// sin(e/2) / (e (2 pi - e)) * 2 pi, the overlap kernel at k = pi - e.
double tg_kernel_near_pi(double e) {
    double s = std::abs(e) < 1e-4 ? 0.5 * (1.0 - e * e / 24.0) : std::sin(0.5 * e) / e;
    return 2.0 * kPi * s / (2.0 * kPi - e);
}

}  // namespace

double BetheRoot::residual() const {
    if (analytic) return std::numeric_limits<double>::quiet_NaN();
    if (bound()) {
        double d = dtilde();
        double coth = 1.0 / std::tanh(0.25 * d);
        return std::abs(d / (2.0 * gamma) + coth) / std::max(1.0, coth);
    }
    double x = delta.real();
    double cot = std::cos(0.25 * x) / std::sin(0.25 * x);
    return std::abs(x / (2.0 * gamma) - cot) / std::max(1.0, std::abs(cot));
}

BetheRoot solve_bound_root(double gamma) {
    require_finite(gamma);
    if (!(gamma < 0.0)) throw ConfigError("a bound pair exists only for gamma < 0");
    auto f = [gamma](double d) { return d * std::tanh(0.25 * d) + 2.0 * gamma; };
    auto df = [](double d) {
        double t = std::tanh(0.25 * d);
        return t + 0.25 * d * (1.0 - t * t);
    };
    // f is increasing on d > 0 with f(0) = 2 gamma < 0; since tanh < 1 the
    // root exceeds -2 gamma.
    double hi = -2.0 * gamma + 1.0;
    while (f(hi) <= 0.0) hi *= 2.0;
    double d = newton_bisect(f, df, 0.0, hi);
    BetheRoot r;
    r.delta = cplx(0.0, d);
    r.branch = kBoundBranch;
    r.energy = -0.25 * d * d;
    r.gamma = gamma;
    return r;
}

BetheRoot solve_gas_root(double gamma, int branch) {
    require_finite(gamma);
    if (branch < 0) throw ConfigError("gas branch index must be >= 0");
    BetheRoot r;
    r.branch = branch;
    r.gamma = gamma;
    if (gamma == 0.0) {
        double d = 4.0 * kPi * branch;
        r.delta = d;
        r.energy = 0.25 * d * d;
        r.analytic = true;
        return r;
    }
    // delta sin(delta/4) - 2 gamma cos(delta/4) = 0, free of poles.
    auto f = [gamma](double x) { return x * std::sin(0.25 * x) - 2.0 * gamma * std::cos(0.25 * x); };
    auto df = [gamma](double x) {
        return std::sin(0.25 * x) + 0.25 * x * std::cos(0.25 * x) + 0.5 * gamma * std::sin(0.25 * x);
    };
    double lo, hi;
    if (gamma > 0.0) {
        lo = 4.0 * kPi * branch;
        hi = 2.0 * kPi * (2 * branch + 1);
    } else {
        lo = 2.0 * kPi * (2 * branch + 1);
        hi = 4.0 * kPi * (branch + 1);
    }
    double x = newton_bisect(f, df, lo, hi);
    r.delta = x;
    r.energy = 0.25 * x * x;
    return r;
}

std::vector<BetheRoot> solve_gas_roots(double gamma, int n_branches) {
    if (n_branches < 1) throw ConfigError("n_branches must be >= 1");
    std::vector<BetheRoot> out;
    out.reserve(n_branches);
    for (int k = 0; k < n_branches; ++k) out.push_back(solve_gas_root(gamma, k));
    return out;
}

double normalization(const BetheRoot& root) {
    if (root.bound()) {
        double d = root.dtilde();
        return 1.0 / std::sqrt(2.0 * (-std::expm1(-d)) / d + 2.0 * std::exp(-0.5 * d));
    }
    double x = root.delta.real();
    double s = x == 0.0 ? 0.5 : std::sin(0.5 * x) / x;
    return 1.0 / (2.0 * std::sqrt(0.5 + s));
}

cplx contact_amplitude(const BetheRoot& root, double norm_a) {
    if (root.bound()) return norm_a * (1.0 + std::exp(-0.5 * root.dtilde()));
    double x = root.delta.real();
    return 2.0 * norm_a * std::exp(cplx(0.0, 0.25 * x)) * std::cos(0.25 * x);
}

TwoParticleState make_state(const BetheRoot& root) {
    TwoParticleState s;
    s.root = root;
    s.norm_a = normalization(root);
    s.contact_amp = contact_amplitude(root, s.norm_a);
    return s;
}

cplx TwoParticleState::operator()(double y) const {
    if (root.bound()) {
        double d = root.dtilde();
        return norm_a * (std::exp(0.5 * d * (y - 1.0)) + std::exp(-0.5 * d * y));
    }
    double x = root.delta.real();
    return 2.0 * norm_a * std::exp(cplx(0.0, 0.25 * x)) * std::cos(0.5 * x * (y - 0.5));
}

double g2_of_state(cplx contact_amp) { return 0.5 * std::norm(contact_amp); }

cplx overlap_tg(const BetheRoot& root) {
    const double a = normalization(root);
    const cplx pre(0.0, -std::sqrt(2.0));  // conj(i sqrt 2)
    if (root.bound()) {
        double d = root.dtilde();
        return pre * a * (1.0 + std::exp(-0.5 * d)) * 2.0 * kPi / (kPi * kPi + 0.25 * d * d);
    }
    // int_0^1 sin(pi y) cos(k (y - 1/2)) dy = 2 pi cos(k/2) / (pi^2 - k^2)
    double k = 0.5 * root.delta.real();
    double kernel = std::abs(kPi - k) < 1e-3 ? tg_kernel_near_pi(kPi - k)
                                             : 2.0 * kPi * std::cos(0.5 * k) / (kPi * kPi - k * k);
    return pre * 2.0 * a * std::exp(cplx(0.0, 0.5 * k)) * kernel;
}

cplx overlap_tg_bound(double gamma) { return overlap_tg(solve_bound_root(gamma)); }

cplx QuenchExpansion::contact_at(double t) const {
    cplx s = 0.0;
    for (std::size_t n = 0; n < energies.size(); ++n) {
        // e^{-iEt} - 1 = -2 i sin(Et/2) e^{-iEt/2}, accurate for small E t
        double h = 0.5 * energies[n] * t;
        cplx f = cplx(0.0, -2.0 * std::sin(h)) * std::exp(cplx(0.0, -h));
        s += coeffs[n] * contacts[n] * f;
    }
    return s;
}

QuenchExpansion expand_tg(double gamma, int n_branches) {
    if (!(gamma < 0.0)) throw ConfigError("the quench expansion needs gamma < 0");
    if (n_branches < 1) throw ConfigError("n_branches must be >= 1");
    QuenchExpansion q;
    q.gamma = gamma;
    auto add = [&q](const BetheRoot& r) {
        TwoParticleState s = make_state(r);
        cplx c = std::conj(overlap_tg(r));
        q.energies.push_back(r.energy);
        q.coeffs.push_back(c);
        q.contacts.push_back(s.contact_amp);
    };
    add(solve_bound_root(gamma));
    for (int k = 0; k < n_branches; ++k) add(solve_gas_root(gamma, k));
    // Sum the small tail first.
    for (std::size_t n = q.coeffs.size(); n-- > 0;) q.completeness += std::norm(q.coeffs[n]);
    return q;
}

std::vector<double> g2_exact_quench(double gamma, const std::vector<double>& times, int n_branches,
                                    double min_completeness) {
    QuenchExpansion q = expand_tg(gamma, n_branches);
    if (q.completeness < min_completeness)
        throw NumericalError("quench expansion completeness " + std::to_string(q.completeness) + " below " +
                             std::to_string(min_completeness) + " with " + std::to_string(n_branches) + " branches");
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(g2_of_state(q.contact_at(t)));
    return out;
}

double g2_single_mode(double gamma, double t) {
    double g2 = gamma * gamma;
    return 8.0 * kPi * kPi / g2 * (1.0 - std::cos(g2 * t));
}

double g2_two_state(double gamma, double t) {
    double g2 = gamma * gamma;
    return (5.0 - 4.0 * std::cos((g2 + kPi * kPi) * t)) * kPi * kPi / g2;
}

double binding_energy(double gamma) { return -solve_bound_root(gamma).energy; }

std::vector<SpectrumPoint> spectrum(const std::vector<double>& gammas, int n_branches) {
    if (n_branches < 1) throw ConfigError("n_branches must be >= 1");
    std::vector<SpectrumPoint> out;
    out.reserve(gammas.size());
    for (double g : gammas) {
        require_finite(g);
        SpectrumPoint p;
        p.gamma = g;
        p.inv_gamma = g == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / g;
        if (g < 0.0) p.bound_energy = solve_bound_root(g).energy;
        for (const auto& r : solve_gas_roots(g, n_branches)) p.gas_energies.push_back(r.energy);
        out.push_back(std::move(p));
    }
    return out;
}

HsReference hs_reference(const CorrelationRow& g2_t0, double a_1d, double rho) {
    if (!(a_1d >= 0.0)) throw ConfigError("a_1d must be non-negative");
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    if (a_1d * rho >= 1.0) throw ConfigError("a_1d * rho must be below 1");
    HsReference ref;
    ref.row = g2_t0;
    const double scale = 1.0 - a_1d * rho;
    ref.valid.resize(g2_t0.xs.size());
    for (std::size_t j = 0; j < g2_t0.xs.size(); ++j) {
        double x = g2_t0.xs[j];
        double shifted = x < 0.0 ? x - a_1d : x + a_1d;
        ref.row.xs[j] = shifted;
        ref.row.g2[j] = g2_t0.g2[j] * scale;
        ref.valid[j] = std::abs(shifted) <= 1.0 / rho;
    }
    return ref;
}

double norm_by_quadrature(const TwoParticleState& s) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&s](double y) { return std::norm(s(y)); };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 20, 1e-14);
}

cplx overlap_by_quadrature(const TwoParticleState& a, const TwoParticleState& b) {
    using boost::math::quadrature::gauss_kronrod;
    auto re = [&](double y) { return (std::conj(a(y)) * b(y)).real(); };
    auto im = [&](double y) { return (std::conj(a(y)) * b(y)).imag(); };
    return {gauss_kronrod<double, 61>::integrate(re, 0.0, 1.0, 20, 1e-14),
            gauss_kronrod<double, 61>::integrate(im, 0.0, 1.0, 20, 1e-14)};
}

}  // namespace llq::bethe2
