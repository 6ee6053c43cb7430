#include "llq/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "llq/bethe2.hpp"
#include "llq/ed.hpp"
#include "llq/error.hpp"
#include "llq/experiment.hpp"
#include "llq/observables.hpp"
#include "llq/tebd.hpp"

namespace llq::validation {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

Check relative(const std::string& name, double value, double target, double tol) {
    double rel = std::abs(value / target - 1.0);
    return {name, rel < tol, rel, tol, "value " + fmt(value) + ", target " + fmt(target)};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        double a = std::log(x[k]), b = std::log(y[k]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

nlohmann::json Check::to_json() const {
    return {{"name", name}, {"passed", passed}, {"measured", measured}, {"tolerance", tolerance}, {"detail", detail}};
}

bool all_passed(const std::vector<Check>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<Check> bethe_asymptotics() {
    std::vector<Check> out;
    for (double g : {-20.0, -50.0, -100.0})
        out.push_back(relative("bound root dtilde at gamma=" + fmt(g), bethe2::solve_bound_root(g).dtilde(), -2.0 * g,
                               0.01));
    {
        auto s = bethe2::make_state(bethe2::solve_bound_root(-100.0));
        out.push_back(relative("bound g2 at gamma=-100", bethe2::g2_of_state(s.contact_amp), 50.0, 0.02));
    }
    {
        double d = bethe2::solve_gas_root(-100.0, 0).delta.real();
        out.push_back(relative("gas branch 0 delta at gamma=-100", d, 2.0 * kPi * (1.0 - 2.0 / -100.0), 1e-3));
    }
    {
        double g = -200.0;
        double e = std::abs(bethe2::overlap_tg_bound(g));
        out.push_back(relative("|eps| |gamma|^1.5 at gamma=-200", e * std::pow(-g, 1.5), 2.0 * std::sqrt(2.0) * kPi,
                               0.05));
    }
    return out;
}

std::vector<Check> spectrum_endpoints() {
    std::vector<Check> out;
    {
        double ep = bethe2::solve_gas_root(1e4, 0).energy;
        double em = bethe2::solve_gas_root(-1e4, 0).energy;
        double diff = std::abs(ep - em);
        out.push_back({"branch 0 continuity at |gamma|=1e4", diff < 1e-3 * kPi * kPi, diff, 1e-3 * kPi * kPi,
                       "E(+1e4) = " + fmt(ep) + ", E(-1e4) = " + fmt(em)});
    }
    {
        double r = bethe2::solve_bound_root(-1e4).energy / -1e8;
        out.push_back({"bound energy / -gamma^2 at gamma=-1e4", r >= 0.99 && r <= 1.01, r, 0.01, "window [0.99, 1.01]"});
    }
    {
        // Ground state: gas branch 0 above zero coupling, bound state below.
        double ep = bethe2::solve_gas_root(1e-4, 0).energy;
        double em = bethe2::solve_bound_root(-1e-4).energy;
        double worst = std::max(std::abs(ep), std::abs(em));
        out.push_back({"ground energy at |gamma|=1e-4", worst < 1e-6, worst, 1e-6,
                       "E(+1e-4) = " + fmt(ep) + ", E(-1e-4) = " + fmt(em)});
    }
    return out;
}

Check weak_coupling_ground_energy() {
    const double g = 1e-4;
    double ep = bethe2::solve_gas_root(g, 0).energy;
    double em = bethe2::solve_bound_root(-g).energy;
    double worst = std::max(std::abs(ep / (2.0 * g) - 1.0), std::abs(em / (-2.0 * g) - 1.0));
    return {"ground energy vs 2 gamma at |gamma|=1e-4", worst < 1e-3, worst, 1e-3,
            "E(+1e-4) = " + fmt(ep) + ", E(-1e-4) = " + fmt(em)};
}

std::vector<Check> exact_beating(double gamma) {
    std::vector<Check> out;
    const double w0 = gamma * gamma + kPi * kPi;
    const double t_end = 20.0 * 2.0 * kPi / w0;
    const int n = 8001;
    std::vector<double> times(n);
    for (int k = 0; k < n; ++k) times[k] = t_end * k / (n - 1);
    auto g2 = bethe2::g2_exact_quench(gamma, times);

    double w = dominant_frequency(times, g2, 0.1 * w0, 5.0 * w0);
    out.push_back(relative("dominant frequency vs gamma^2+pi^2", w, w0, 0.01));

    double dev7 = 0.0, dev8 = 0.0;
    for (int k = 0; k < n; ++k) {
        if (times[k] <= 1.0 / (gamma * gamma)) continue;
        dev7 = std::max(dev7, std::abs(bethe2::g2_single_mode(gamma, times[k]) - g2[k]));
        dev8 = std::max(dev8, std::abs(bethe2::g2_two_state(gamma, times[k]) - g2[k]));
    }
    out.push_back({"two-state beats single-mode for t > 1/gamma^2", dev8 < dev7, dev8, dev7,
                   "max deviation two-state " + fmt(dev8) + ", single-mode " + fmt(dev7)});
    out.push_back({"g2(0) exactly zero", g2[0] == 0.0, g2[0], 0.0, ""});
    return out;
}

// ---------------------------------------------------------------------------

namespace {

LatticeParams six_site_chain() {
    LatticeParams lp;
    lp.n_sites = 6;
    lp.dx = 1.0;
    lp.hopping = 1.0;
    lp.onsite_u = -2.5;
    lp.n_max = 2;
    lp.potential.resize(6);
    for (int i = 0; i < 6; ++i) lp.potential[i] = 0.3 * (i - 2.5) * (i - 2.5);
    return lp;
}

}  // namespace

TrotterOrder trotter_order(double dt0, int levels, double t_final) {
    if (!(dt0 > 0.0) || levels < 2) throw ConfigError("trotter_order needs dt0 > 0 and >= 2 levels");
    // at least 8 steps at the coarsest level, otherwise the levels collapse
    t_final = std::max(t_final, 8.0 * dt0);
    LatticeParams lp = six_site_chain();
    const std::vector<int> occ{0, 1, 0, 0, 1, 0};
    ed::FockBasis basis(lp.n_sites, 2, lp.n_max);
    auto h = ed::build_hamiltonian(lp, basis);
    ed::Propagator exact(h);
    ed::Vector reference = exact.evolve(ed::fock_state(basis, occ), t_final);

    TruncationPolicy policy{10000, 0.0};
    TrotterOrder r;
    for (int l = 0; l < levels; ++l) {
        double dt = dt0 / std::pow(2.0, l);
        int steps = std::max(1, static_cast<int>(std::lround(t_final / dt)));
        TebdPropagator prop(lp, t_final / steps);
        SymmetricMPS s = init_fock(occ, lp.n_max);
        for (int k = 0; k < steps; ++k) prop.step(s, policy);
        ed::Vector psi = ed::to_dense(s, basis);
        // Global phases agree: both evolutions use the same Hamiltonian.
        r.dts.push_back(t_final / steps);
        r.errors.push_back((psi - reference).norm());
    }
    r.slope = loglog_slope(r.dts, r.errors);
    for (std::size_t k = 1; k < r.dts.size(); ++k)
        r.local_slopes.push_back(std::log(r.errors[k - 1] / r.errors[k]) / std::log(r.dts[k - 1] / r.dts[k]));
    return r;
}

Check trotter_order_check(const TrotterOrder& r, double target, double tol) {
    std::string detail = "errors";
    for (std::size_t k = 0; k < r.dts.size(); ++k) detail += " dt=" + fmt(r.dts[k]) + ":" + fmt(r.errors[k]);
    bool ok = std::abs(r.slope - target) <= tol;
    detail += "; pairwise slopes";
    for (double p : r.local_slopes) {
        ok = ok && std::abs(p - target) <= tol;
        detail += " " + fmt(p);
    }
    return {"Trotter global-error slope", ok, r.slope, tol, "target " + fmt(target) + "; " + detail};
}

EdComparison tebd_vs_ed(const TruncationPolicy& policy, double dt_j, int n_sites, int n_particles, double gamma) {
    if (!(dt_j > 0.0)) throw ConfigError("dt must be positive");
    EdComparison r;
    r.n_sites = n_sites;
    r.n_particles = n_particles;
    r.gamma = gamma;

    ContinuumParams cp;
    cp.n_particles = n_particles;
    cp.omega = 0.0;
    cp.box_length = 1.0;
    cp.rho = n_particles / cp.box_length;
    auto pq = experiment::prepare_quench(cp, n_sites, 4, gamma, policy, experiment::Preparation::Exact);
    const LatticeParams& lp = pq.final;

    // Independent initial state: ED ground state of the hardcore chain,
    // embedded into the full cutoff.
    LatticeParams hard = pq.initial;
    hard.n_max = 1;
    ed::FockBasis hb(n_sites, n_particles, 1);
    ed::FockBasis basis(n_sites, n_particles, lp.n_max);
    r.basis_dim = basis.size();
    auto gs = ed::ground_state(ed::build_hamiltonian(hard, hb), 1e-12);
    ed::Vector psi = ed::embed(gs.state, hb, basis);
    psi.normalize();
    r.initial_overlap = std::abs(psi.dot(ed::to_dense(pq.state, basis)));

    auto h = ed::build_hamiltonian(lp, basis);
    ed::Propagator prop(h);
    const double e0 = ed::expectation(h, psi);

    // One beat period of the lattice pair.
    const double eb = lp.lattice_binding_energy();
    if (!(eb > 0.0)) throw ConfigError("the ED comparison needs an attractive quench");
    const double t_phys = 2.0 * kPi / eb;
    const double dt = dt_j / lp.hopping;
    r.steps = static_cast<int>(std::ceil(t_phys / dt));
    r.period = t_phys / pq.time_unit;

    EvolutionConfig ec;
    ec.dt = dt;
    ec.n_steps = r.steps;
    ec.policy = policy;
    ec.time_unit = pq.time_unit;
    ec.abort_truncation = 1.0;
    const int a = pq.anchor;
    ed::Vector cur = psi;
    int k = 0;
    SymmetricMPS state = pq.state;
    auto traj = evolve_real(state, lp, ec, [&](double, const SymmetricMPS& s, const Trajectory&) {
        if (k > 0) cur = prop.evolve(cur, dt);
        ++k;
        double n = ed::expectation(basis, cur, {ed::OpKind::Density, a});
        double p = ed::expectation(basis, cur, {ed::OpKind::Pair, a});
        double g2_ed = p / (n * n);
        double g2_mps = g2_local(s, lp, a);
        r.max_g2_dev = std::max(r.max_g2_dev, std::abs(g2_ed - g2_mps));
    });
    for (std::size_t i = 0; i < traj.time.size(); ++i) {
        r.max_norm_loss = std::max(r.max_norm_loss, traj.norm_loss[i]);
        r.max_number_dev = std::max(r.max_number_dev, std::abs(traj.particle_number[i] - n_particles));
        r.energy_drift = std::max(r.energy_drift, std::abs(traj.energy[i] - e0) / std::abs(e0));
        r.truncation_weight += traj.truncation_weight[i];
    }
    return r;
}

std::vector<Check> ed_checks(const EdComparison& r) {
    std::string where = "N=" + std::to_string(r.n_particles) + ", M=" + std::to_string(r.n_sites) +
                        ", basis " + std::to_string(r.basis_dim) + ", " + std::to_string(r.steps) + " steps";
    return {
        {"g2_local max deviation from ED", r.max_g2_dev < 1e-3, r.max_g2_dev, 1e-3, where},
        {"norm conservation", r.max_norm_loss < 1e-10, r.max_norm_loss, 1e-10, "max |1 - norm| before renormalization"},
        {"particle number conservation", r.max_number_dev < 1e-10, r.max_number_dev, 1e-10, ""},
        {"energy drift", r.energy_drift < 1e-4, r.energy_drift, 1e-4, "relative to the ED initial energy"},
        {"truncation weight", r.truncation_weight < 1e-8, r.truncation_weight, 1e-8, "summed over the run"},
    };
}

// ---------------------------------------------------------------------------
// Randomized properties

namespace {

struct RandomInstance {
    LatticeParams lp;
    std::vector<int> occ;
    int n_particles = 0;
};

RandomInstance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> sites(3, 8), nmax(2, 3);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    RandomInstance in;
    int m = sites(rng);
    in.lp.n_sites = m;
    in.lp.n_max = nmax(rng);
    in.lp.dx = 1.0;
    in.lp.hopping = 0.5 + u01(rng);
    in.lp.onsite_u = -2.0 + 4.0 * u01(rng);
    in.lp.potential.resize(m);
    for (double& v : in.lp.potential) v = u01(rng) - 0.5;
    std::uniform_int_distribution<int> np(1, std::min(4, m));
    in.n_particles = np(rng);
    in.occ.assign(m, 0);
    std::uniform_int_distribution<int> pick(0, m - 1);
    for (int p = 0; p < in.n_particles;) {
        int i = pick(rng);
        if (in.occ[i] < in.lp.n_max) {
            ++in.occ[i];
            ++p;
        }
    }
    return in;
}

// Random gate sequence: bonds and imaginary/real steps drawn from rng.
struct GateOp {
    int bond;
    std::complex<double> tau;
};

std::vector<GateOp> random_gates(std::mt19937_64& rng, int m, int count) {
    std::uniform_int_distribution<int> bond(0, m - 2);
    std::uniform_real_distribution<double> t(0.2, 1.0);
    std::vector<GateOp> ops;
    for (int k = 0; k < count; ++k) ops.push_back({bond(rng), {t(rng), 0.0}});
    return ops;
}

Check summarize(const std::string& name, int cases, int failures, double worst, double tol, const std::string& first) {
    return {name, failures == 0, worst, tol,
            std::to_string(cases) + " cases, " + std::to_string(failures) + " failures" +
                (first.empty() ? "" : "; first: " + first)};
}

}  // namespace

Check canonical_form_property(int cases, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    int failures = 0;
    double worst = 0.0;
    std::string first;
    for (int c = 0; c < cases; ++c) {
        auto in = random_instance(rng);
        SymmetricMPS s = init_fock(in.occ, in.lp.n_max);
        TruncationPolicy policy{10000, 0.0};
        for (const auto& g : random_gates(rng, in.lp.n_sites, 12))
            apply_two_site(s, g.bond, build_bond_gate(in.lp, g.bond, g.tau), policy);
        int center = std::uniform_int_distribution<int>(0, in.lp.n_sites - 1)(rng);
        s.canonicalize(center);
        double err = 0.0;
        for (int i = 0; i < center; ++i) err = std::max(err, s.left_orthogonality_error(i));
        for (int i = center + 1; i < in.lp.n_sites; ++i) err = std::max(err, s.right_orthogonality_error(i));
        worst = std::max(worst, err);
        if (!(err < 1e-12)) {
            ++failures;
            if (first.empty()) first = "case " + std::to_string(c) + " error " + fmt(err);
        }
    }
    return summarize("canonical form", cases, failures, worst, 1e-12, first);
}

Check charge_conservation_property(int cases, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    int failures = 0;
    double worst = 0.0;
    std::string first;
    for (int c = 0; c < cases; ++c) {
        auto in = random_instance(rng);
        SymmetricMPS s = init_fock(in.occ, in.lp.n_max);
        std::uniform_int_distribution<int> chi(1, 6);
        TruncationPolicy policy{chi(rng), 1e-10};
        double dev = 0.0;
        std::string why;
        try {
            for (const auto& g : random_gates(rng, in.lp.n_sites, 12)) {
                apply_two_site(s, g.bond, build_bond_gate(in.lp, g.bond, g.tau), policy);
                s.check_structure();
                if (s.total_charge() != in.n_particles) why = "total charge changed";
            }
            Environments env(s);
            double n = 0.0;
            for (int i = 0; i < in.lp.n_sites; ++i) n += env.onsite(i, local_ops::number(in.lp.n_max)).real();
            dev = std::abs(n / env.norm2().real() - in.n_particles);
        } catch (const std::exception& e) {
            why = e.what();
        }
        worst = std::max(worst, dev);
        if (!why.empty() || !(dev < 1e-10)) {
            ++failures;
            if (first.empty()) first = "case " + std::to_string(c) + ": " + (why.empty() ? "<N> off by " + fmt(dev) : why);
        }
    }
    return summarize("charge conservation", cases, failures, worst, 1e-10, first);
}

Check truncation_monotonicity_property(int cases, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    int failures = 0;
    double worst = 0.0;  // largest increase of the weight with chi
    std::string first;
    const std::vector<int> chis{1, 2, 3, 4, 6, 8, 10000};
    for (int c = 0; c < cases; ++c) {
        auto in = random_instance(rng);
        auto gates = random_gates(rng, in.lp.n_sites, 10);
        std::vector<TwoSiteGate> built;
        for (const auto& g : gates) built.push_back(build_bond_gate(in.lp, g.bond, g.tau));
        double prev = INFINITY;
        for (int chi : chis) {
            SymmetricMPS s = init_fock(in.occ, in.lp.n_max);
            TruncationPolicy policy{chi, 1e-10};
            double w = 0.0;
            for (std::size_t k = 0; k < gates.size(); ++k)
                w += apply_two_site(s, gates[k].bond, built[k], policy).truncation_weight;
            double inc = w - prev;
            if (std::isfinite(inc)) worst = std::max(worst, inc);
            if (inc > 1e-14) {
                ++failures;
                if (first.empty())
                    first = "case " + std::to_string(c) + " chi=" + std::to_string(chi) + " weight " + fmt(w) +
                            " > " + fmt(prev);
                break;
            }
            prev = w;
        }
    }
    return summarize("truncation monotonicity", cases, failures, worst, 1e-14, first);
}

Check reversibility_property(int cases, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dts(0.05, 0.3);
    std::uniform_int_distribution<int> nsteps(1, 5);
    int failures = 0;
    double worst = 0.0;
    std::string first;
    for (int c = 0; c < cases; ++c) {
        auto in = random_instance(rng);
        TruncationPolicy policy{10000, 0.0};
        SymmetricMPS s = init_fock(in.occ, in.lp.n_max);
        // Entangle first so the check is not on a product state.
        for (const auto& g : random_gates(rng, in.lp.n_sites, 6))
            apply_two_site(s, g.bond, build_bond_gate(in.lp, g.bond, g.tau), policy);
        SymmetricMPS start = s;
        double dt = dts(rng) / in.lp.hopping;
        int n = nsteps(rng);
        TebdPropagator fwd(in.lp, dt), bwd(in.lp, -dt);
        for (int k = 0; k < n; ++k) fwd.step(s, policy);
        for (int k = 0; k < n; ++k) bwd.step(s, policy);
        double loss = 1.0 - std::abs(overlap(start, s));
        worst = std::max(worst, loss);
        if (!(loss < 1e-8)) {
            ++failures;
            if (first.empty()) first = "case " + std::to_string(c) + " 1-fidelity " + fmt(loss);
        }
    }
    return summarize("reversibility", cases, failures, worst, 1e-8, first);
}

}  // namespace llq::validation
