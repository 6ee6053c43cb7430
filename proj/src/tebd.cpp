#include "llq/tebd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "llq/error.hpp"

namespace llq {

double suzuki_coefficient() { return 1.0 / (4.0 - std::cbrt(4.0)); }

void TrotterScheme::validate() const {
    if (order != 2 && order != 4) throw ConfigError("Trotter order must be 2 or 4");
}

std::vector<TrotterSubstep> TrotterScheme::substeps() const {
    validate();
    // Strang step S2(a) = Even(a/2) Odd(a) Even(a/2).
    std::vector<double> strang;
    if (order == 2) {
        strang = {1.0};
    } else {
        double s = suzuki_coefficient();
        strang = {s, s, 1.0 - 4.0 * s, s, s};
    }
    std::vector<TrotterSubstep> out;
    auto push = [&out](Layer layer, double f) {
        if (!out.empty() && out.back().layer == layer)
            out.back().fraction += f;
        else
            out.push_back({layer, f});
    };
    for (double a : strang) {
        push(Layer::Even, 0.5 * a);
        push(Layer::Odd, a);
        push(Layer::Even, 0.5 * a);
    }
    return out;
}

std::vector<std::pair<Layer, double>> fourth_order_steps(double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    std::vector<std::pair<Layer, double>> out;
    for (const auto& s : TrotterScheme{4}.substeps()) out.emplace_back(s.layer, s.fraction * dt);
    return out;
}

RealMatrix bond_hamiltonian(const LatticeParams& lp, int bond) {
    if (bond < 0 || bond + 1 >= lp.n_sites) throw std::out_of_range("bond index out of range");
    const int nmax = lp.n_max;
    const int d = nmax + 1;
    RealMatrix h = RealMatrix::Zero(d * d, d * d);
    auto weight = [&](int site) { return (site == 0 || site == lp.n_sites - 1) ? 1.0 : 0.5; };
    const double wl = weight(bond), wr = weight(bond + 1);
    const double vl = lp.potential.at(bond), vr = lp.potential.at(bond + 1);
    for (int n1 = 0; n1 <= nmax; ++n1)
        for (int n2 = 0; n2 <= nmax; ++n2) {
            int idx = n1 * d + n2;
            h(idx, idx) = wl * (0.5 * lp.onsite_u * n1 * (n1 - 1) + vl * n1) +
                          wr * (0.5 * lp.onsite_u * n2 * (n2 - 1) + vr * n2);
            // b1^+ b2 |n1, n2> = sqrt((n1+1) n2) |n1+1, n2-1>
            if (n1 < nmax && n2 > 0) {
                int to = (n1 + 1) * d + (n2 - 1);
                double amp = -lp.hopping * std::sqrt(static_cast<double>((n1 + 1) * n2));
                h(to, idx) += amp;
                h(idx, to) += amp;
            }
        }
    return h;
}

TwoSiteGate build_bond_gate(const LatticeParams& lp, int bond, std::complex<double> tau) {
    if (!(std::abs(tau) > 0.0)) throw ConfigError("gate step must be nonzero");
    RealMatrix h = bond_hamiltonian(lp, bond);
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(h);
    const RealMatrix& q = eig.eigenvectors();
    Eigen::VectorXcd phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        phases[k] = std::exp(std::complex<double>(0.0, -1.0) * tau * eig.eigenvalues()[k]);
    Matrix qc = q.cast<cplx>();
    Matrix g = qc * phases.asDiagonal() * qc.adjoint();
    // Clean exact zeros between different particle-number sectors.
    const int d = lp.n_max + 1;
    for (int r = 0; r < d * d; ++r)
        for (int c = 0; c < d * d; ++c)
            if (r / d + r % d != c / d + c % d) g(r, c) = 0.0;
    return TwoSiteGate(std::move(g), lp.n_max);
}

namespace {

double energy_from(const Environments& env, const LatticeParams& lp, int n_max) {
    Matrix n = local_ops::number(n_max);
    Matrix pair = local_ops::pair(n_max);
    Matrix bd = local_ops::creation(n_max);
    Matrix b = local_ops::annihilation(n_max);
    double e = 0.0;
    for (int i = 0; i < lp.n_sites; ++i) {
        e += 0.5 * lp.onsite_u * env.onsite(i, pair).real();
        if (lp.potential[i] != 0.0) e += lp.potential[i] * env.onsite(i, n).real();
    }
    for (int i = 0; i + 1 < lp.n_sites; ++i) e -= 2.0 * lp.hopping * env.two_point(i, i + 1, bd, b).real();
    return e / env.norm2().real();
}

double particle_number(const Environments& env, int n_sites, int n_max) {
    Matrix n = local_ops::number(n_max);
    double total = 0.0;
    for (int i = 0; i < n_sites; ++i) total += env.onsite(i, n).real();
    return total / env.norm2().real();
}

double max_entropy(const SymmetricMPS& state) {
    double m = 0.0;
    bool complete = true;
    for (int b = 0; b + 1 < state.n_sites(); ++b) {
        const BondSpectrum* sp = state.cached_spectrum(b);
        if (!sp) {
            complete = false;
            break;
        }
        m = std::max(m, sp->entropy());
    }
    if (complete) return m;
    SymmetricMPS copy = state;
    m = 0.0;
    for (int b = 0; b + 1 < copy.n_sites(); ++b) m = std::max(m, entanglement_entropy(copy, b));
    return m;
}

}  // namespace

double energy(const SymmetricMPS& state, const LatticeParams& lp) {
    if (state.n_sites() != lp.n_sites) throw std::invalid_argument("energy: lattice and state sizes differ");
    LatticeParams local = lp;
    local.n_max = state.n_max();
    return energy_from(Environments(state), local, state.n_max());
}

// ---------------------------------------------------------------------------

TebdPropagator::TebdPropagator(const LatticeParams& lp, double dt, TrotterScheme scheme, bool imaginary)
    : lp_(lp), dt_(dt), imaginary_(imaginary) {
    if (dt == 0.0 || !std::isfinite(dt)) throw ConfigError("time step must be finite and nonzero");
    if (lp.n_sites < 2) throw ConfigError("TEBD needs at least two sites");
    std::map<std::pair<Layer, double>, std::size_t> index;
    for (const auto& sub : scheme.substeps()) {
        auto key = std::pair{sub.layer, sub.fraction};
        auto it = index.find(key);
        if (it == index.end()) {
            std::complex<double> tau = imaginary ? std::complex<double>(0.0, -sub.fraction * dt)
                                                 : std::complex<double>(sub.fraction * dt, 0.0);
            std::vector<TwoSiteGate> gates;
            int first = sub.layer == Layer::Even ? 0 : 1;
            for (int b = first; b + 1 < lp.n_sites; b += 2) gates.push_back(build_bond_gate(lp, b, tau));
            it = index.emplace(key, gate_sets_.size()).first;
            gate_sets_.push_back(std::move(gates));
        }
        sequence_.emplace_back(sub.layer, it->second);
    }
}

TebdPropagator::StepStats TebdPropagator::apply_layer(SymmetricMPS& state, Layer layer,
                                                      const std::vector<TwoSiteGate>& gates,
                                                      const TruncationPolicy& policy) {
    StepStats stats;
    if (gates.empty()) return stats;
    const int first = layer == Layer::Even ? 0 : 1;
    const int m = state.n_sites();
    const int center = state.ortho_center().value_or(0);
    const bool rightwards = center < m / 2;
    auto apply = [&](std::size_t k) {
        int bond = first + 2 * static_cast<int>(k);
        auto up = apply_two_site(state, bond, gates[k], policy, rightwards ? Sweep::Right : Sweep::Left);
        stats.truncation_weight += up.truncation_weight;
        stats.norm_loss = std::max(stats.norm_loss, std::abs(1.0 - up.norm));
    };
    if (rightwards)
        for (std::size_t k = 0; k < gates.size(); ++k) apply(k);
    else
        for (std::size_t k = gates.size(); k-- > 0;) apply(k);
    return stats;
}

TebdPropagator::StepStats TebdPropagator::step(SymmetricMPS& state, const TruncationPolicy& policy) {
    if (state.n_sites() != lp_.n_sites) throw std::invalid_argument("state and lattice sizes differ");
    if (state.n_max() != lp_.n_max) throw std::invalid_argument("state and lattice cutoffs differ");
    StepStats total;
    for (const auto& [layer, idx] : sequence_) {
        auto s = apply_layer(state, layer, gate_sets_[idx], policy);
        total.truncation_weight += s.truncation_weight;
        total.norm_loss = std::max(total.norm_loss, s.norm_loss);
    }
    return total;
}

// ---------------------------------------------------------------------------

void EvolutionConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (measure_every < 1) throw ConfigError("measure_every must be >= 1");
    if (!(time_unit > 0.0)) throw ConfigError("time_unit must be positive");
    policy.validate();
    scheme.validate();
}

Trajectory evolve_real(SymmetricMPS& state, const LatticeParams& lp, const EvolutionConfig& config,
                       const Observer& observer) {
    config.validate();
    TebdPropagator prop(lp, config.dt, config.scheme, false);
    Trajectory traj;
    double pending_trunc = 0.0, pending_norm = 0.0;
    auto record = [&](int step) {
        double t = step * config.dt / config.time_unit;
        traj.time.push_back(t);
        traj.truncation_weight.push_back(pending_trunc);
        traj.norm_loss.push_back(pending_norm);
        traj.max_entropy.push_back(max_entropy(state));
        if (config.track_energy) {
            Environments env(state);
            traj.energy.push_back(energy_from(env, lp, state.n_max()));
            traj.particle_number.push_back(particle_number(env, state.n_sites(), state.n_max()));
        }
        pending_trunc = 0.0;
        pending_norm = 0.0;
        if (observer) observer(t, state, traj);
    };
    record(0);
    for (int step = 1; step <= config.n_steps; ++step) {
        auto stats = prop.step(state, config.policy);
        if (stats.truncation_weight > config.abort_truncation) {
            double t = step * config.dt / config.time_unit;
            throw TruncationAbort("truncation weight " + std::to_string(stats.truncation_weight) +
                                      " exceeded the abort threshold at t = " + std::to_string(t) +
                                      " (bond dimension " + std::to_string(state.max_bond_dim()) + ")",
                                  stats.truncation_weight, t);
        }
        pending_trunc += stats.truncation_weight;
        pending_norm = std::max(pending_norm, stats.norm_loss);
        if (step % config.measure_every == 0 || step == config.n_steps) record(step);
    }
    return traj;
}

// ---------------------------------------------------------------------------

std::vector<int> spread_fock_seed(const LatticeParams& lp, int n_particles, double omega) {
    const int m = lp.n_sites;
    int lo = 0, hi = m;  // [lo, hi)
    if (omega > 0.0) {
        double r = tg_cloud_radius(n_particles, omega);
        lo = std::max(0, static_cast<int>(std::floor((0.5 * m * lp.dx - r) / lp.dx)));
        hi = std::min(m, static_cast<int>(std::ceil((0.5 * m * lp.dx + r) / lp.dx)));
    }
    if (hi - lo < n_particles) {
        lo = 0;
        hi = m;
    }
    if (hi - lo < n_particles) throw ConfigError("lattice too small for the requested particle number");
    std::vector<int> occ(m, 0);
    double spacing = static_cast<double>(hi - lo) / n_particles;
    for (int k = 0; k < n_particles; ++k) {
        int site = lo + static_cast<int>(std::floor((k + 0.5) * spacing));
        occ[std::min(site, m - 1)] += 1;
    }
    return occ;
}

GroundStateResult prepare_ground_state(const LatticeParams& lp, int n_particles, const GroundStateConfig& config,
                                       double omega) {
    if (n_particles < 1) throw ConfigError("n_particles must be >= 1");
    if (config.stages < 1 || config.max_steps < 1 || config.check_every < 1)
        throw ConfigError("ground-state schedule must have positive stages, steps and check interval");
    config.policy.validate();
    LatticeParams prep = lp;
    if (config.hardcore) prep.n_max = 1;
    if (n_particles > prep.n_sites * prep.n_max) throw ConfigError("too many particles for the lattice cutoff");

    GroundStateResult res;
    res.state = init_fock(spread_fock_seed(prep, n_particles, omega), prep.n_max);
    double dt = config.dt > 0.0 ? config.dt : 2.0 / prep.hopping;
    double e_prev = energy(res.state, prep);
    res.energy_history.push_back(e_prev);
    bool converged = false;
    for (int stage = 0; stage < config.stages; ++stage, dt /= 4.0) {
        TebdPropagator prop(prep, dt, config.scheme, true);
        converged = false;
        for (int step = 1; step <= config.max_steps; ++step) {
            prop.step(res.state, config.policy);
            ++res.steps;
            if (step % config.check_every != 0) continue;
            double e = energy(res.state, prep);
            res.energy_history.push_back(e);
            double change = std::abs(e - e_prev) / config.check_every;
            e_prev = e;
            if (change <= config.tolerance * std::max(1.0, std::abs(e))) {
                converged = true;
                break;
            }
        }
    }
    if (!converged)
        throw NumericalError("imaginary-time evolution did not converge within " + std::to_string(config.max_steps) +
                             " steps of the final stage");
    res.energy = e_prev;
    if (config.hardcore) res.state.raise_cutoff(lp.n_max);

    // Fermionization signature at the density maximum.
    Environments env(res.state);
    Matrix n = local_ops::number(res.state.n_max());
    Matrix pair = local_ops::pair(res.state.n_max());
    int best = 0;
    double best_n = -1.0;
    for (int i = 0; i < res.state.n_sites(); ++i) {
        double v = env.onsite(i, n).real();
        if (v > best_n) {
            best_n = v;
            best = i;
        }
    }
    double g2 = env.onsite(best, pair).real() / (best_n * best_n);
    if (g2 >= config.max_contact_g2)
        throw NumericalError("prepared state has g2(0,0) = " + std::to_string(g2) +
                             ", not a fermionized ground state");
    return res;
}

}  // namespace llq

namespace llq {

GroundStateResult hardcore_ground_state(const LatticeParams& lp, int n_particles, const TruncationPolicy& policy,
                                        double mode_tol) {
    const int m = lp.n_sites;
    if (n_particles < 1 || n_particles > m) throw ConfigError("hardcore state needs 1 <= N <= n_sites");
    if (static_cast<int>(lp.potential.size()) != m) throw ConfigError("potential size mismatch");
    policy.validate();

    RealMatrix h = RealMatrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        h(i, i) = lp.potential[i];
        if (i + 1 < m) h(i, i + 1) = h(i + 1, i) = -lp.hopping;
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> orb(h);
    RealMatrix phi = orb.eigenvectors().leftCols(n_particles);
    RealMatrix c = phi * phi.transpose();  // <c_i^+ c_j>

    struct Rotation {
        int bond;
        double cs, sn;
    };
    std::vector<Rotation> circuit;
    std::vector<int> occ(m, 0);
    for (int i = 0; i < m; ++i) {
        // Smallest window around mode i holding a nearly pure (0 or 1) mode.
        int width = 1;
        Eigen::VectorXd v;
        double lambda = 0.0;
        for (;;) {
            Eigen::SelfAdjointEigenSolver<RealMatrix> eig(c.block(i, i, width, width));
            Eigen::Index best = 0;
            double best_err = 2.0;
            for (Eigen::Index k = 0; k < width; ++k) {
                double l = eig.eigenvalues()[k];
                double err = std::min(std::abs(l), std::abs(1.0 - l));
                if (err < best_err) {
                    best_err = err;
                    best = k;
                }
            }
            v = eig.eigenvectors().col(best);
            lambda = eig.eigenvalues()[best];
            if (best_err <= mode_tol || i + width == m) break;
            ++width;
        }
        for (int k = width - 2; k >= 0; --k) {
            double a = v[k], b = v[k + 1];
            double r = std::hypot(a, b);
            if (r == 0.0 || b == 0.0) continue;
            double cs = a / r, sn = b / r;
            v[k] = r;
            v[k + 1] = 0.0;
            int p = i + k, q = p + 1;
            // C <- g C g^T with g = [[cs, sn], [-sn, cs]] on modes (p, q).
            Eigen::RowVectorXd rp = c.row(p), rq = c.row(q);
            c.row(p) = cs * rp + sn * rq;
            c.row(q) = -sn * rp + cs * rq;
            Eigen::VectorXd cp = c.col(p), cq = c.col(q);
            c.col(p) = cs * cp + sn * cq;
            c.col(q) = -sn * cp + cs * cq;
            circuit.push_back({p, cs, sn});
        }
        occ[i] = lambda > 0.5 ? 1 : 0;
    }
    int total = 0;
    for (int n : occ) total += n;
    if (total != n_particles)
        throw NumericalError("free-fermion mode decoupling produced " + std::to_string(total) + " particles instead of " +
                             std::to_string(n_particles));

    GroundStateResult res;
    res.state = init_fock(occ, 1);
    // |psi> = G(g_1) G(g_2) ... G(g_L) |occ>: apply the recorded rotations in
    // reverse. G(g) acts on the one-particle block as g^T and on |11> as
    // det g = 1.
    for (auto it = circuit.rbegin(); it != circuit.rend(); ++it) {
        Matrix g = Matrix::Zero(4, 4);
        g(0, 0) = 1.0;
        g(3, 3) = 1.0;
        // index n1 * 2 + n2: |10> = 2, |01> = 1
        g(2, 2) = it->cs;   // <10|G|10> = g00
        g(1, 2) = it->sn;   // <01|G|10> = g01
        g(2, 1) = -it->sn;  // <10|G|01> = g10
        g(1, 1) = it->cs;   // <01|G|01> = g11
        apply_two_site(res.state, it->bond, TwoSiteGate(std::move(g), 1), policy, Sweep::Right);
        ++res.steps;
    }
    res.state.normalize();
    res.energy = 0.0;
    for (int k = 0; k < n_particles; ++k) res.energy += orb.eigenvalues()[k];
    res.energy_history.push_back(res.energy);
    res.state.raise_cutoff(lp.n_max);
    return res;
}

}  // namespace llq
