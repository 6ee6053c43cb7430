#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "llq/bethe2.hpp"
#include "llq/ed.hpp"
#include "llq/observables.hpp"
#include "llq/tebd.hpp"

using namespace llq;

namespace {

LatticeParams chain(int m, double j, double u, int n_max) {
    LatticeParams lp;
    lp.n_sites = m;
    lp.dx = 1.0;
    lp.hopping = j;
    lp.onsite_u = u;
    lp.n_max = n_max;
    lp.potential.assign(m, 0.0);
    return lp;
}

std::size_t binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<std::size_t>(std::lround(r));
}

}  // namespace

TEST_CASE("basis size and indexing") {
    // unrestricted cutoff: stars and bars
    ed::FockBasis b(6, 3, 3);
    CHECK(b.size() == binomial(8, 3));
    ed::FockBasis hc(7, 3, 1);
    CHECK(hc.size() == binomial(7, 3));
    for (std::size_t k = 0; k < b.size(); ++k) CHECK(b.index(b.state(k)) == k);
    std::vector<int> bad{4, 0, 0, 0, 0, 0};
    CHECK(b.index(bad) == ed::FockBasis::npos);
    CHECK(ed::FockBasis(32, 2, 4).size() == 528u);
    CHECK_THROWS(ed::FockBasis(40, 10, 10, 1000));
}

TEST_CASE("two sites, one particle") {
    auto lp = chain(2, 0.7, 3.0, 2);
    lp.potential = {0.2, -0.4};
    ed::FockBasis b(2, 1, 2);
    auto h = ed::build_hamiltonian(lp, b);
    auto ev = ed::lowest_eigenvalues(h, 2);
    double c = -0.1, d = 0.3;  // mean and half difference of V
    double r = std::sqrt(d * d + 0.7 * 0.7);
    CHECK(ev[0] == doctest::Approx(c - r));
    CHECK(ev[1] == doctest::Approx(c + r));
}

TEST_CASE("Hamiltonian is Hermitian") {
    auto lp = chain(6, 1.1, -2.3, 3);
    for (int i = 0; i < 6; ++i) lp.potential[i] = 0.1 * i * i;
    ed::FockBasis b(6, 3, 3);
    CHECK(ed::hermiticity_residual(ed::build_hamiltonian(lp, b)) < 1e-14);
    CHECK(ed::hermiticity_residual(ed::build_hamiltonian(lp, b, true)) < 1e-14);
}

TEST_CASE("Lanczos and Krylov agree with dense diagonalization") {
    auto lp = chain(26, 1.0, -1.5, 3);
    for (int i = 0; i < 26; ++i) lp.potential[i] = 0.01 * (i - 12.5) * (i - 12.5);
    ed::FockBasis b(26, 3, 3);
    REQUIRE(b.size() > ed::kDenseLimit);
    auto h = ed::build_hamiltonian(lp, b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(h)};

    auto gs = ed::ground_state(h);
    CHECK(gs.method == "lanczos");
    CHECK(gs.energy == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-9));
    CHECK(std::abs(ed::expectation(h, gs.state) - gs.energy) < 1e-8);

    ed::Propagator p(h);
    CHECK(p.method() == "krylov");
    std::vector<int> occ(26, 0);
    occ[10] = occ[13] = occ[14] = 1;
    auto psi0 = ed::fock_state(b, occ);
    Eigen::VectorXcd ph(b.size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph[k] = std::exp(cplx(0.0, -1.3 * es.eigenvalues()[k]));
    Eigen::MatrixXcd v = es.eigenvectors().cast<cplx>();
    ed::Vector ref = v * (ph.asDiagonal() * (v.adjoint() * psi0));
    CHECK((p.evolve(psi0, 1.3) - ref).norm() < 1e-9);
}

TEST_CASE("propagation: unitarity and eigenstate phases") {
    auto lp = chain(8, 1.0, -2.0, 2);
    ed::FockBasis b(8, 2, 2);
    auto h = ed::build_hamiltonian(lp, b);
    ed::Propagator p(h);
    auto gs = ed::ground_state(h);
    auto psi = p.evolve(gs.state, 3.7);
    CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
    cplx phase = gs.state.dot(psi);
    CHECK(std::abs(phase - std::exp(cplx(0.0, -gs.energy * 3.7))) < 1e-10);
    std::vector<int> occ{0, 1, 0, 0, 0, 1, 0, 0};
    auto f = p.evolve(ed::fock_state(b, occ), 2.0);
    CHECK(std::abs(f.norm() - 1.0) < 1e-12);
    for (int i = 0; i < 8; ++i)
        CHECK(std::abs(ed::expectation(b, psi, {ed::OpKind::Density, i}) -
                       ed::expectation(b, gs.state, {ed::OpKind::Density, i})) < 1e-10);
}

TEST_CASE("two bosons on a ring converge to the Bethe branch-0 energy") {
    // ring of length 1, density 2; gamma = g / 2
    const double gamma = 3.0, g = 2.0 * gamma;
    const double target = bethe2::solve_gas_root(gamma, 0).energy;
    double prev_err = 1e9;
    for (int m : {16, 32, 64}) {
        LatticeParams lp = chain(m, 0.0, 0.0, 2);
        lp.dx = 1.0 / m;
        lp.hopping = 1.0 / (2.0 * lp.dx * lp.dx);
        lp.onsite_u = g / lp.dx;
        ed::FockBasis b(m, 2, 2);
        auto h = ed::build_hamiltonian(lp, b, true);
        double e = ed::ground_state(h).energy + 2.0 * lp.kinetic_offset();
        double err = std::abs(e - target);
        CAPTURE(m);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 0.02 * target);
}

TEST_CASE("pair beat frequency on the lattice") {
    // free ground state on a ring (zero pair momentum) quenched to U < 0:
    // the contact density beats at bound minus lowest scattering energy,
    // which approaches the lattice binding energy for a long ring
    const int m = 64;
    auto free = chain(m, 1.0, 0.0, 2);
    auto lp = chain(m, 1.0, -10.0, 2);
    ed::FockBasis b(m, 2, 2);
    auto h0 = ed::build_hamiltonian(free, b, true);
    auto h = ed::build_hamiltonian(lp, b, true);
    auto psi = ed::ground_state(h0).state;
    ed::Propagator p(h);
    std::vector<double> t, v;
    for (int k = 0; k < 600; ++k) {
        double tk = 0.02 * k;
        t.push_back(tk);
        v.push_back(ed::expectation(b, p.evolve(psi, tk), {ed::OpKind::Pair, 0}));
    }
    double eb = lp.lattice_binding_energy();
    double w = dominant_frequency(t, v, 0.5 * eb, 1.5 * eb);
    CHECK(w == doctest::Approx(eb).epsilon(0.05));
}

TEST_CASE("observables agree with MPS conversions") {
    auto lp = chain(7, 1.0, -2.0, 3);
    std::vector<int> occ{0, 1, 0, 2, 0, 0, 1};
    auto s = init_fock(occ, 3);
    TebdPropagator prop(lp, 0.1);
    for (int k = 0; k < 6; ++k) prop.step(s, TruncationPolicy{1000, 0.0});
    ed::FockBasis b(7, 4, 3);
    auto psi = ed::to_dense(s, b);
    auto snap = measure(s, lp, 3);
    double n3 = ed::expectation(b, psi, {ed::OpKind::Density, 3});
    CHECK(std::abs(snap.density[3] - n3) < 1e-9);
    CHECK(std::abs(snap.g2_local - ed::expectation(b, psi, {ed::OpKind::Pair, 3}) / (n3 * n3)) < 1e-9);
    CHECK(std::abs(ed::expectation(b, psi, {ed::OpKind::TotalNumber}) - 4.0) < 1e-12);
    CHECK(std::abs(ed::expectation(ed::build_hamiltonian(lp, b), psi) - energy(s, lp)) < 1e-9);
    for (int bond = 0; bond < 6; ++bond)
        CHECK(std::abs(ed::entanglement_entropy(b, psi, bond) - entanglement_entropy(s, bond)) < 1e-9);
    CHECK_THROWS_AS(ed::expectation(b, psi, {ed::OpKind::Density, 9}), std::invalid_argument);
}

TEST_CASE("embedding between cutoffs") {
    ed::FockBasis small(5, 2, 1), big(5, 2, 2);
    std::vector<int> occ{1, 0, 0, 1, 0};
    auto e = ed::embed(ed::fock_state(small, occ), small, big);
    CHECK(e.norm() == doctest::Approx(1.0));
    CHECK(std::abs(e[big.index(occ)]) == doctest::Approx(1.0));
}
