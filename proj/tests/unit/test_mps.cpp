#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "llq/ed.hpp"
#include "llq/mps.hpp"

using namespace llq;
namespace lo = llq::local_ops;

namespace {

Matrix hop_gate(int n_max, double theta) {
    // exp(i theta (b1^+ b2 + b2^+ b1))
    Matrix h = lo::kron(lo::creation(n_max), lo::annihilation(n_max)) +
               lo::kron(lo::annihilation(n_max), lo::creation(n_max));
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Eigen::VectorXcd ph(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k) ph[k] = std::exp(cplx(0.0, theta * es.eigenvalues()[k]));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

struct RandomPair {
    SymmetricMPS mps;
    ed::FockBasis basis;
    ed::Vector dense;
};

RandomPair random_state(int m, int n, int n_max, int layers, std::mt19937_64& rng) {
    auto occ = testutil::random_occupation(m, n, n_max, rng);
    RandomPair r{init_fock(occ, n_max), ed::FockBasis(m, n, n_max), {}};
    r.dense = ed::fock_state(r.basis, occ);
    TruncationPolicy exact{100000, 0.0};
    for (int l = 0; l < layers; ++l)
        for (int b = 0; b < m - 1; ++b) {
            Matrix g = testutil::random_gate_matrix(n_max, rng);
            apply_two_site(r.mps, b, TwoSiteGate(g, n_max), exact, Sweep::Right);
            r.dense = testutil::dense_apply(r.basis, r.dense, g, n_max, b);
        }
    return r;
}

}  // namespace

TEST_CASE("init_fock: product state") {
    std::vector<int> occ{0, 1, 1, 0};
    auto s = init_fock(occ, 2);
    CHECK(s.norm() == doctest::Approx(1.0));
    CHECK(s.total_charge() == 2);
    for (int b = 0; b < 3; ++b) CHECK(entanglement_entropy(s, b) == doctest::Approx(0.0));
    CHECK(s.max_bond_dim() == 1);
    CHECK_NOTHROW(s.check_structure());
}

TEST_CASE("init_fock: cutoff guard and charge bookkeeping") {
    std::vector<int> two{2, 0};
    CHECK_NOTHROW(init_fock(two, 2));
    CHECK_THROWS_AS(init_fock(two, 1), std::invalid_argument);
    std::vector<int> alt(10);
    for (int i = 0; i < 10; ++i) alt[i] = i % 2 == 0;
    CHECK(init_fock(alt, 3).total_charge() == 5);
}

TEST_CASE("gate construction rejects number-changing operators") {
    Matrix bad = lo::kron(lo::creation(2), lo::identity(2));
    CHECK_THROWS_AS(TwoSiteGate(bad, 2), std::invalid_argument);
    CHECK_THROWS_AS(TwoSiteGate(Matrix::Identity(4, 4), 2), std::invalid_argument);
}

TEST_CASE("identity gate leaves the state unchanged") {
    std::mt19937_64 rng(7);
    auto r = random_state(5, 3, 2, 2, rng);
    SymmetricMPS copy = r.mps;
    TwoSiteGate id(Matrix::Identity(9, 9), 2);
    for (int b = 0; b < 4; ++b) {
        auto u = apply_two_site(r.mps, b, id, TruncationPolicy{1000, 0.0});
        CHECK(u.truncation_weight == doctest::Approx(0.0).epsilon(1e-14));
    }
    CHECK(std::abs(overlap(copy, r.mps)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hop on [1,0] matches the two-level result") {
    const double theta = 0.37;
    std::vector<int> occ{1, 0};
    auto s = init_fock(occ, 2);
    apply_two_site(s, 0, TwoSiteGate(hop_gate(2, theta), 2), TruncationPolicy{10, 0.0});
    CHECK(expectation_onsite(s, 0, lo::number(2)).real() == doctest::Approx(std::pow(std::cos(theta), 2)));
    CHECK(expectation_onsite(s, 1, lo::number(2)).real() == doctest::Approx(std::pow(std::sin(theta), 2)));
    std::vector<int> flipped{0, 1};
    auto f = init_fock(flipped, 2);
    cplx a = overlap(f, s);
    CHECK(a.real() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(a.imag() == doctest::Approx(std::sin(theta)));
}

TEST_CASE("equal Schmidt values give ln 2") {
    std::vector<int> occ{1, 0};
    auto s = init_fock(occ, 2);
    apply_two_site(s, 0, TwoSiteGate(hop_gate(2, std::numbers::pi / 4), 2), TruncationPolicy{10, 0.0});
    CHECK(entanglement_entropy(s, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    auto sp = bond_spectrum(s, 0);
    REQUIRE(sp.values.size() == 2);
    CHECK(sp.values[0] == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("chi_max = 1 on an entangling gate truncates") {
    std::vector<int> occ{1, 0};
    auto s = init_fock(occ, 2);
    auto u = apply_two_site(s, 0, TwoSiteGate(hop_gate(2, 0.3), 2), TruncationPolicy{1, 0.0});
    CHECK(u.truncation_weight == doctest::Approx(std::pow(std::sin(0.3), 2)));
    CHECK(s.norm() == doctest::Approx(1.0));
    CHECK(s.max_bond_dim() == 1);
}

TEST_CASE("random states agree with the dense reference") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 6; ++trial) {
        int m = 4 + trial % 3, n = 2 + trial % 2, n_max = 2 + trial % 2;
        auto a = random_state(m, n, n_max, 2, rng);
        auto b = random_state(m, n, n_max, 2, rng);
        CAPTURE(trial);
        CHECK(std::abs(overlap(a.mps, a.mps) - 1.0) < 1e-12);
        cplx ov = overlap(a.mps, b.mps);
        cplx ref = a.dense.dot(b.dense);  // conjugates the first argument
        CHECK(std::abs(ov - ref) < 1e-12);

        auto num = lo::number(n_max);
        auto pr = lo::pair(n_max);
        for (int i = 0; i < m; ++i) {
            double e = ed::expectation(a.basis, a.dense, {ed::OpKind::Density, i});
            CHECK(std::abs(expectation_onsite(a.mps, i, num).real() - e) < 1e-12);
            double p = ed::expectation(a.basis, a.dense, {ed::OpKind::Pair, i});
            CHECK(std::abs(expectation_onsite(a.mps, i, pr).real() - p) < 1e-12);
            for (int j = 0; j < m; ++j) {
                if (j == i) continue;
                double nn = ed::expectation(a.basis, a.dense, {ed::OpKind::DensityDensity, i, j});
                CHECK(std::abs(expectation_two_point(a.mps, i, j, num, num).real() - nn) < 1e-12);
                cplx hop = ed::one_body(a.basis, a.dense, i, j);
                cplx got = expectation_two_point(a.mps, i, j, lo::creation(n_max), lo::annihilation(n_max));
                CHECK(std::abs(got - hop) < 1e-12);
            }
        }
        for (int bnd = 0; bnd < m - 1; ++bnd)
            CHECK(std::abs(entanglement_entropy(a.mps, bnd) - ed::entanglement_entropy(a.basis, a.dense, bnd)) <
                  1e-10);
        CHECK((ed::to_dense(a.mps, a.basis) - a.dense).norm() < 1e-12);
    }
}

TEST_CASE("onsite and two-point on Fock states") {
    std::vector<int> occ{0, 2, 0};
    auto s = init_fock(occ, 3);
    CHECK(expectation_onsite(s, 1, lo::number(3)).real() == 2.0);
    CHECK(expectation_onsite(s, 0, lo::number(3)).real() == 0.0);
    CHECK(expectation_onsite(s, 2, lo::identity(3)).real() == doctest::Approx(1.0));
    std::vector<int> ones{1, 1};
    auto t = init_fock(ones, 2);
    CHECK(expectation_two_point(t, 0, 1, lo::number(2), lo::number(2)).real() == doctest::Approx(1.0));
    CHECK(std::abs(overlap(init_fock(std::vector<int>{1, 0}, 2), init_fock(std::vector<int>{0, 1}, 2))) == 0.0);
    CHECK_THROWS_AS(expectation_onsite(s, 0, lo::number(2)), std::invalid_argument);
}

TEST_CASE("environments reproduce direct expectations") {
    std::mt19937_64 rng(99);
    auto a = random_state(6, 3, 3, 2, rng);
    Environments env(a.mps);
    CHECK(std::abs(env.norm2() - 1.0) < 1e-12);
    auto num = lo::number(3);
    auto row = env.correlation_row(2, num, num, lo::pair(3));
    for (int j = 0; j < 6; ++j) {
        double ref = j == 2 ? ed::expectation(a.basis, a.dense, {ed::OpKind::Pair, 2})
                            : ed::expectation(a.basis, a.dense, {ed::OpKind::DensityDensity, 2, j});
        CHECK(std::abs(row[j].real() - ref) < 1e-12);
    }
}

TEST_CASE("canonical forms and serialization") {
    std::mt19937_64 rng(5);
    auto a = random_state(6, 3, 2, 2, rng);
    for (int c : {0, 3, 5}) {
        a.mps.move_center(c);
        for (int i = 0; i < c; ++i) CHECK(a.mps.left_orthogonality_error(i) < 1e-12);
        for (int i = c + 1; i < 6; ++i) CHECK(a.mps.right_orthogonality_error(i) < 1e-12);
        CHECK(a.mps.ortho_center() == c);
    }
    std::stringstream ss;
    a.mps.write(ss);
    auto b = SymmetricMPS::read(ss);
    CHECK(std::abs(overlap(a.mps, b) - 1.0) < 1e-14);
    CHECK_NOTHROW(b.check_structure());
}

TEST_CASE("raise_cutoff keeps amplitudes") {
    std::mt19937_64 rng(11);
    auto a = random_state(4, 2, 2, 2, rng);
    SymmetricMPS b = a.mps;
    b.raise_cutoff(4);
    CHECK(b.n_max() == 4);
    ed::FockBasis big(4, 2, 4);
    auto ref = ed::embed(a.dense, a.basis, big);
    CHECK((ed::to_dense(b, big) - ref).norm() < 1e-12);
    CHECK_THROWS(b.raise_cutoff(1));
}

TEST_CASE("truncation weight equals the discarded Schmidt weight") {
    std::mt19937_64 rng(3);
    auto a = random_state(6, 3, 2, 3, rng);
    auto full = bond_spectrum(a.mps, 2);
    SymmetricMPS t = a.mps;
    const int keep = 2;
    auto u = apply_two_site(t, 2, TwoSiteGate(Matrix::Identity(9, 9), 2), TruncationPolicy{keep, 0.0});
    double discarded = 0.0;
    for (std::size_t k = keep; k < full.values.size(); ++k) discarded += full.values[k] * full.values[k];
    CHECK(u.truncation_weight == doctest::Approx(discarded).epsilon(1e-10));
    CHECK(t.bond_dim(2) <= keep);
}
