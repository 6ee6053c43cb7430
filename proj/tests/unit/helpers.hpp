#pragma once

// Shared test fixtures: random number-conserving gates and a dense reference
// that applies the same gates to a Fock-basis vector.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "llq/ed.hpp"
#include "llq/mps.hpp"

namespace testutil {

using llq::cplx;
using llq::Matrix;

/// exp(-i H) for a random Hermitian H that is block diagonal in n1 + n2.
inline Matrix random_gate_matrix(int n_max, std::mt19937_64& rng, double scale = 1.0) {
    const int d = n_max + 1;
    std::normal_distribution<double> nd(0.0, scale);
    Matrix h = Matrix::Zero(d * d, d * d);
    for (int a = 0; a < d * d; ++a)
        for (int b = a; b < d * d; ++b) {
            if (a / d + a % d != b / d + b % d) continue;
            cplx v(nd(rng), a == b ? 0.0 : nd(rng));
            h(a, b) = v;
            h(b, a) = std::conj(v);
        }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Eigen::VectorXcd ph(d * d);
    for (int k = 0; k < d * d; ++k) ph[k] = std::exp(cplx(0.0, -es.eigenvalues()[k]));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

/// psi' = G_(bond, bond+1) psi in the Fock basis. Occupations leaving the
/// basis must carry zero amplitude.
inline llq::ed::Vector dense_apply(const llq::ed::FockBasis& basis, const llq::ed::Vector& psi, const Matrix& g,
                                   int n_max, int bond) {
    const int d = n_max + 1;
    llq::ed::Vector out = llq::ed::Vector::Zero(psi.size());
    std::vector<int> occ(basis.n_sites());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        if (psi[k] == cplx(0.0)) continue;
        auto s = basis.state(k);
        occ.assign(s.begin(), s.end());
        int col = occ[bond] * d + occ[bond + 1];
        for (int row = 0; row < d * d; ++row) {
            if (g(row, col) == cplx(0.0)) continue;
            occ[bond] = row / d;
            occ[bond + 1] = row % d;
            std::size_t j = basis.index(occ);
            if (j != llq::ed::FockBasis::npos) out[j] += g(row, col) * psi[k];
        }
    }
    return out;
}

/// Random occupations with total n and entries <= n_max.
inline std::vector<int> random_occupation(int m, int n, int n_max, std::mt19937_64& rng) {
    std::vector<int> occ(m, 0);
    std::uniform_int_distribution<int> site(0, m - 1);
    for (int placed = 0; placed < n;) {
        int i = site(rng);
        if (occ[i] < n_max) {
            ++occ[i];
            ++placed;
        }
    }
    return occ;
}

}  // namespace testutil
