#pragma once

// Exact diagonalization of the number-conserving Bose-Hubbard chain in a
// fixed-N Fock basis. Small-size reference for the MPS code.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "llq/model.hpp"
#include "llq/mps.hpp"

namespace llq::ed {

inline constexpr std::size_t kDefaultBudget = 200000;
/// Bases up to this size are diagonalized densely.
inline constexpr std::size_t kDenseLimit = 3000;

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXcd;

/// All occupation vectors with sum n_particles and entries <= n_max, in
/// lexicographic order. index() is a perfect hash computed from suffix counts.
class FockBasis {
public:
    FockBasis(int n_sites, int n_particles, int n_max, std::size_t budget = kDefaultBudget);

    int n_sites() const { return n_sites_; }
    int n_particles() const { return n_particles_; }
    int n_max() const { return n_max_; }
    std::size_t size() const { return size_; }

    std::span<const int> state(std::size_t k) const {
        return {occupations_.data() + k * n_sites_, static_cast<std::size_t>(n_sites_)};
    }
    /// Index of an occupation vector; npos if it is not in the basis.
    std::size_t index(std::span<const int> occ) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Number of ways to put r particles on sites i..M-1.
    static std::size_t count(int n_sites, int n_particles, int n_max);

private:
    std::size_t suffix(int site, int remaining) const {
        return suffix_[static_cast<std::size_t>(site) * (n_particles_ + 1) + remaining];
    }

    int n_sites_, n_particles_, n_max_;
    std::size_t size_ = 0;
    std::vector<std::size_t> suffix_;
    std::vector<int> occupations_;
};

/// Same Hamiltonian as the TEBD bond terms. periodic = true adds the bond
/// (M-1, 0), used for ring checks.
SparseMatrix build_hamiltonian(const LatticeParams& lp, const FockBasis& basis, bool periodic = false);

double hermiticity_residual(const SparseMatrix& h);

struct Eigenpair {
    double energy = 0.0;
    Vector state;
    std::string method;  ///< "dense" or "lanczos"
};

/// Lowest eigenpair. Throws NumericalError if Lanczos does not converge.
Eigenpair ground_state(const SparseMatrix& h, double tol = 1e-10, int max_iter = 2000);

/// Lowest `count` eigenvalues by dense diagonalization.
std::vector<double> lowest_eigenvalues(const SparseMatrix& h, int count);

/// exp(-i H t) on a state: full eigendecomposition when the basis is small,
/// otherwise Lanczos-Krylov steps with an a-posteriori error bound.
class Propagator {
public:
    explicit Propagator(const SparseMatrix& h, double krylov_tol = 1e-12);

    Vector evolve(const Vector& psi, double t) const;
    const std::string& method() const { return method_; }

private:
    Vector krylov_step(const Vector& psi, double t, double& done) const;

    const SparseMatrix& h_;
    double tol_;
    std::string method_;
    Eigen::VectorXd evals_;
    Eigen::MatrixXd evecs_;
};

/// Diagonal observables, mirroring the lattice observables.
enum class OpKind { Density, Pair, Triple, DensityDensity, TotalNumber };

struct OperatorSpec {
    OpKind kind;
    int site = 0;
    int site2 = 0;  ///< DensityDensity only
};

/// <psi|O|psi> / <psi|psi>. Throws std::invalid_argument for sites outside
/// the basis.
double expectation(const FockBasis& basis, const Vector& psi, const OperatorSpec& op);

/// <psi|H|psi> / <psi|psi>.
double expectation(const SparseMatrix& h, const Vector& psi);

/// <b_i^+ b_j>.
cplx one_body(const FockBasis& basis, const Vector& psi, int i, int j);

/// Amplitudes of an MPS in a Fock basis with matching size, charge and
/// cutoff at least the MPS cutoff.
Vector to_dense(const SymmetricMPS& state, const FockBasis& basis);

/// Copy amplitudes into another basis of the same sites and particle number;
/// states absent from the target must carry zero amplitude.
Vector embed(const Vector& psi, const FockBasis& from, const FockBasis& to);

/// Von Neumann entropy of the cut between sites bond and bond+1.
double entanglement_entropy(const FockBasis& basis, const Vector& psi, int bond);

Vector fock_state(const FockBasis& basis, std::span<const int> occupations);

}  // namespace llq::ed
