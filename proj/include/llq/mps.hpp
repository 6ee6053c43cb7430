#pragma once

// Particle-number conserving matrix product states.
//
// Every virtual link carries a charge label equal to the number of particles
// to its left. Link 0 holds charge 0 only and link M holds the total charge
// N. A site tensor is a set of dense blocks (q_left, n) of shape
// dim(q_left) x dim(q_left + n), so the selection rule q_right = q_left + n is
// structural.
//
//        n
//        |
//  q_L --A-- q_L + n
//
// Link l sits to the left of site l; the cut between sites b and b+1 is link
// b+1 and is addressed as "bond b" in the public API.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace llq {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// charge -> dimension of that sector on one link, ascending charge.
using LinkSectors = std::map<int, int>;

struct BlockKey {
    int q_left;
    int n;
    auto operator<=>(const BlockKey&) const = default;
};

using SiteTensor = std::map<BlockKey, Matrix>;

struct TruncationPolicy {
    int chi_max = 100;
    double svd_cutoff = 1e-10;  ///< relative to the largest Schmidt value

    void validate() const;
};

struct BondSpectrum {
    std::vector<double> values;  ///< descending
    std::vector<int> charges;    ///< left particle number of each value

    double entropy() const;
};

/// Two-site operator on the (n_max+1)^2 dimensional pair space, row/column
/// index n1 * (n_max + 1) + n2. The constructor rejects operators that mix
/// different total occupations n1 + n2.
class TwoSiteGate {
public:
    TwoSiteGate(Matrix m, int n_max, double tol = 1e-13);

    const Matrix& matrix() const { return m_; }
    int n_max() const { return n_max_; }
    int local_dim() const { return n_max_ + 1; }
    cplx operator()(int m1, int m2, int n1, int n2) const {
        return m_(m1 * local_dim() + m2, n1 * local_dim() + n2);
    }

private:
    Matrix m_;
    int n_max_;
};

enum class Sweep { Right, Left };

struct TwoSiteUpdate {
    double truncation_weight = 0.0;  ///< discarded sum of squared normalized Schmidt values
    double norm = 1.0;               ///< norm of the updated two-site block before truncation
    int kept = 0;
};

class SymmetricMPS {
public:
    SymmetricMPS() = default;
    SymmetricMPS(int n_sites, int n_max, int total_charge);

    int n_sites() const { return static_cast<int>(sites_.size()); }
    int n_max() const { return n_max_; }
    int local_dim() const { return n_max_ + 1; }
    int total_charge() const { return total_charge_; }
    std::optional<int> ortho_center() const { return center_; }

    const LinkSectors& link(int l) const { return links_.at(l); }
    int link_dim(int l) const;
    /// Total dimension of the cut between sites b and b+1.
    int bond_dim(int bond) const { return link_dim(bond + 1); }
    std::vector<int> bond_dims() const;
    int max_bond_dim() const;

    const SiteTensor& site(int i) const { return sites_.at(i); }
    /// Direct mutable access; the caller is responsible for consistency and
    /// must call invalidate_center() if orthogonality is destroyed.
    SiteTensor& site_data(int i) { return sites_.at(i); }
    LinkSectors& link_data(int l) { return links_.at(l); }
    void invalidate_center() { center_.reset(); }
    void set_center(int site) { center_ = site; }

    /// Schmidt values recorded by the last two-site update of this bond.
    const BondSpectrum* cached_spectrum(int bond) const;

    /// Bring the state into mixed canonical form with the orthogonality
    /// center at `site`. Uses QR steps only, no truncation.
    void move_center(int site);
    void canonicalize(int site = 0);

    /// Scale so that <psi|psi> = 1; returns the norm before scaling.
    double normalize();
    double norm() const;

    /// Reinterpret the state with a larger local cutoff. Blocks with n above
    /// the old cutoff are simply absent.
    void raise_cutoff(int n_max);

    /// Throws std::logic_error if a block violates the charge selection rule,
    /// has a shape inconsistent with its links, or the boundary charges differ
    /// from 0 and total_charge().
    void check_structure() const;

    /// Largest deviation from left (right) orthonormality of site i.
    double left_orthogonality_error(int i) const;
    double right_orthogonality_error(int i) const;

    void write(std::ostream& os) const;
    static SymmetricMPS read(std::istream& is);

private:
    friend TwoSiteUpdate apply_two_site(SymmetricMPS&, int, const TwoSiteGate&,
                                        const TruncationPolicy&, Sweep);
    void left_orthogonalize(int i);
    void right_orthogonalize(int i);

    int n_max_ = 0;
    int total_charge_ = 0;
    std::vector<SiteTensor> sites_;
    std::vector<LinkSectors> links_;
    std::vector<std::optional<BondSpectrum>> spectra_;
    std::optional<int> center_;
};

/// Product state with the given occupations; all bond dimensions are 1.
SymmetricMPS init_fock(std::span<const int> occupations, int n_max);

/// Apply a number-conserving gate to sites (bond, bond+1), truncate with the
/// global Schmidt-value rule and renormalize. The orthogonality center ends
/// on bond+1 for Sweep::Right and on bond for Sweep::Left.
TwoSiteUpdate apply_two_site(SymmetricMPS& state, int bond, const TwoSiteGate& gate,
                             const TruncationPolicy& policy, Sweep sweep = Sweep::Right);

/// Schmidt spectrum of the cut between sites bond and bond+1. Moves the
/// orthogonality center to `bond`.
BondSpectrum bond_spectrum(SymmetricMPS& state, int bond);
double entanglement_entropy(SymmetricMPS& state, int bond);

cplx overlap(const SymmetricMPS& bra, const SymmetricMPS& ket);

cplx expectation_onsite(const SymmetricMPS& state, int site, const Matrix& op);
cplx expectation_two_point(const SymmetricMPS& state, int site_i, int site_j,
                           const Matrix& op_i, const Matrix& op_j);

/// Local operators on the truncated boson space {0..n_max}.
namespace local_ops {
Matrix identity(int n_max);
Matrix number(int n_max);
Matrix annihilation(int n_max);
Matrix creation(int n_max);
/// Diagonal operator with entries f(n).
Matrix diagonal(int n_max, double (*f)(int));
/// n (n-1), the normal-ordered pair density.
Matrix pair(int n_max);
/// n (n-1) (n-2), the normal-ordered triple density.
Matrix triple(int n_max);
Matrix kron(const Matrix& a, const Matrix& b);
}  // namespace local_ops

/// Left and right contraction environments of <bra|...|ket>, used to evaluate
/// many expectation values of the same pair of states in O(M) total.
class Environments {
public:
    explicit Environments(const SymmetricMPS& state);
    Environments(const SymmetricMPS& bra, const SymmetricMPS& ket);

    cplx norm2() const;
    cplx onsite(int site, const Matrix& op) const;
    cplx two_point(int site_i, int site_j, const Matrix& op_i, const Matrix& op_j) const;
    /// <op_anchor(anchor) op_j(j)> for every j != anchor; entry anchor holds
    /// <op_self(anchor)>.
    std::vector<cplx> correlation_row(int anchor, const Matrix& op_anchor, const Matrix& op_j,
                                      const Matrix& op_self) const;

    using Env = std::map<std::pair<int, int>, Matrix>;

private:
    const SymmetricMPS* bra_;
    const SymmetricMPS* ket_;
    std::vector<Env> left_;   ///< left_[l]: contraction of sites < l
    std::vector<Env> right_;  ///< right_[l]: contraction of sites >= l
};

}  // namespace llq
