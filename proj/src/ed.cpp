#include "llq/ed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "llq/error.hpp"

namespace llq::ed {

std::size_t FockBasis::count(int n_sites, int n_particles, int n_max) {
    // ways[r] for the current suffix length
    std::vector<std::size_t> ways(n_particles + 1, 0);
    ways[0] = 1;
    for (int s = 0; s < n_sites; ++s) {
        std::vector<std::size_t> next(n_particles + 1, 0);
        for (int r = 0; r <= n_particles; ++r)
            for (int v = 0; v <= std::min(n_max, r); ++v) next[r] += ways[r - v];
        ways = std::move(next);
    }
    return ways[n_particles];
}

FockBasis::FockBasis(int n_sites, int n_particles, int n_max, std::size_t budget)
    : n_sites_(n_sites), n_particles_(n_particles), n_max_(n_max) {
    if (n_sites < 1 || n_particles < 0 || n_max < 1) throw ConfigError("invalid Fock basis parameters");
    const std::size_t stride = n_particles + 1;
    suffix_.assign((n_sites + 1) * stride, 0);
    suffix_[n_sites * stride + 0] = 1;
    for (int i = n_sites - 1; i >= 0; --i)
        for (int r = 0; r <= n_particles; ++r) {
            std::size_t c = 0;
            for (int v = 0; v <= std::min(n_max, r); ++v) c += suffix_[(i + 1) * stride + r - v];
            suffix_[i * stride + r] = c;
        }
    size_ = suffix(0, n_particles);
    if (size_ == 0) throw ConfigError("no Fock states with the requested particle number and cutoff");
    if (size_ > budget)
        throw ConfigError("Fock basis dimension " + std::to_string(size_) + " exceeds the memory budget " +
                          std::to_string(budget));

    occupations_.reserve(size_ * n_sites);
    std::vector<int> occ(n_sites, 0);
    // Depth-first enumeration with ascending values gives lexicographic order.
    auto rec = [&](auto&& self, int site, int remaining) -> void {
        if (site == n_sites) {
            occupations_.insert(occupations_.end(), occ.begin(), occ.end());
            return;
        }
        for (int v = 0; v <= std::min(n_max, remaining); ++v) {
            if (suffix(site + 1, remaining - v) == 0) continue;
            occ[site] = v;
            self(self, site + 1, remaining - v);
        }
        occ[site] = 0;
    };
    rec(rec, 0, n_particles);
}

std::size_t FockBasis::index(std::span<const int> occ) const {
    if (static_cast<int>(occ.size()) != n_sites_) return npos;
    std::size_t rank = 0;
    int remaining = n_particles_;
    for (int i = 0; i < n_sites_; ++i) {
        int n = occ[i];
        if (n < 0 || n > n_max_ || n > remaining) return npos;
        for (int v = 0; v < n; ++v) rank += suffix(i + 1, remaining - v);
        remaining -= n;
    }
    return remaining == 0 ? rank : npos;
}

SparseMatrix build_hamiltonian(const LatticeParams& lp, const FockBasis& basis, bool periodic) {
    const int m = basis.n_sites();
    if (lp.n_sites != m) throw std::invalid_argument("lattice and basis sizes differ");
    if (static_cast<int>(lp.potential.size()) != m) throw std::invalid_argument("potential size mismatch");
    if (periodic && m < 3) throw std::invalid_argument("periodic chain needs at least three sites");
    const int nmax = basis.n_max();
    std::vector<std::pair<int, int>> bonds;
    for (int i = 0; i + 1 < m; ++i) bonds.emplace_back(i, i + 1);
    if (periodic) bonds.emplace_back(m - 1, 0);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(basis.size() * (1 + 2 * bonds.size()));
    std::vector<int> occ(m);
    for (std::size_t k = 0; k < basis.size(); ++k) {
        auto s = basis.state(k);
        double diag = 0.0;
        for (int i = 0; i < m; ++i) diag += 0.5 * lp.onsite_u * s[i] * (s[i] - 1) + lp.potential[i] * s[i];
        trip.emplace_back(k, k, diag);
        for (auto [a, b] : bonds)
            for (auto [to, from] : {std::pair{a, b}, std::pair{b, a}}) {
                // b_to^+ b_from
                if (s[from] == 0 || s[to] == nmax) continue;
                std::copy(s.begin(), s.end(), occ.begin());
                double amp = -lp.hopping * std::sqrt(static_cast<double>((occ[to] + 1) * occ[from]));
                occ[to] += 1;
                occ[from] -= 1;
                trip.emplace_back(basis.index(occ), k, amp);
            }
    }
    SparseMatrix h(basis.size(), basis.size());
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

double hermiticity_residual(const SparseMatrix& h) {
    SparseMatrix t = h.transpose();
    SparseMatrix d = h - t;
    double r = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(d, k); it; ++it) r = std::max(r, std::abs(it.value()));
    return r;
}

namespace {

struct Krylov {
    Eigen::MatrixXcd v;  // n x m orthonormal columns
    Eigen::VectorXd alpha, beta;  // beta[j] couples j and j+1; beta[m-1] is the residual norm
    int m = 0;
};

Krylov lanczos(const SparseMatrix& h, const Vector& start, int m_max) {
    const Eigen::Index n = start.size();
    Krylov k;
    m_max = static_cast<int>(std::min<Eigen::Index>(m_max, n));
    k.v.resize(n, m_max);
    k.alpha.resize(m_max);
    k.beta.resize(m_max);
    k.v.col(0) = start.normalized();
    for (int j = 0; j < m_max; ++j) {
        Vector w = h * k.v.col(j);
        k.alpha[j] = k.v.col(j).dot(w).real();
        // Full reorthogonalization, twice.
        for (int pass = 0; pass < 2; ++pass) w -= k.v.leftCols(j + 1) * (k.v.leftCols(j + 1).adjoint() * w);
        double b = w.norm();
        k.beta[j] = b;
        k.m = j + 1;
        if (j + 1 == m_max || b < 1e-14) break;
        k.v.col(j + 1) = w / b;
    }
    return k;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tridiagonal(const Krylov& k) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k.m, k.m);
    for (int j = 0; j < k.m; ++j) {
        t(j, j) = k.alpha[j];
        if (j + 1 < k.m) t(j, j + 1) = t(j + 1, j) = k.beta[j];
    }
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t);
}

}  // namespace

Eigenpair ground_state(const SparseMatrix& h, double tol, int max_iter) {
    const Eigen::Index n = h.rows();
    if (n == 0) throw std::invalid_argument("empty Hamiltonian");
    Eigenpair out;
    if (static_cast<std::size_t>(n) <= kDenseLimit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(h)};
        out.energy = eig.eigenvalues()[0];
        out.state = eig.eigenvectors().col(0).cast<cplx>();
        out.method = "dense";
        return out;
    }
    out.method = "lanczos";
    Vector v = Vector::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] += 1e-3 * std::cos(0.7 * i);  // break symmetries
    int used = 0;
    while (used < max_iter) {
        Krylov k = lanczos(h, v, 120);
        used += k.m;
        auto eig = tridiagonal(k);
        Eigen::VectorXd y = eig.eigenvectors().col(0);
        v = k.v.leftCols(k.m) * y.cast<cplx>();
        v.normalize();
        Vector r = h * v - eig.eigenvalues()[0] * v;
        if (r.norm() < tol * std::max(1.0, std::abs(eig.eigenvalues()[0]))) {
            out.energy = eig.eigenvalues()[0];
            out.state = v;
            return out;
        }
    }
    throw NumericalError("Lanczos ground state did not converge within " + std::to_string(max_iter) + " iterations");
}

std::vector<double> lowest_eigenvalues(const SparseMatrix& h, int count) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(h), Eigen::EigenvaluesOnly);
    std::vector<double> out;
    for (int k = 0; k < std::min<int>(count, static_cast<int>(h.rows())); ++k) out.push_back(eig.eigenvalues()[k]);
    return out;
}

Propagator::Propagator(const SparseMatrix& h, double krylov_tol) : h_(h), tol_(krylov_tol) {
    if (static_cast<std::size_t>(h.rows()) <= kDenseLimit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(h)};
        evals_ = eig.eigenvalues();
        evecs_ = eig.eigenvectors();
        method_ = "dense";
    } else {
        method_ = "krylov";
    }
}

Vector Propagator::krylov_step(const Vector& psi, double t, double& done) const {
    double nrm = psi.norm();
    Krylov k = lanczos(h_, psi, 40);
    auto eig = tridiagonal(k);
    const Eigen::MatrixXd& q = eig.eigenvectors();
    double tau = t;
    for (int attempt = 0; attempt < 60; ++attempt) {
        Eigen::VectorXcd c(k.m);
        for (int j = 0; j < k.m; ++j) c[j] = std::exp(cplx(0.0, -eig.eigenvalues()[j] * tau)) * q(0, j);
        Eigen::VectorXcd coeff = q.cast<cplx>() * c;
        double err = k.beta[k.m - 1] * std::abs(coeff[k.m - 1]);
        if (err < tol_ || k.beta[k.m - 1] < 1e-14) {
            done = tau;
            return nrm * (k.v.leftCols(k.m) * coeff);
        }
        tau *= 0.5;
    }
    throw NumericalError("Krylov propagation failed to reach the requested accuracy");
}

Vector Propagator::evolve(const Vector& psi, double t) const {
    if (psi.size() != h_.rows()) throw std::invalid_argument("state and Hamiltonian sizes differ");
    if (method_ == "dense") {
        Eigen::VectorXcd c = evecs_.transpose().cast<cplx>() * psi;
        for (Eigen::Index j = 0; j < c.size(); ++j) c[j] *= std::exp(cplx(0.0, -evals_[j] * t));
        return evecs_.cast<cplx>() * c;
    }
    Vector v = psi;
    double remaining = t;
    while (std::abs(remaining) > 0.0) {
        double done = 0.0;
        v = krylov_step(v, remaining, done);
        remaining -= done;
        if (std::abs(remaining) < 1e-15 * std::abs(t)) break;
    }
    return v;
}

namespace {

void check_site(const FockBasis& basis, int site) {
    if (site < 0 || site >= basis.n_sites())
        throw std::invalid_argument("operator site " + std::to_string(site) + " outside the basis");
}

}  // namespace

double expectation(const FockBasis& basis, const Vector& psi, const OperatorSpec& op) {
    if (static_cast<std::size_t>(psi.size()) != basis.size()) throw std::invalid_argument("state size mismatch");
    if (op.kind != OpKind::TotalNumber) check_site(basis, op.site);
    if (op.kind == OpKind::DensityDensity) check_site(basis, op.site2);
    double num = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        double p = std::norm(psi[k]);
        if (p == 0.0) continue;
        auto s = basis.state(k);
        double f = 0.0;
        switch (op.kind) {
            case OpKind::Density: f = s[op.site]; break;
            case OpKind::Pair: f = s[op.site] * (s[op.site] - 1); break;
            case OpKind::Triple: f = s[op.site] * (s[op.site] - 1) * (s[op.site] - 2); break;
            case OpKind::DensityDensity: f = static_cast<double>(s[op.site]) * s[op.site2]; break;
            case OpKind::TotalNumber: f = basis.n_particles(); break;
        }
        num += p * f;
    }
    return num / psi.squaredNorm();
}

double expectation(const SparseMatrix& h, const Vector& psi) {
    return psi.dot(h * psi).real() / psi.squaredNorm();
}

cplx one_body(const FockBasis& basis, const Vector& psi, int i, int j) {
    check_site(basis, i);
    check_site(basis, j);
    cplx sum = 0.0;
    std::vector<int> occ(basis.n_sites());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        auto s = basis.state(k);
        std::copy(s.begin(), s.end(), occ.begin());
        double amp;
        if (i == j) {
            amp = occ[i];
        } else {
            if (occ[j] == 0 || occ[i] == basis.n_max()) continue;
            amp = std::sqrt(static_cast<double>((occ[i] + 1) * occ[j]));
            occ[i] += 1;
            occ[j] -= 1;
        }
        std::size_t to = basis.index(occ);
        sum += std::conj(psi[to]) * amp * psi[k];
    }
    return sum / psi.squaredNorm();
}

Vector to_dense(const SymmetricMPS& state, const FockBasis& basis) {
    if (state.n_sites() != basis.n_sites() || state.total_charge() != basis.n_particles())
        throw std::invalid_argument("MPS and basis describe different systems");
    if (state.n_max() > basis.n_max()) throw std::invalid_argument("basis cutoff below the MPS cutoff");
    Vector out = Vector::Zero(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        auto s = basis.state(k);
        Matrix row = Matrix::Ones(1, 1);
        int q = 0;
        bool zero = false;
        for (int i = 0; i < basis.n_sites() && !zero; ++i) {
            auto it = state.site(i).find(BlockKey{q, s[i]});
            if (it == state.site(i).end()) {
                zero = true;
                break;
            }
            row = row * it->second;
            q += s[i];
        }
        if (!zero) out[k] = row(0, 0);
    }
    return out;
}

Vector embed(const Vector& psi, const FockBasis& from, const FockBasis& to) {
    if (from.n_sites() != to.n_sites() || from.n_particles() != to.n_particles())
        throw std::invalid_argument("embed: bases describe different systems");
    Vector out = Vector::Zero(to.size());
    for (std::size_t k = 0; k < from.size(); ++k) {
        std::size_t j = to.index(from.state(k));
        if (j == FockBasis::npos) {
            if (std::abs(psi[k]) > 0.0) throw std::invalid_argument("embed: amplitude on a state outside the target");
            continue;
        }
        out[j] = psi[k];
    }
    return out;
}

double entanglement_entropy(const FockBasis& basis, const Vector& psi, int bond) {
    if (bond < 0 || bond + 1 >= basis.n_sites()) throw std::out_of_range("bond out of range");
    const int split = bond + 1;
    struct Sector {
        std::map<std::vector<int>, int> rows, cols;
        std::vector<std::tuple<int, int, cplx>> entries;
    };
    std::map<int, Sector> sectors;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        auto s = basis.state(k);
        std::vector<int> l(s.begin(), s.begin() + split), r(s.begin() + split, s.end());
        int q = 0;
        for (int v : l) q += v;
        Sector& sec = sectors[q];
        int ri = sec.rows.try_emplace(l, static_cast<int>(sec.rows.size())).first->second;
        int ci = sec.cols.try_emplace(r, static_cast<int>(sec.cols.size())).first->second;
        sec.entries.emplace_back(ri, ci, psi[k]);
    }
    double norm2 = psi.squaredNorm();
    double ent = 0.0;
    for (auto& [q, sec] : sectors) {
        Matrix m = Matrix::Zero(sec.rows.size(), sec.cols.size());
        for (auto [r, c, v] : sec.entries) m(r, c) = v;
        Eigen::BDCSVD<Matrix> svd(m);
        for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j) {
            double p = svd.singularValues()[j] * svd.singularValues()[j] / norm2;
            if (p > 0.0) ent -= p * std::log(p);
        }
    }
    return ent;
}

Vector fock_state(const FockBasis& basis, std::span<const int> occupations) {
    std::size_t k = basis.index(occupations);
    if (k == FockBasis::npos) throw std::invalid_argument("occupation vector not in the basis");
    Vector v = Vector::Zero(basis.size());
    v[k] = 1.0;
    return v;
}

}  // namespace llq::ed
