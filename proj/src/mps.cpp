#include "llq/mps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

#include <lapacke.h>

#include "llq/error.hpp"

namespace llq {

namespace {

using Env = Environments::Env;

constexpr double kDegeneracyTol = 1e-12;
// Schmidt values below this fraction of the largest one are numerically zero
// and never kept, whatever the policy says.
constexpr double kZeroSchmidt = 1e-15;

Matrix block_or_zero(const Env& env, std::pair<int, int> key, Eigen::Index rows, Eigen::Index cols) {
    auto it = env.find(key);
    if (it != env.end()) return it->second;
    return Matrix::Zero(rows, cols);
}

void add_into(Env& env, std::pair<int, int> key, const Matrix& value) {
    auto [it, inserted] = env.try_emplace(key, value);
    if (!inserted) it->second += value;
}

Env identity_env(const LinkSectors& link) {
    Env env;
    for (auto [q, d] : link) env.emplace(std::pair{q, q}, Matrix::Identity(d, d));
    return env;
}

// Range of blocks with a fixed left charge.
template <typename Tensor>
auto blocks_with_left(Tensor& t, int q) {
    return std::pair{t.lower_bound(BlockKey{q, std::numeric_limits<int>::min()}),
                     t.lower_bound(BlockKey{q + 1, std::numeric_limits<int>::min()})};
}

bool is_identity(const Matrix* op) { return op == nullptr; }

// env over link l -> env over link l+1, absorbing site tensors (bra, ket) and
// an optional operator acting on the ket (nullptr = identity).
Env transfer_left(const Env& env, const SiteTensor& bra, const SiteTensor& ket, const Matrix* op) {
    Env out;
    for (const auto& [key, e] : env) {
        auto [qb, qk] = key;
        auto [kb, ke] = blocks_with_left(ket, qk);
        for (auto kit = kb; kit != ke; ++kit) {
            int nk = kit->first.n;
            const Matrix& ak = kit->second;
            Matrix e_ak;  // computed lazily
            bool have = false;
            auto [bb, be] = blocks_with_left(bra, qb);
            for (auto bit = bb; bit != be; ++bit) {
                int nb = bit->first.n;
                cplx c = is_identity(op) ? (nb == nk ? cplx(1.0) : cplx(0.0)) : (*op)(nb, nk);
                if (c == cplx(0.0)) continue;
                if (!have) {
                    e_ak = e * ak;
                    have = true;
                }
                add_into(out, {qb + nb, qk + nk}, c * (bit->second.adjoint() * e_ak));
            }
        }
    }
    return out;
}

// env over link l+1 -> env over link l.
Env transfer_right(const Env& env, const SiteTensor& bra, const SiteTensor& ket, const Matrix* op) {
    Env out;
    for (const auto& [kkey, ak] : ket) {
        for (const auto& [bkey, ab] : bra) {
            cplx c = is_identity(op) ? (bkey.n == kkey.n ? cplx(1.0) : cplx(0.0)) : (*op)(bkey.n, kkey.n);
            if (c == cplx(0.0)) continue;
            auto it = env.find({bkey.q_left + bkey.n, kkey.q_left + kkey.n});
            if (it == env.end()) continue;
            add_into(out, {bkey.q_left, kkey.q_left}, c * (ab.conjugate() * it->second * ak.transpose()));
        }
    }
    return out;
}

cplx close(const Env& left, const Env& right) {
    cplx sum = 0.0;
    for (const auto& [key, l] : left) {
        auto it = right.find(key);
        if (it == right.end()) continue;
        sum += l.cwiseProduct(it->second).sum();
    }
    return sum;
}

// Eigenvalues (ascending) of a Hermitian matrix; eigenvectors overwrite `a`.
Eigen::VectorXd hermitian_eigen(Matrix& a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    Eigen::VectorXd w(n);
    if (n == 0) return w;
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, reinterpret_cast<lapack_complex_double*>(a.data()),
                                     n, w.data());
    if (info != 0) {
        // Fall back to the slower but unconditional Jacobi-free solver.
        Eigen::SelfAdjointEigenSolver<Matrix> eig(a.selfadjointView<Eigen::Upper>());
        if (eig.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
        a = eig.eigenvectors();
        return eig.eigenvalues();
    }
    return w;
}

void check_local_op(const Matrix& op, int n_max) {
    if (op.rows() != n_max + 1 || op.cols() != n_max + 1)
        throw std::invalid_argument("local operator dimension " + std::to_string(op.rows()) + "x" +
                                    std::to_string(op.cols()) + " does not match n_max + 1 = " +
                                    std::to_string(n_max + 1));
}

void check_site(const SymmetricMPS& s, int i) {
    if (i < 0 || i >= s.n_sites()) throw std::out_of_range("site index " + std::to_string(i) + " out of range");
}

}  // namespace

// ---------------------------------------------------------------------------

void TruncationPolicy::validate() const {
    if (chi_max < 1) throw ConfigError("chi_max must be >= 1");
    if (!(svd_cutoff >= 0.0 && svd_cutoff < 1.0)) throw ConfigError("svd_cutoff must lie in [0, 1)");
}

double BondSpectrum::entropy() const {
    double s = 0.0;
    for (double v : values) {
        double p = v * v;
        if (p > 0.0) s -= p * std::log(p);
    }
    return s;
}

TwoSiteGate::TwoSiteGate(Matrix m, int n_max, double tol) : m_(std::move(m)), n_max_(n_max) {
    int d = n_max + 1;
    if (m_.rows() != d * d || m_.cols() != d * d)
        throw std::invalid_argument("two-site gate must be (n_max+1)^2 square");
    for (int r = 0; r < d * d; ++r)
        for (int c = 0; c < d * d; ++c)
            if ((r / d + r % d) != (c / d + c % d) && std::abs(m_(r, c)) > tol)
                throw std::invalid_argument("two-site gate does not conserve particle number");
}

// ---------------------------------------------------------------------------

SymmetricMPS::SymmetricMPS(int n_sites, int n_max, int total_charge)
    : n_max_(n_max),
      total_charge_(total_charge),
      sites_(n_sites),
      links_(n_sites + 1),
      spectra_(n_sites > 0 ? n_sites - 1 : 0) {
    if (n_sites < 1) throw std::invalid_argument("MPS needs at least one site");
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    if (total_charge < 0) throw std::invalid_argument("total charge must be >= 0");
}

int SymmetricMPS::link_dim(int l) const {
    int d = 0;
    for (auto [q, dim] : links_.at(l)) d += dim;
    return d;
}

std::vector<int> SymmetricMPS::bond_dims() const {
    std::vector<int> out;
    for (int b = 0; b + 1 < n_sites(); ++b) out.push_back(bond_dim(b));
    return out;
}

int SymmetricMPS::max_bond_dim() const {
    int m = 1;
    for (int b = 0; b + 1 < n_sites(); ++b) m = std::max(m, bond_dim(b));
    return m;
}

const BondSpectrum* SymmetricMPS::cached_spectrum(int bond) const {
    const auto& s = spectra_.at(bond);
    return s ? &*s : nullptr;
}

void SymmetricMPS::left_orthogonalize(int i) {
    SiteTensor& a = sites_[i];
    SiteTensor& next = sites_[i + 1];
    LinkSectors& link = links_[i + 1];
    const LinkSectors& left = links_[i];

    std::map<int, std::vector<BlockKey>> groups;
    for (const auto& [key, m] : a) groups[key.q_left + key.n].push_back(key);

    LinkSectors new_link;
    SiteTensor new_next;
    for (auto [qc, dim] : link) {
        auto g = groups.find(qc);
        if (g == groups.end()) continue;  // sector unreachable from the left
        Eigen::Index rows = 0;
        for (const auto& key : g->second) rows += left.at(key.q_left);
        Matrix stacked(rows, dim);
        Eigen::Index off = 0;
        for (const auto& key : g->second) {
            const Matrix& blk = a.at(key);
            stacked.middleRows(off, blk.rows()) = blk;
            off += blk.rows();
        }
        Eigen::Index k = std::min<Eigen::Index>(rows, dim);
        Eigen::HouseholderQR<Matrix> qr(stacked);
        Matrix q = qr.householderQ() * Matrix::Identity(rows, k);
        Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        off = 0;
        for (const auto& key : g->second) {
            Eigen::Index h = left.at(key.q_left);
            a[key] = q.middleRows(off, h);
            off += h;
        }
        new_link[qc] = static_cast<int>(k);
        auto [nb, ne] = blocks_with_left(next, qc);
        for (auto it = nb; it != ne; ++it) new_next[it->first] = r * it->second;
    }
    // Drop blocks whose right charge vanished.
    for (auto it = a.begin(); it != a.end();) {
        if (!new_link.count(it->first.q_left + it->first.n))
            it = a.erase(it);
        else
            ++it;
    }
    link = std::move(new_link);
    next = std::move(new_next);
}

void SymmetricMPS::right_orthogonalize(int i) {
    SiteTensor& a = sites_[i];
    SiteTensor& prev = sites_[i - 1];
    LinkSectors& link = links_[i];
    const LinkSectors& right = links_[i + 1];

    LinkSectors new_link;
    SiteTensor new_prev;
    for (auto [ql, dim] : link) {
        auto [b, e] = blocks_with_left(a, ql);
        if (b == e) continue;
        Eigen::Index cols = 0;
        for (auto it = b; it != e; ++it) cols += right.at(ql + it->first.n);
        Matrix wide(dim, cols);
        Eigen::Index off = 0;
        for (auto it = b; it != e; ++it) {
            wide.middleCols(off, it->second.cols()) = it->second;
            off += it->second.cols();
        }
        Eigen::Index k = std::min<Eigen::Index>(dim, cols);
        Matrix adj = wide.adjoint();
        Eigen::HouseholderQR<Matrix> qr(adj);
        Matrix q = qr.householderQ() * Matrix::Identity(cols, k);
        Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        Matrix qa = q.adjoint();     // k x cols, orthonormal rows
        Matrix ra = r.adjoint();     // dim x k
        off = 0;
        for (auto it = b; it != e; ++it) {
            Eigen::Index w = it->second.cols();
            it->second = qa.middleCols(off, w);
            off += w;
        }
        new_link[ql] = static_cast<int>(k);
        for (const auto& [key, m] : prev)
            if (key.q_left + key.n == ql) new_prev[key] = m * ra;
    }
    for (auto it = a.begin(); it != a.end();) {
        if (!new_link.count(it->first.q_left))
            it = a.erase(it);
        else
            ++it;
    }
    link = std::move(new_link);
    prev = std::move(new_prev);
}

void SymmetricMPS::canonicalize(int site) {
    check_site(*this, site);
    for (int i = 0; i < site; ++i) left_orthogonalize(i);
    for (int i = n_sites() - 1; i > site; --i) right_orthogonalize(i);
    center_ = site;
}

void SymmetricMPS::move_center(int site) {
    check_site(*this, site);
    if (!center_) {
        canonicalize(site);
        return;
    }
    for (int c = *center_; c < site; ++c) left_orthogonalize(c);
    for (int c = *center_; c > site; --c) right_orthogonalize(c);
    center_ = site;
}

double SymmetricMPS::norm() const {
    if (center_) {
        double s = 0.0;
        for (const auto& [key, m] : sites_[*center_]) s += m.squaredNorm();
        return std::sqrt(s);
    }
    return std::sqrt(std::max(0.0, overlap(*this, *this).real()));
}

double SymmetricMPS::normalize() {
    double nrm = norm();
    if (!(nrm > 0.0)) throw NumericalError("cannot normalize a zero state");
    int target = center_.value_or(0);
    for (auto& [key, m] : sites_[target]) m /= nrm;
    return nrm;
}

void SymmetricMPS::raise_cutoff(int n_max) {
    if (n_max < n_max_) throw std::invalid_argument("raise_cutoff cannot lower the local cutoff");
    n_max_ = n_max;
}

void SymmetricMPS::check_structure() const {
    int m = n_sites();
    if (links_.front().size() != 1 || links_.front().begin()->first != 0 || links_.front().begin()->second != 1)
        throw std::logic_error("left boundary link must carry charge 0 with dimension 1");
    if (links_.back().size() != 1 || links_.back().begin()->first != total_charge_ ||
        links_.back().begin()->second != 1)
        throw std::logic_error("right boundary link must carry the total charge with dimension 1");
    for (int i = 0; i < m; ++i) {
        for (const auto& [key, blk] : sites_[i]) {
            if (key.n < 0 || key.n > n_max_)
                throw std::logic_error("block occupation outside [0, n_max] at site " + std::to_string(i));
            auto l = links_[i].find(key.q_left);
            auto r = links_[i + 1].find(key.q_left + key.n);
            if (l == links_[i].end() || r == links_[i + 1].end())
                throw std::logic_error("block charges absent from links at site " + std::to_string(i));
            if (blk.rows() != l->second || blk.cols() != r->second)
                throw std::logic_error("block shape mismatch at site " + std::to_string(i));
        }
    }
}

double SymmetricMPS::left_orthogonality_error(int i) const {
    Env id = identity_env(links_.at(i));
    Env out = transfer_left(id, sites_.at(i), sites_.at(i), nullptr);
    double err = 0.0;
    for (auto [q, d] : links_.at(i + 1)) {
        Matrix e = block_or_zero(out, {q, q}, d, d);
        err = std::max(err, (e - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
    }
    return err;
}

double SymmetricMPS::right_orthogonality_error(int i) const {
    Env id = identity_env(links_.at(i + 1));
    Env out = transfer_right(id, sites_.at(i), sites_.at(i), nullptr);
    double err = 0.0;
    for (auto [q, d] : links_.at(i)) {
        Matrix e = block_or_zero(out, {q, q}, d, d);
        err = std::max(err, (e - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
    }
    return err;
}

// ---------------------------------------------------------------------------

SymmetricMPS init_fock(std::span<const int> occupations, int n_max) {
    if (occupations.empty()) throw std::invalid_argument("empty occupation list");
    int total = 0;
    for (int n : occupations) {
        if (n < 0) throw std::invalid_argument("negative occupation");
        if (n > n_max)
            throw std::invalid_argument("occupation " + std::to_string(n) + " exceeds n_max " +
                                        std::to_string(n_max));
        total += n;
    }
    int m = static_cast<int>(occupations.size());
    SymmetricMPS s(m, n_max, total);
    int q = 0;
    for (int i = 0; i < m; ++i) {
        s.link_data(i) = {{q, 1}};
        s.site_data(i)[BlockKey{q, occupations[i]}] = Matrix::Ones(1, 1);
        q += occupations[i];
    }
    s.link_data(m) = {{q, 1}};
    s.set_center(0);
    return s;
}

TwoSiteUpdate apply_two_site(SymmetricMPS& s, int bond, const TwoSiteGate& gate, const TruncationPolicy& policy,
                             Sweep sweep) {
    if (bond < 0 || bond + 1 >= s.n_sites()) throw std::out_of_range("bond index " + std::to_string(bond) + " out of range");
    if (gate.n_max() != s.n_max()) throw std::invalid_argument("gate cutoff does not match the state");
    policy.validate();
    if (!s.center_ || (*s.center_ != bond && *s.center_ != bond + 1))
        s.move_center(sweep == Sweep::Right ? bond : bond + 1);

    const int nmax = s.n_max();
    const SiteTensor& a = s.sites_[bond];
    const SiteTensor& b = s.sites_[bond + 1];
    const LinkSectors& link_l = s.links_[bond];
    const LinkSectors& link_r = s.links_[bond + 2];

    using Key3 = std::tuple<int, int, int>;  // (q_left, n1, n2)
    std::map<Key3, Matrix> theta;
    for (const auto& [ka, ma] : a) {
        auto [bb, be] = blocks_with_left(b, ka.q_left + ka.n);
        for (auto it = bb; it != be; ++it) theta[{ka.q_left, ka.n, it->first.n}] = ma * it->second;
    }

    std::map<Key3, Matrix> out;
    for (const auto& [k, t] : theta) {
        auto [ql, n1, n2] = k;
        int tot = n1 + n2;
        for (int m1 = std::max(0, tot - nmax); m1 <= std::min(nmax, tot); ++m1) {
            int m2 = tot - m1;
            cplx c = gate(m1, m2, n1, n2);
            if (c == cplx(0.0)) continue;
            auto [it, ins] = out.try_emplace({ql, m1, m2}, c * t);
            if (!ins) it->second += c * t;
        }
    }

    // Group by the middle charge and decompose each sector.
    struct Sector {
        std::vector<std::pair<int, int>> rows;  // (q_left, m1)
        std::vector<std::pair<int, int>> cols;  // (m2, q_right)
        Matrix u;
        Eigen::VectorXd s;
        Matrix vh;
    };
    std::map<int, Sector> sectors;
    for (const auto& [k, t] : out) {
        auto [ql, m1, m2] = k;
        Sector& sec = sectors[ql + m1];
        std::pair<int, int> r{ql, m1}, c{m2, ql + m1 + m2};
        if (std::find(sec.rows.begin(), sec.rows.end(), r) == sec.rows.end()) sec.rows.push_back(r);
        if (std::find(sec.cols.begin(), sec.cols.end(), c) == sec.cols.end()) sec.cols.push_back(c);
    }
    for (auto& [qm, sec] : sectors) {
        std::sort(sec.rows.begin(), sec.rows.end());
        std::sort(sec.cols.begin(), sec.cols.end());
        Eigen::Index nr = 0, nc = 0;
        std::vector<Eigen::Index> roff, coff;
        for (auto [ql, m1] : sec.rows) {
            roff.push_back(nr);
            nr += link_l.at(ql);
        }
        for (auto [m2, qr] : sec.cols) {
            coff.push_back(nc);
            nc += link_r.at(qr);
        }
        Matrix mat = Matrix::Zero(nr, nc);
        for (std::size_t i = 0; i < sec.rows.size(); ++i)
            for (std::size_t j = 0; j < sec.cols.size(); ++j) {
                auto [ql, m1] = sec.rows[i];
                auto [m2, qr] = sec.cols[j];
                auto it = out.find({ql, m1, m2});
                if (it == out.end()) continue;
                mat.block(roff[i], coff[j], it->second.rows(), it->second.cols()) = it->second;
            }
        // Eigendecomposition of the Gram matrix on the side that stays
        // isometric; the other factor is a plain projection, so no division
        // by small singular values is needed.
        if (sweep == Sweep::Right) {
            Matrix gram = mat * mat.adjoint();
            Eigen::VectorXd w = hermitian_eigen(gram);
            sec.u = gram.rowwise().reverse();
            sec.s = w.reverse().cwiseMax(0.0).cwiseSqrt();
            sec.vh = sec.u.adjoint() * mat;  // diag(s) V^+
        } else {
            Matrix gram = mat.adjoint() * mat;
            Eigen::VectorXd w = hermitian_eigen(gram);
            Matrix v = gram.rowwise().reverse();
            sec.s = w.reverse().cwiseMax(0.0).cwiseSqrt();
            sec.u = mat * v;  // U diag(s)
            sec.vh = v.adjoint();
        }
    }

    struct Entry {
        double value;
        int qm;
    };
    std::vector<Entry> all;
    double norm2 = 0.0;
    for (const auto& [qm, sec] : sectors)
        for (Eigen::Index k = 0; k < sec.s.size(); ++k) {
            all.push_back({sec.s[k], qm});
            norm2 += sec.s[k] * sec.s[k];
        }
    if (!(norm2 > 0.0)) throw NumericalError("two-site update annihilated the state");
    std::stable_sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) { return x.value > y.value; });

    const double smax = all.front().value;
    const double floor = smax * std::max(policy.svd_cutoff, kZeroSchmidt);
    std::size_t keep = std::min<std::size_t>(policy.chi_max, all.size());
    while (keep > 1 && all[keep - 1].value < floor) --keep;
    const double nrm = std::sqrt(norm2);
    while (keep < all.size() && all[keep].value >= floor &&
           (all[keep - 1].value - all[keep].value) <= kDegeneracyTol * nrm)
        ++keep;

    double kept2 = 0.0;
    std::map<int, int> kept_per_sector;
    BondSpectrum spectrum;
    for (std::size_t k = 0; k < keep; ++k) {
        kept2 += all[k].value * all[k].value;
        ++kept_per_sector[all[k].qm];
    }
    const double scale = 1.0 / std::sqrt(kept2);
    for (std::size_t k = 0; k < keep; ++k) {
        spectrum.values.push_back(all[k].value * scale);
        spectrum.charges.push_back(all[k].qm);
    }

    TwoSiteUpdate result;
    result.truncation_weight = std::max(0.0, 1.0 - kept2 / norm2);
    result.norm = nrm;
    result.kept = static_cast<int>(keep);

    SiteTensor new_a, new_b;
    LinkSectors new_link;
    for (const auto& [qm, sec] : sectors) {
        auto kit = kept_per_sector.find(qm);
        if (kit == kept_per_sector.end()) continue;
        int k = kit->second;
        new_link[qm] = k;
        // The non-isometric factor already carries the singular values.
        Eigen::Index off = 0;
        for (auto [ql, m1] : sec.rows) {
            Eigen::Index h = link_l.at(ql);
            Matrix blk = sec.u.block(off, 0, h, k);
            if (sweep == Sweep::Left) blk *= scale;
            new_a[BlockKey{ql, m1}] = std::move(blk);
            off += h;
        }
        off = 0;
        for (auto [m2, qr] : sec.cols) {
            Eigen::Index w = link_r.at(qr);
            Matrix blk = sec.vh.block(0, off, k, w);
            if (sweep == Sweep::Right) blk *= scale;
            new_b[BlockKey{qm, m2}] = std::move(blk);
            off += w;
        }
    }
    s.sites_[bond] = std::move(new_a);
    s.sites_[bond + 1] = std::move(new_b);
    s.links_[bond + 1] = std::move(new_link);
    s.spectra_[bond] = std::move(spectrum);
    s.center_ = sweep == Sweep::Right ? bond + 1 : bond;
    return result;
}

BondSpectrum bond_spectrum(SymmetricMPS& s, int bond) {
    if (bond < 0 || bond + 1 >= s.n_sites()) throw std::out_of_range("bond index out of range");
    s.move_center(bond);
    const SiteTensor& a = s.site(bond);
    const LinkSectors& left = s.link(bond);
    std::map<int, std::vector<BlockKey>> groups;
    for (const auto& [key, m] : a) groups[key.q_left + key.n].push_back(key);

    std::vector<std::pair<double, int>> vals;
    double norm2 = 0.0;
    for (auto [qr, dim] : s.link(bond + 1)) {
        auto g = groups.find(qr);
        if (g == groups.end()) continue;
        Eigen::Index rows = 0;
        for (const auto& key : g->second) rows += left.at(key.q_left);
        Matrix stacked(rows, dim);
        Eigen::Index off = 0;
        for (const auto& key : g->second) {
            const Matrix& blk = a.at(key);
            stacked.middleRows(off, blk.rows()) = blk;
            off += blk.rows();
        }
        Eigen::BDCSVD<Matrix> svd(stacked);
        for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
            double v = svd.singularValues()[k];
            vals.push_back({v, qr});
            norm2 += v * v;
        }
    }
    std::stable_sort(vals.begin(), vals.end(), [](auto& x, auto& y) { return x.first > y.first; });
    BondSpectrum out;
    double nrm = std::sqrt(norm2);
    for (auto [v, q] : vals) {
        if (v <= kZeroSchmidt * nrm) continue;
        out.values.push_back(v / nrm);
        out.charges.push_back(q);
    }
    return out;
}

double entanglement_entropy(SymmetricMPS& s, int bond) { return bond_spectrum(s, bond).entropy(); }

cplx overlap(const SymmetricMPS& bra, const SymmetricMPS& ket) {
    if (bra.n_sites() != ket.n_sites()) throw std::invalid_argument("overlap: site counts differ");
    if (bra.total_charge() != ket.total_charge()) throw std::invalid_argument("overlap: total charges differ");
    Env env{{{0, 0}, Matrix::Ones(1, 1)}};
    for (int i = 0; i < ket.n_sites(); ++i) env = transfer_left(env, bra.site(i), ket.site(i), nullptr);
    auto it = env.find({bra.total_charge(), ket.total_charge()});
    return it == env.end() ? cplx(0.0) : it->second(0, 0);
}

namespace {

// Contract sites [lo, hi] with identity environments outside, valid when the
// orthogonality center lies inside [lo, hi].
cplx local_contraction(const SymmetricMPS& s, int lo, int hi, const std::map<int, const Matrix*>& ops) {
    Env env = identity_env(s.link(lo));
    for (int i = lo; i <= hi; ++i) {
        auto it = ops.find(i);
        env = transfer_left(env, s.site(i), s.site(i), it == ops.end() ? nullptr : it->second);
    }
    return close(env, identity_env(s.link(hi + 1)));
}

}  // namespace

cplx expectation_onsite(const SymmetricMPS& s, int site, const Matrix& op) {
    check_site(s, site);
    check_local_op(op, s.n_max());
    int c = s.ortho_center().value_or(-1);
    int lo = c < 0 ? 0 : std::min(site, c);
    int hi = c < 0 ? s.n_sites() - 1 : std::max(site, c);
    return local_contraction(s, lo, hi, {{site, &op}});
}

cplx expectation_two_point(const SymmetricMPS& s, int i, int j, const Matrix& op_i, const Matrix& op_j) {
    check_site(s, i);
    check_site(s, j);
    if (i == j) throw std::invalid_argument("two-point expectation needs distinct sites; use a composite onsite operator");
    check_local_op(op_i, s.n_max());
    check_local_op(op_j, s.n_max());
    int c = s.ortho_center().value_or(-1);
    int lo = c < 0 ? 0 : std::min({i, j, c});
    int hi = c < 0 ? s.n_sites() - 1 : std::max({i, j, c});
    return local_contraction(s, lo, hi, {{i, &op_i}, {j, &op_j}});
}

// ---------------------------------------------------------------------------

namespace local_ops {

Matrix identity(int n_max) { return Matrix::Identity(n_max + 1, n_max + 1); }

Matrix number(int n_max) {
    Matrix m = Matrix::Zero(n_max + 1, n_max + 1);
    for (int n = 0; n <= n_max; ++n) m(n, n) = n;
    return m;
}

Matrix annihilation(int n_max) {
    Matrix m = Matrix::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
    return m;
}

Matrix creation(int n_max) { return annihilation(n_max).adjoint(); }

Matrix diagonal(int n_max, double (*f)(int)) {
    Matrix m = Matrix::Zero(n_max + 1, n_max + 1);
    for (int n = 0; n <= n_max; ++n) m(n, n) = f(n);
    return m;
}

Matrix pair(int n_max) {
    return diagonal(n_max, [](int n) { return static_cast<double>(n) * (n - 1); });
}

Matrix triple(int n_max) {
    return diagonal(n_max, [](int n) { return static_cast<double>(n) * (n - 1) * (n - 2); });
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace local_ops

// ---------------------------------------------------------------------------

Environments::Environments(const SymmetricMPS& state) : Environments(state, state) {}

Environments::Environments(const SymmetricMPS& bra, const SymmetricMPS& ket) : bra_(&bra), ket_(&ket) {
    if (bra.n_sites() != ket.n_sites()) throw std::invalid_argument("environments: site counts differ");
    if (bra.total_charge() != ket.total_charge()) throw std::invalid_argument("environments: total charges differ");
    int m = ket.n_sites();
    left_.resize(m + 1);
    right_.resize(m + 1);
    left_[0] = {{{0, 0}, Matrix::Ones(1, 1)}};
    for (int i = 0; i < m; ++i) left_[i + 1] = transfer_left(left_[i], bra.site(i), ket.site(i), nullptr);
    right_[m] = {{{bra.total_charge(), ket.total_charge()}, Matrix::Ones(1, 1)}};
    for (int i = m - 1; i >= 0; --i) right_[i] = transfer_right(right_[i + 1], bra.site(i), ket.site(i), nullptr);
}

cplx Environments::norm2() const { return close(left_.back(), right_.back()); }

cplx Environments::onsite(int site, const Matrix& op) const {
    check_site(*ket_, site);
    check_local_op(op, ket_->n_max());
    return close(transfer_left(left_[site], bra_->site(site), ket_->site(site), &op), right_[site + 1]);
}

cplx Environments::two_point(int i, int j, const Matrix& op_i, const Matrix& op_j) const {
    check_site(*ket_, i);
    check_site(*ket_, j);
    if (i == j) throw std::invalid_argument("two-point expectation needs distinct sites");
    check_local_op(op_i, ket_->n_max());
    check_local_op(op_j, ket_->n_max());
    const Matrix* first = &op_i;
    const Matrix* second = &op_j;
    if (i > j) {
        std::swap(i, j);
        std::swap(first, second);
    }
    Env env = transfer_left(left_[i], bra_->site(i), ket_->site(i), first);
    for (int k = i + 1; k < j; ++k) env = transfer_left(env, bra_->site(k), ket_->site(k), nullptr);
    env = transfer_left(env, bra_->site(j), ket_->site(j), second);
    return close(env, right_[j + 1]);
}

std::vector<cplx> Environments::correlation_row(int anchor, const Matrix& op_anchor, const Matrix& op_j,
                                                const Matrix& op_self) const {
    check_site(*ket_, anchor);
    check_local_op(op_anchor, ket_->n_max());
    check_local_op(op_j, ket_->n_max());
    check_local_op(op_self, ket_->n_max());
    int m = ket_->n_sites();
    std::vector<cplx> row(m);
    row[anchor] = onsite(anchor, op_self);

    Env env = transfer_left(left_[anchor], bra_->site(anchor), ket_->site(anchor), &op_anchor);
    for (int j = anchor + 1; j < m; ++j) {
        row[j] = close(transfer_left(env, bra_->site(j), ket_->site(j), &op_j), right_[j + 1]);
        env = transfer_left(env, bra_->site(j), ket_->site(j), nullptr);
    }
    env = transfer_right(right_[anchor + 1], bra_->site(anchor), ket_->site(anchor), &op_anchor);
    for (int j = anchor - 1; j >= 0; --j) {
        row[j] = close(transfer_left(left_[j], bra_->site(j), ket_->site(j), &op_j), env);
        env = transfer_right(env, bra_->site(j), ket_->site(j), nullptr);
    }
    return row;
}

}  // namespace llq
