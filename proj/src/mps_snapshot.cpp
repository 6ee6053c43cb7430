// Binary checkpoint format (native little-endian):
//
//   char[8]  magic "LLQMPS\0\0"
//   u32      version (1)
//   i32      n_sites, n_max, total_charge, ortho_center (-1 = none)
//   per link l = 0..n_sites:   u32 count, then count x (i32 charge, i32 dim)
//   per site i = 0..n_sites-1: u32 count, then per block
//                              i32 q_left, i32 n, i32 rows, i32 cols,
//                              rows*cols x (f64 re, f64 im), column-major

#include <array>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "llq/mps.hpp"

namespace llq {

namespace {

constexpr std::array<char, 8> kMagic{'L', 'L', 'Q', 'M', 'P', 'S', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("truncated MPS snapshot");
    return v;
}

}  // namespace

void SymmetricMPS::write(std::ostream& os) const {
    os.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(os, kVersion);
    put<std::int32_t>(os, n_sites());
    put<std::int32_t>(os, n_max_);
    put<std::int32_t>(os, total_charge_);
    put<std::int32_t>(os, center_.value_or(-1));
    for (const auto& link : links_) {
        put<std::uint32_t>(os, static_cast<std::uint32_t>(link.size()));
        for (auto [q, d] : link) {
            put<std::int32_t>(os, q);
            put<std::int32_t>(os, d);
        }
    }
    for (const auto& site : sites_) {
        put<std::uint32_t>(os, static_cast<std::uint32_t>(site.size()));
        for (const auto& [key, m] : site) {
            put<std::int32_t>(os, key.q_left);
            put<std::int32_t>(os, key.n);
            put<std::int32_t>(os, static_cast<std::int32_t>(m.rows()));
            put<std::int32_t>(os, static_cast<std::int32_t>(m.cols()));
            for (Eigen::Index k = 0; k < m.size(); ++k) {
                put<double>(os, m.data()[k].real());
                put<double>(os, m.data()[k].imag());
            }
        }
    }
    if (!os) throw std::runtime_error("failed writing MPS snapshot");
}

SymmetricMPS SymmetricMPS::read(std::istream& is) {
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw std::runtime_error("not an MPS snapshot");
    auto version = get<std::uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("unsupported MPS snapshot version " + std::to_string(version));
    int m = get<std::int32_t>(is);
    int n_max = get<std::int32_t>(is);
    int charge = get<std::int32_t>(is);
    int center = get<std::int32_t>(is);
    SymmetricMPS s(m, n_max, charge);
    for (int l = 0; l <= m; ++l) {
        auto count = get<std::uint32_t>(is);
        for (std::uint32_t k = 0; k < count; ++k) {
            int q = get<std::int32_t>(is);
            s.links_[l][q] = get<std::int32_t>(is);
        }
    }
    for (int i = 0; i < m; ++i) {
        auto count = get<std::uint32_t>(is);
        for (std::uint32_t k = 0; k < count; ++k) {
            BlockKey key{get<std::int32_t>(is), get<std::int32_t>(is)};
            int rows = get<std::int32_t>(is);
            int cols = get<std::int32_t>(is);
            if (rows < 0 || cols < 0) throw std::runtime_error("corrupt MPS snapshot block shape");
            Matrix blk(rows, cols);
            for (Eigen::Index e = 0; e < blk.size(); ++e) {
                double re = get<double>(is);
                double im = get<double>(is);
                blk.data()[e] = cplx(re, im);
            }
            s.sites_[i][key] = std::move(blk);
        }
    }
    if (center >= 0) s.center_ = center;
    s.check_structure();
    return s;
}

}  // namespace llq
