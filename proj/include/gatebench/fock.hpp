#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gatebench/matrix.hpp"

namespace gatebench {

// ---------------------------------------------------------------------------
// Occupation keys: 4 bits per mode packed into a 64-bit word (mode 0 in the
// lowest nibble), so states over up to 16 modes order and hash cheaply.
// ---------------------------------------------------------------------------

namespace fock {

inline std::uint64_t encode(const std::vector<int>& occ) {
  if (occ.size() > 16) throw std::invalid_argument("fock: more than 16 modes");
  std::uint64_t key = 0;
  for (std::size_t m = 0; m < occ.size(); ++m) {
    if (occ[m] < 0 || occ[m] > 15) throw std::invalid_argument("fock: occupation out of range");
    key |= static_cast<std::uint64_t>(occ[m]) << (4 * m);
  }
  return key;
}

inline int occupation(std::uint64_t key, std::size_t mode) {
  return static_cast<int>((key >> (4 * mode)) & 0xF);
}

inline std::vector<int> decode(std::uint64_t key, std::size_t num_modes) {
  std::vector<int> occ(num_modes);
  for (std::size_t m = 0; m < num_modes; ++m) occ[m] = occupation(key, m);
  return occ;
}

inline int total_photons(std::uint64_t key) {
  int n = 0;
  while (key) {
    n += static_cast<int>(key & 0xF);
    key >>= 4;
  }
  return n;
}

}  // namespace fock

/// Sparse multimode bosonic state: occupation vector → complex amplitude.
/// Ordered storage keeps all accumulation orders deterministic.
class FockState {
 public:
  explicit FockState(std::size_t num_modes, int max_total_photons = 6)
      : num_modes_(num_modes), max_total_photons_(max_total_photons) {
    if (num_modes == 0 || num_modes > 16)
      throw std::invalid_argument("FockState: mode count must be in [1,16]");
  }

  std::size_t num_modes() const { return num_modes_; }
  int max_total_photons() const { return max_total_photons_; }
  std::size_t term_count() const { return amps_.size(); }
  const std::map<std::uint64_t, cplx>& terms() const { return amps_; }

  void add_term(const std::vector<int>& occ, cplx amp) {
    if (occ.size() != num_modes_) throw std::invalid_argument("FockState: mode count mismatch");
    const std::uint64_t key = fock::encode(occ);
    if (fock::total_photons(key) > max_total_photons_)
      throw std::invalid_argument("FockState: term exceeds the photon-number cutoff");
    amps_[key] += amp;
  }

  cplx amplitude(const std::vector<int>& occ) const {
    const auto it = amps_.find(fock::encode(occ));
    return it == amps_.end() ? cplx(0.0, 0.0) : it->second;
  }

  double norm2() const {
    double s = 0.0;
    for (const auto& [key, amp] : amps_) s += std::norm(amp);
    return s;
  }

  FockState& operator*=(cplx s) {
    for (auto& [key, amp] : amps_) amp *= s;
    return *this;
  }

  FockState& operator+=(const FockState& o) {
    if (o.num_modes_ != num_modes_) throw std::invalid_argument("FockState: mode count mismatch");
    for (const auto& [key, amp] : o.amps_) amps_[key] += amp;
    return *this;
  }

  void prune(double tol = 1e-15) {
    for (auto it = amps_.begin(); it != amps_.end();)
      it = std::abs(it->second) < tol ? amps_.erase(it) : std::next(it);
  }

  friend class FockEvolver;

 private:
  std::size_t num_modes_;
  int max_total_photons_;
  std::map<std::uint64_t, cplx> amps_;
};

/// Second-quantized evolution through a linear-optical transfer matrix M:
/// each creation operator is substituted as a_m† → Σ_k M_km a_k† and the
/// product re-expanded, which reproduces the permanent-weighted output
/// amplitudes with all bosonic √n! factors.
class FockEvolver {
 public:
  explicit FockEvolver(const CMat& transfer, double coeff_tol = 1e-15) {
    if (transfer.rows() != transfer.cols())
      throw std::invalid_argument("FockEvolver: transfer matrix must be square");
    n_ = transfer.rows();
    cols_.resize(n_);
    for (std::size_t m = 0; m < n_; ++m)
      for (std::size_t k = 0; k < n_; ++k) {
        const cplx c = transfer(k, m);
        if (std::abs(c) > coeff_tol) cols_[m].push_back({k, c});
      }
  }

  FockState evolve(const FockState& in) const {
    if (in.num_modes() != n_) throw std::invalid_argument("FockEvolver: mode count mismatch");
    FockState out(in.num_modes(), in.max_total_photons());
    for (const auto& [key, amp] : in.terms()) {
      if (fock::total_photons(key) > in.max_total_photons())
        throw std::runtime_error("FockEvolver: input exceeds the photon-number cutoff");
      // Normalization of the input occupation ket.
      double norm = 1.0;
      for (std::size_t m = 0; m < n_; ++m)
        for (int p = 2; p <= fock::occupation(key, m); ++p) norm *= static_cast<double>(p);
      std::map<std::uint64_t, cplx> poly{{0, amp / std::sqrt(norm)}};
      for (std::size_t m = 0; m < n_; ++m) {
        const int nm = fock::occupation(key, m);
        for (int rep = 0; rep < nm; ++rep) apply_column(poly, m);
      }
      for (const auto& [okey, coeff] : poly) out.amps_[okey] += coeff;
    }
    out.prune();
    return out;
  }

 private:
  struct Entry {
    std::size_t row;
    cplx coeff;
  };

  void apply_column(std::map<std::uint64_t, cplx>& poly, std::size_t m) const {
    std::map<std::uint64_t, cplx> next;
    for (const auto& [key, coeff] : poly) {
      for (const Entry& e : cols_[m]) {
        const int nk = fock::occupation(key, e.row);
        if (nk >= 15) throw std::runtime_error("FockEvolver: per-mode occupation overflow");
        const std::uint64_t nkey = key + (std::uint64_t{1} << (4 * e.row));
        next[nkey] += coeff * e.coeff * std::sqrt(static_cast<double>(nk + 1));
      }
    }
    poly = std::move(next);
  }

  std::size_t n_ = 0;
  std::vector<std::vector<Entry>> cols_;
};

/// Embeds a 2×2 creation-operator map on (mode_a, mode_b) into an n-mode
/// transfer matrix.
inline CMat two_mode_transfer(std::size_t num_modes, std::size_t mode_a, std::size_t mode_b,
                              const CMat& u) {
  if (u.rows() != 2 || u.cols() != 2) throw std::invalid_argument("two_mode_transfer: need 2×2");
  if (mode_a >= num_modes || mode_b >= num_modes || mode_a == mode_b)
    throw std::invalid_argument("two_mode_transfer: bad mode indices");
  CMat t = CMat::identity(num_modes);
  t(mode_a, mode_a) = u(0, 0);
  t(mode_a, mode_b) = u(0, 1);
  t(mode_b, mode_a) = u(1, 0);
  t(mode_b, mode_b) = u(1, 1);
  return t;
}

/// Matrix permanent by direct expansion — the brute-force oracle for
/// multi-photon amplitudes (fine for n ≤ 8).
inline cplx permanent(const CMat& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("permanent: matrix must be square");
  if (n == 0) return 1.0;
  cplx total = 0.0;
  std::vector<bool> used(n, false);
  const auto rec = [&](auto&& self, std::size_t row, cplx prod) -> void {
    if (row == n) {
      total += prod;
      return;
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (used[c]) continue;
      const cplx v = m(row, c);
      if (v == cplx(0.0, 0.0)) continue;
      used[c] = true;
      self(self, row + 1, prod * v);
      used[c] = false;
    }
  };
  rec(rec, 0, cplx(1.0, 0.0));
  return total;
}

}  // namespace gatebench
