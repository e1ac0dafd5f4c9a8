#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gatebench/basis.hpp"
#include "gatebench/eig.hpp"
#include "gatebench/matrix.hpp"
#include "gatebench/rng.hpp"

namespace gatebench {

/// Process matrix χ over an orthonormal operator basis {A_k}:
/// Λ(ρ) = d · Σ_mn χ_mn A_m ρ A_n†. With the 1/√d basis normalization a
/// trace-preserving map has Tr χ = 1 and the overlap with a unitary's χ is
/// the process fidelity with no extra factors.
struct ProcessMatrix {
  OperatorBasis basis = OperatorBasis::pauli(2);
  CMat chi;  // d² × d²
  double herm_tol = 1e-9;
  double psd_tol = 1e-9;
};

/// Expansion coefficients of a unitary over the basis, scaled so that
/// χ_of_unitary = v v†: v_k = Tr(A_k† U)/√d.
inline std::vector<cplx> chi_vec(const CMat& u, const OperatorBasis& basis) {
  const std::size_t d = basis.dim();
  if (u.rows() != d || u.cols() != d)
    throw std::invalid_argument("chi_vec: unitary/basis dimension mismatch");
  std::vector<cplx> v(basis.size());
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t k = 0; k < basis.size(); ++k)
    v[k] = hs_inner(basis.element(k), u) * inv_sqrt_d;
  return v;
}

/// Rank-1 process matrix of a unitary channel ρ ↦ UρU†.
inline ProcessMatrix chi_of_unitary(const CMat& u, OperatorBasis basis = OperatorBasis::pauli(2)) {
  if (u.rows() != basis.dim() || u.cols() != basis.dim())
    throw std::invalid_argument("chi_of_unitary: dimension mismatch");
  if (u.unitarity_error() > 1e-9)
    throw std::invalid_argument("chi_of_unitary: matrix is not unitary");
  const std::vector<cplx> v = chi_vec(u, basis);
  const std::size_t n = basis.size();
  CMat chi(n, n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = 0; k < n; ++k) chi(m, k) = v[m] * std::conj(v[k]);
  return ProcessMatrix{std::move(basis), std::move(chi)};
}

/// Applies the channel to a density matrix: d · Σ_mn χ_mn A_m ρ A_n†.
inline CMat apply_channel(const ProcessMatrix& pm, const CMat& rho) {
  const std::size_t d = pm.basis.dim();
  if (rho.rows() != d || rho.cols() != d)
    throw std::invalid_argument("apply_channel: state dimension mismatch");
  CMat out(d, d);
  for (std::size_t m = 0; m < pm.basis.size(); ++m) {
    const CMat am_rho = pm.basis.element(m) * rho;
    for (std::size_t n = 0; n < pm.basis.size(); ++n) {
      const cplx c = pm.chi(m, n);
      if (std::abs(c) < 1e-300) continue;
      out += (am_rho * pm.basis.element(n).dagger()) * (c * static_cast<double>(d));
    }
  }
  return out;
}

/// Trace-preservation operator Σ_kl χ_kl A_l† A_k; equals I/d for a
/// trace-preserving map under this normalization.
inline CMat tp_operator(const ProcessMatrix& pm) {
  const std::size_t d = pm.basis.dim();
  CMat t(d, d);
  for (std::size_t k = 0; k < pm.basis.size(); ++k) {
    const CMat& ak = pm.basis.element(k);
    for (std::size_t l = 0; l < pm.basis.size(); ++l) {
      const cplx c = pm.chi(k, l);
      if (std::abs(c) < 1e-300) continue;
      t += (pm.basis.element(l).dagger() * ak) * c;
    }
  }
  return t;
}

inline double tp_residual(const ProcessMatrix& pm) {
  const std::size_t d = pm.basis.dim();
  CMat t = tp_operator(pm);
  t -= CMat::identity(d) * cplx(1.0 / static_cast<double>(d), 0.0);
  return t.max_abs();
}

/// Throws if χ violates hermiticity, unit trace, or positivity; the message
/// names the violated invariant.
inline void validate_process_matrix(const ProcessMatrix& pm) {
  if (pm.chi.rows() != pm.basis.size() || pm.chi.cols() != pm.basis.size())
    throw std::invalid_argument("process matrix invariant violated: shape (chi must be d²×d²)");
  if (pm.chi.hermiticity_error() > pm.herm_tol)
    throw std::invalid_argument("process matrix invariant violated: hermiticity");
  if (std::abs(pm.chi.trace() - cplx(1.0, 0.0)) > std::max(pm.herm_tol, 1e-6))
    throw std::invalid_argument("process matrix invariant violated: unit trace");
  if (min_eigenvalue(pm.chi) < -pm.psd_tol)
    throw std::invalid_argument("process matrix invariant violated: positivity");
}

inline bool is_physical(const ProcessMatrix& pm, std::string* reason = nullptr) {
  try {
    validate_process_matrix(pm);
  } catch (const std::invalid_argument& e) {
    if (reason) *reason = e.what();
    return false;
  }
  return true;
}

/// Re-expresses χ in another orthonormal basis of the same space.
inline ProcessMatrix to_basis(const ProcessMatrix& pm, OperatorBasis target) {
  const CMat w = change_of_basis(pm.basis, target);
  CMat chi = w * pm.chi * w.dagger();
  return ProcessMatrix{std::move(target), std::move(chi), pm.herm_tol, pm.psd_tol};
}

/// Gate-basis representation B_k = A_k·U_ideal. Requires Pauli-basis input so
/// the transform is unambiguous.
inline ProcessMatrix to_gate_basis(const ProcessMatrix& pm, const CMat& u_ideal) {
  if (pm.basis.kind() != BasisKind::pauli || pm.basis.dim() != 4)
    throw std::invalid_argument("to_gate_basis: input must be in the two-qubit Pauli basis");
  return to_basis(pm, OperatorBasis::gate_adapted(u_ideal));
}

/// Overlap fidelity Tr(χ_a χ_b); exact process fidelity when either argument
/// is rank-1 (a unitary's χ).
inline double process_fidelity(const ProcessMatrix& a, const ProcessMatrix& b) {
  if (a.chi.rows() != b.chi.rows())
    throw std::invalid_argument("process_fidelity: dimension mismatch");
  if (!same_basis(a.basis, b.basis, 1e-9))
    throw std::invalid_argument("process_fidelity: operands use different bases");
  return std::real(hs_inner(a.chi, b.chi));
}

inline double average_gate_fidelity(double f_p, std::size_t d = 4) {
  if (f_p < -1e-12 || f_p > 1.0 + 1e-9)
    throw std::invalid_argument("average_gate_fidelity: F_p out of [0,1]");
  if (d < 2) throw std::invalid_argument("average_gate_fidelity: d must be >= 2");
  return (static_cast<double>(d) * f_p + 1.0) / (static_cast<double>(d) + 1.0);
}

/// True when the second-largest eigenvalue is below tol (so χ ≈ vv†).
inline bool is_rank1(const ProcessMatrix& pm, double tol = 1e-10) {
  const EigResult e = detail::jacobi_eig_unchecked(pm.chi);
  return e.values[e.values.size() - 2] <= tol;
}

/// Degree of coherence C_ij = |χ_ij|(1−δ_ij)/√(χ_ii χ_jj). Entries whose
/// denominator product falls below denom_floor are defined as 0, so unpopulated
/// elements (the 0/0 case) read as no coherence.
inline RMat coherence_matrix(const ProcessMatrix& pm, double denom_floor = 1e-12) {
  const std::size_t n = pm.chi.rows();
  RMat c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double denom2 = std::real(pm.chi(i, i)) * std::real(pm.chi(j, j));
      if (denom2 <= denom_floor) continue;
      c(i, j) = std::abs(pm.chi(i, j)) / std::sqrt(denom2);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Reference gates and random channels.
// ---------------------------------------------------------------------------

inline CMat cz_unitary() {
  CMat u = CMat::identity(4);
  u(3, 3) = -1.0;
  return u;
}

/// diag(1,−1,−1,−1): CZ conjugated by X⊗X up to global phase. This is the
/// natural post-selected target of the partially-polarizing beamsplitter gate.
inline CMat bitflipped_cz_unitary() {
  CMat u = CMat::identity(4);
  u(1, 1) = -1.0;
  u(2, 2) = -1.0;
  u(3, 3) = -1.0;
  return u;
}

/// Random CPTP process matrix from `rank` Ginibre Kraus operators
/// K_i = G_i S^{−1/2}, S = Σ G_i†G_i (so Σ K_i†K_i = I exactly).
inline ProcessMatrix random_cptp_chi(Rng& rng, std::size_t rank = 16,
                                     OperatorBasis basis = OperatorBasis::pauli(2)) {
  const std::size_t d = basis.dim();
  if (rank == 0 || rank > d * d)
    throw std::invalid_argument("random_cptp_chi: rank must be in [1, d^2]");
  std::vector<CMat> g(rank, CMat(d, d));
  CMat s(d, d);
  for (CMat& gi : g) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) gi(i, j) = cplx(rng.normal(), rng.normal());
    s += gi.dagger() * gi;
  }
  const EigResult es = hermitian_eig(s);
  CMat s_inv_sqrt(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    if (es.values[k] <= 1e-12)
      throw std::runtime_error("random_cptp_chi: degenerate Ginibre draw");
    const double w = 1.0 / std::sqrt(es.values[k]);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        s_inv_sqrt(i, j) += es.vectors(i, k) * std::conj(es.vectors(j, k)) * w;
  }
  const std::size_t n = basis.size();
  CMat chi(n, n);
  for (const CMat& gi : g) {
    const CMat k = gi * s_inv_sqrt;
    std::vector<cplx> t(n);
    for (std::size_t m = 0; m < n; ++m) t[m] = hs_inner(basis.element(m), k);
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t l = 0; l < n; ++l)
        chi(m, l) += t[m] * std::conj(t[l]) * (1.0 / static_cast<double>(d));
  }
  return ProcessMatrix{std::move(basis), std::move(chi)};
}

/// Completely depolarizing process: χ = I_{d²}/d² (in any orthonormal basis).
inline ProcessMatrix depolarizing_chi(OperatorBasis basis = OperatorBasis::pauli(2)) {
  const std::size_t n = basis.size();
  CMat chi = CMat::identity(n) * cplx(1.0 / static_cast<double>(n), 0.0);
  return ProcessMatrix{std::move(basis), std::move(chi)};
}

/// Inverse of chi_of_unitary for rank-1 χ: U = √d Σ_k v_k A_k from the top
/// eigenvector, with the phase fixed so the largest entry is real positive.
/// Throws when χ is not (numerically) a rank-1 unitary process.
inline CMat unitary_of_rank1_chi(const ProcessMatrix& pm, double tol = 1e-6) {
  const EigResult e = detail::jacobi_eig_unchecked(pm.chi);
  const std::size_t n = pm.basis.size();
  if (e.values[n - 2] > tol)
    throw std::invalid_argument("unitary_of_rank1_chi: χ is not rank-1");
  const std::size_t d = pm.basis.dim();
  const double scale = std::sqrt(static_cast<double>(d) * e.values[n - 1]);
  CMat u(d, d);
  for (std::size_t k = 0; k < n; ++k) u += pm.basis.element(k) * (e.vectors(k, n - 1) * scale);
  cplx phase = 0.0;
  double best = -1.0;
  for (const cplx& x : u.data())
    if (std::abs(x) > best) {
      best = std::abs(x);
      phase = x / std::abs(x);
    }
  u *= std::conj(phase);
  if (u.unitarity_error() > tol)
    throw std::invalid_argument("unitary_of_rank1_chi: χ does not describe a unitary channel");
  return u;
}

}  // namespace gatebench
