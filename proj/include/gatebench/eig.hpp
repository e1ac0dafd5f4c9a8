#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gatebench/matrix.hpp"

namespace gatebench {

struct EigResult {
  std::vector<double> values;  // ascending
  CMat vectors;                // columns; M = V diag(values) V†
};

namespace detail {

inline double offdiag_norm(const CMat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += 2.0 * std::norm(a(i, j));
  return std::sqrt(s);
}

/// Cyclic Jacobi diagonalization for complex Hermitian input. No Hermiticity
/// check; callers on hot paths use this directly.
inline EigResult jacobi_eig_unchecked(CMat a) {
  const std::size_t n = a.rows();
  CMat v = CMat::identity(n);
  const double scale = std::max(1.0, a.frobenius_norm());
  const double tol = 1e-12 * scale;
  const int max_sweeps = 60;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (offdiag_norm(a) <= tol) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double w = std::abs(apq);
        if (w <= 1e-300) continue;
        const cplx phase = apq / w;  // e^{i phi}
        const double app = std::real(a(p, p));
        const double aqq = std::real(a(q, q));
        // Rotation angle zeroing the (p,q) element: tan 2θ = 2|apq|/(app - aqq).
        double t;
        if (app == aqq) {
          t = 1.0;
        } else {
          const double tau = (app - aqq) / (2.0 * w);
          t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx spq = s * phase;  // s e^{i phi}

        // A <- U† A U with U = [[c, -s e^{i phi}], [s e^{-i phi}, c]] on (p,q).
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = c * akp + std::conj(spq) * akq;
          a(k, q) = -spq * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = c * apk + spq * aqk;
          a(q, k) = -std::conj(spq) * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = cplx(std::real(a(p, p)), 0.0);
        a(q, q) = cplx(std::real(a(q, q)), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p);
          const cplx vkq = v(k, q);
          v(k, p) = c * vkp + std::conj(spq) * vkq;
          v(k, q) = -spq * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<double> eigs(n);
  for (std::size_t i = 0; i < n; ++i) eigs[i] = std::real(a(i, i));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return eigs[x] < eigs[y]; });

  EigResult r;
  r.values.resize(n);
  r.vectors = CMat(n, n);
  for (std::size_t c2 = 0; c2 < n; ++c2) {
    r.values[c2] = eigs[order[c2]];
    for (std::size_t k = 0; k < n; ++k) r.vectors(k, c2) = v(k, order[c2]);
  }
  return r;
}

}  // namespace detail

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
/// Throws if the input is not Hermitian within tolerance.
inline EigResult hermitian_eig(const CMat& m, double herm_tol = 1e-9) {
  if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_eig: non-square input");
  if (m.hermiticity_error() > herm_tol * std::max(1.0, m.max_abs()))
    throw std::invalid_argument("hermitian_eig: input is not Hermitian within tolerance");
  // Jacobi rotations act on the Hermitian average to suppress roundoff drift.
  CMat h = m;
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j)
      h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  return detail::jacobi_eig_unchecked(std::move(h));
}

inline double min_eigenvalue(const CMat& m) {
  return detail::jacobi_eig_unchecked(m).values.front();
}

/// Clips eigenvalues below `floor` to zero and reassembles V Λ₊ V†.
inline CMat psd_clip(const CMat& m, double floor = 0.0) {
  EigResult e = detail::jacobi_eig_unchecked(m);
  const std::size_t n = m.rows();
  CMat out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (e.values[k] <= floor) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vik = e.vectors(i, k) * e.values[k];
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) += vik * std::conj(e.vectors(j, k));
    }
  }
  return out;
}

}  // namespace gatebench
