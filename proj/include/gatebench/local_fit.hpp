#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gatebench/basis.hpp"
#include "gatebench/matrix.hpp"
#include "gatebench/optim.hpp"
#include "gatebench/process.hpp"

namespace gatebench {

/// Z-Y-Z Euler rotation Rz(α)·Ry(β)·Rz(γ); covers SU(2), and global phase is
/// irrelevant at the channel level.
inline CMat euler_unitary(double alpha, double beta, double gamma) {
  const cplx ea(std::cos(alpha / 2.0), -std::sin(alpha / 2.0));
  const cplx eg(std::cos(gamma / 2.0), -std::sin(gamma / 2.0));
  const double cb = std::cos(beta / 2.0);
  const double sb = std::sin(beta / 2.0);
  CMat u(2, 2);
  u(0, 0) = ea * cb * eg;
  u(0, 1) = -ea * sb * std::conj(eg);
  u(1, 0) = std::conj(ea) * sb * eg;
  u(1, 1) = std::conj(ea) * cb * std::conj(eg);
  return u;
}

namespace detail {

/// Radical-inverse (Halton) quasi-random sequence, one prime base per
/// dimension; deterministic low-discrepancy restart points.
inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv_base = 1.0 / static_cast<double>(base);
  double factor = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * factor;
    index /= base;
    factor *= inv_base;
  }
  return result;
}

inline std::vector<double> halton_point(std::uint64_t index, std::size_t dim) {
  static constexpr std::uint64_t primes[16] = {2,  3,  5,  7,  11, 13, 17, 19,
                                               23, 29, 31, 37, 41, 43, 47, 53};
  if (dim > 16) throw std::invalid_argument("halton_point: dimension too large");
  std::vector<double> p(dim);
  for (std::size_t k = 0; k < dim; ++k) p[k] = radical_inverse(index, primes[k]);
  return p;
}

}  // namespace detail

struct LocalFitOptions {
  int restarts_per_round = 32;
  int max_rounds = 8;
  double round_tol = 1e-9;  // stop when a full restart round improves F̄ by less
  NelderMeadOptions nm{};
};

struct LocalFitResult {
  CMat pre_1, pre_2, post_1, post_2;  // single-qubit rotations (2×2)
  ProcessMatrix chi_rot;              // rotated χ, same basis as the input
  double process_fidelity = 0.0;      // vs the ideal, after rotation
  double average_fidelity = 0.0;
  bool converged = true;
  int rounds = 0;
};

/// Finds local rotations (post₁⊗post₂) ∘ Λ ∘ (pre₁⊗pre₂) maximizing the
/// average fidelity with the ideal unitary. Each single-qubit unitary is three
/// Euler angles (12 parameters total); simplex refinement from quasi-random
/// restarts, repeated in rounds until a full round stops improving F̄.
///
/// The objective uses the identity F_p(rotated) = w† χ w with
/// w = chi_vec(V_post† · U_ideal · V_pre†), so each evaluation costs a few 4×4
/// products rather than a 16×16 basis transform.
inline LocalFitResult local_unitary_fit(const ProcessMatrix& pm, const CMat& u_ideal,
                                        const LocalFitOptions& opts = {}) {
  if (pm.basis.kind() != BasisKind::pauli || pm.basis.dim() != 4)
    throw std::invalid_argument("local_unitary_fit: χ must be in the two-qubit Pauli basis");
  if (u_ideal.unitarity_error() > 1e-9)
    throw std::invalid_argument("local_unitary_fit: ideal gate is not unitary");

  const OperatorBasis& basis = pm.basis;
  const auto fidelity_of = [&](const std::vector<double>& x) {
    const CMat v_pre = kron(euler_unitary(x[0], x[1], x[2]), euler_unitary(x[3], x[4], x[5]));
    const CMat v_post = kron(euler_unitary(x[6], x[7], x[8]), euler_unitary(x[9], x[10], x[11]));
    const std::vector<cplx> w = chi_vec(v_post.dagger() * u_ideal * v_pre.dagger(), basis);
    // w† χ w
    cplx acc = 0.0;
    for (std::size_t m = 0; m < 16; ++m) {
      cplx row = 0.0;
      for (std::size_t n = 0; n < 16; ++n) row += pm.chi(m, n) * w[n];
      acc += std::conj(w[m]) * row;
    }
    return std::real(acc);
  };
  const auto objective = [&](const std::vector<double>& x) { return -fidelity_of(x); };

  NelderMeadOptions nm = opts.nm;
  if (nm.max_iters == NelderMeadOptions{}.max_iters) nm.max_iters = 1500;

  std::vector<double> best_x(12, 0.0);
  double best_f = fidelity_of(best_x);  // identity rotation baseline
  double prev_round_best = best_f;
  std::uint64_t halton_index = 1;
  bool converged = false;
  int round = 0;
  for (; round < opts.max_rounds; ++round) {
    for (int r = 0; r < opts.restarts_per_round; ++r) {
      std::vector<double> x0(12, 0.0);
      if (!(round == 0 && r == 0)) {
        const std::vector<double> u = detail::halton_point(halton_index++, 12);
        for (std::size_t k = 0; k < 12; ++k) x0[k] = (2.0 * u[k] - 1.0) * 3.14159265358979323846;
      }
      const OptimResult res = nelder_mead(objective, x0, nm);
      if (-res.f > best_f) {
        best_f = -res.f;
        best_x = res.x;
      }
    }
    // Polish the incumbent with a tighter simplex before judging the round.
    NelderMeadOptions polish = nm;
    polish.initial_step = 0.01;
    const OptimResult res = nelder_mead(objective, best_x, polish);
    if (-res.f > best_f) {
      best_f = -res.f;
      best_x = res.x;
    }
    const double d = static_cast<double>(basis.dim());
    const double gain = (d * (best_f - prev_round_best)) / (d + 1.0);  // F̄ improvement
    if (gain < opts.round_tol) {
      converged = true;
      ++round;
      break;
    }
    prev_round_best = best_f;
  }

  LocalFitResult out;
  out.pre_1 = euler_unitary(best_x[0], best_x[1], best_x[2]);
  out.pre_2 = euler_unitary(best_x[3], best_x[4], best_x[5]);
  out.post_1 = euler_unitary(best_x[6], best_x[7], best_x[8]);
  out.post_2 = euler_unitary(best_x[9], best_x[10], best_x[11]);
  out.converged = converged;
  out.rounds = round;

  // χ_rot = S χ S† with S_km = Tr(A_k† · V_post A_m V_pre): the channel with
  // the fitted rotations composed around it, expressed back in the input basis.
  const CMat v_pre = kron(out.pre_1, out.pre_2);
  const CMat v_post = kron(out.post_1, out.post_2);
  CMat s(16, 16);
  for (std::size_t m = 0; m < 16; ++m) {
    const CMat rotated = v_post * basis.element(m) * v_pre;
    for (std::size_t k = 0; k < 16; ++k) s(k, m) = hs_inner(basis.element(k), rotated);
  }
  out.chi_rot = ProcessMatrix{basis, s * pm.chi * s.dagger(), pm.herm_tol, pm.psd_tol};
  out.process_fidelity = best_f;
  out.average_fidelity = average_gate_fidelity(std::min(1.0, std::max(0.0, best_f)), basis.dim());
  return out;
}

}  // namespace gatebench
