#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gatebench/basis.hpp"
#include "gatebench/eig.hpp"
#include "gatebench/matrix.hpp"
#include "gatebench/optim.hpp"
#include "gatebench/process.hpp"
#include "gatebench/rng.hpp"

namespace gatebench {

constexpr double kEpgPsdTol = 1e-9;
constexpr double kEpgBisectTol = 1e-9;
constexpr double kEpgRankFloor = 1e-10;

/// χ_exp = (1−ε)·χ_ideal + ε·χ_gr with a physical error process χ_gr.
struct GremlinDecomposition {
  double epsilon = 0.0;
  ProcessMatrix chi_gr;
  bool chi_gr_defined = false;  // false when ε* = 0: the error process is arbitrary
};

struct EpgMinResult {
  double epsilon_star = 0.0;
  GremlinDecomposition decomposition;
};

struct NoiseSpec {
  enum class Kind { depolarizing, gate_basis_diagonal, custom };
  Kind kind = Kind::depolarizing;
  std::vector<double> weights;  // gate-basis diagonal weights (16 entries, [0] = 0)
  ProcessMatrix chi_noise;      // resolved noise process, same basis as χ_exp
  std::string description = "depolarizing";
  bool fallback = false;        // optimizer failed to beat depolarizing
};

struct CurvePoint {
  double delta = 0.0;
  double bound = 0.0;
  std::string noise_label;
  bool full_rank = true;
};

struct EpgBounds {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<CurvePoint> curve;
  NoiseSpec noise;
};

/// 1 − F_p: the coherence-blind lower bound on the error probability per gate.
inline double epg_lower_bound(const ProcessMatrix& chi_exp, const ProcessMatrix& chi_ideal) {
  return 1.0 - process_fidelity(chi_ideal, chi_exp);
}

namespace detail {

/// Bisection for the least ε with χ_exp − (1−ε)χ_ideal ⪰ −psd_tol. The matrix
/// grows by +χ_ideal ⪰ 0 per unit ε, so feasibility is monotone and bisection
/// is exact to the requested width. `cholesky` switches the feasibility test
/// from the eigensolver to a positive-definiteness factorization — same
/// result within tolerance at roughly a tenth of the cost (used inside the
/// noise optimizer's inner loop).
inline double epg_min_value(const CMat& chi_exp, const CMat& chi_ideal, double tol,
                            double psd_tol, bool cholesky) {
  const auto feasible = [&](double eps) {
    CMat m = chi_exp - chi_ideal * cplx(1.0 - eps, 0.0);
    if (cholesky) return hermitian_positive_definite(m, psd_tol);
    return min_eigenvalue(m) >= -psd_tol;
  };
  if (feasible(0.0)) return 0.0;
  if (!feasible(1.0))
    throw std::runtime_error("epg_min: χ_exp is not positive semidefinite at ε = 1");
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace detail

/// Minimum error-probability-per-gate: the least ε ∈ [0,1] admitting a
/// physical decomposition χ_exp = (1−ε)χ_ideal + ε·χ_gr.
inline EpgMinResult epg_min(const ProcessMatrix& chi_exp, const ProcessMatrix& chi_ideal,
                            double tol = kEpgBisectTol, double psd_tol = kEpgPsdTol) {
  if (tol <= 0.0) throw std::invalid_argument("epg_min: tol must be positive");
  if (!same_basis(chi_exp.basis, chi_ideal.basis, 1e-9))
    throw std::invalid_argument("epg_min: operands use different bases");
  validate_process_matrix(chi_exp);
  validate_process_matrix(chi_ideal);

  EpgMinResult r;
  r.epsilon_star = detail::epg_min_value(chi_exp.chi, chi_ideal.chi, tol, psd_tol, false);
  r.decomposition.epsilon = r.epsilon_star;
  if (r.epsilon_star > 0.0) {
    CMat gr = (chi_exp.chi - chi_ideal.chi * cplx(1.0 - r.epsilon_star, 0.0)) *
              cplx(1.0 / r.epsilon_star, 0.0);
    gr = psd_clip(gr);  // residual negatives are below psd_tol by construction
    const double tr = std::real(gr.trace());
    if (tr > 1e-12) gr *= cplx(1.0 / tr, 0.0);
    r.decomposition.chi_gr = ProcessMatrix{chi_exp.basis, std::move(gr)};
    r.decomposition.chi_gr_defined = true;
  }
  return r;
}

/// Gate-basis-diagonal noise process Σ_k w_k · (Pauli error k after the ideal
/// gate), expressed in the Pauli basis.
inline ProcessMatrix gate_basis_diagonal_chi(const CMat& u_ideal, const std::vector<double>& weights,
                                             OperatorBasis basis = OperatorBasis::pauli(2)) {
  if (weights.size() != 16)
    throw std::invalid_argument("gate_basis_diagonal_chi: need 16 weights");
  const CMat w = change_of_basis(basis, OperatorBasis::gate_adapted(u_ideal));
  // χ = W† diag(weights) W
  CMat chi(16, 16);
  for (std::size_t m = 0; m < 16; ++m)
    for (std::size_t n = 0; n < 16; ++n) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < 16; ++k)
        s += std::conj(w(k, m)) * weights[k] * w(k, n);
      chi(m, n) = s;
    }
  return ProcessMatrix{std::move(basis), std::move(chi)};
}

inline NoiseSpec depolarizing_noise(const ProcessMatrix& chi_exp) {
  NoiseSpec spec;
  spec.kind = NoiseSpec::Kind::depolarizing;
  spec.chi_noise = depolarizing_chi(chi_exp.basis);
  spec.description = "depolarizing";
  return spec;
}

/// Noise-added upper estimate: bound(δ) = ε*((1−δ)χ_exp + δχ_noise) for each
/// grid δ; the reported upper bound is the curve minimum over the δ where the
/// noised matrix is full-rank (λ_min > rank_floor).
inline EpgBounds epg_upper_curve(const ProcessMatrix& chi_exp, const ProcessMatrix& chi_ideal,
                                 const NoiseSpec& noise, const std::vector<double>& delta_grid,
                                 double tol = kEpgBisectTol) {
  if (delta_grid.empty()) throw std::invalid_argument("epg_upper_curve: empty delta grid");
  for (double d : delta_grid)
    if (d <= 0.0 || d >= 1.0)
      throw std::invalid_argument("epg_upper_curve: delta values must lie in (0,1)");
  if (!same_basis(chi_exp.basis, noise.chi_noise.basis, 1e-9))
    throw std::invalid_argument("epg_upper_curve: noise basis mismatch");
  validate_process_matrix(chi_exp);
  validate_process_matrix(chi_ideal);

  EpgBounds out;
  out.lower = epg_lower_bound(chi_exp, chi_ideal);
  out.noise = noise;
  double best = 2.0;
  for (double d : delta_grid) {
    CMat noised = chi_exp.chi * cplx(1.0 - d, 0.0) + noise.chi_noise.chi * cplx(d, 0.0);
    const bool full_rank = min_eigenvalue(noised) > kEpgRankFloor;
    const double bound =
        detail::epg_min_value(noised, chi_ideal.chi, tol, kEpgPsdTol, false);
    out.curve.push_back(CurvePoint{d, bound, noise.description, full_rank});
    if (full_rank && bound < best) best = bound;
  }
  if (best > 1.5)
    throw std::runtime_error("epg_upper_curve: noised matrix is rank-deficient at every delta");
  out.upper = best;
  return out;
}

/// Default grid: 40 logarithmically spaced δ in [1e-3, 0.5].
inline std::vector<double> default_delta_grid(std::size_t points = 40, double lo = 1e-3,
                                              double hi = 0.5) {
  if (points < 2 || lo <= 0.0 || hi <= lo)
    throw std::invalid_argument("default_delta_grid: bad grid spec");
  std::vector<double> g(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

struct OptimizeNoiseOptions {
  int restarts = 16;
  int max_cycles = 500;      // coordinate-search cycles per restart
  double inner_tol = 1e-6;   // bisection width inside the search loop
  std::uint64_t seed = 1234;
};

/// Searches gate-basis-diagonal noise (the 15-simplex of Pauli-error weights
/// after the ideal gate, ideal element excluded) minimizing the noise-added
/// bound at one δ. The returned bound never exceeds the depolarizing bound at
/// the same δ: when the diagonal family cannot match it — e.g. for χ_exp
/// nearly ideal, where depolarizing noise reuses part of its weight on the
/// ideal element — the depolarizing spec itself is returned with a fallback
/// flag.
inline std::pair<NoiseSpec, double> optimize_noise(const ProcessMatrix& chi_exp,
                                                   const ProcessMatrix& chi_ideal, double delta,
                                                   const OptimizeNoiseOptions& opts = {}) {
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("optimize_noise: delta must lie in (0,1)");
  const CMat u_ideal = unitary_of_rank1_chi(chi_ideal);
  const OperatorBasis gate_basis = OperatorBasis::gate_adapted(u_ideal);
  const CMat w = change_of_basis(chi_exp.basis, gate_basis);
  const CMat exp_gate = w * chi_exp.chi * w.dagger();  // χ_exp in the gate basis
  CMat ideal_gate(16, 16);
  ideal_gate(0, 0) = 1.0;

  // In the gate basis the candidate noise is diagonal, so assembling the
  // noised matrix is 16 diagonal additions; feasibility checks use the
  // Cholesky test. Eigenvalues are basis-invariant, so the bound matches the
  // Pauli-basis computation.
  const auto bound_of = [&](const std::vector<double>& w15, double tol) {
    CMat noised = exp_gate * cplx(1.0 - delta, 0.0);
    for (std::size_t k = 0; k < 15; ++k)
      noised(k + 1, k + 1) += delta * w15[k];
    return detail::epg_min_value(noised, ideal_gate, tol, kEpgPsdTol, true);
  };
  const auto objective = [&](const std::vector<double>& w15) {
    return bound_of(w15, opts.inner_tol);
  };

  Rng rng(opts.seed);
  std::vector<double> best_w(15, 1.0 / 15.0);
  double best_f = objective(best_w);
  for (int r = 0; r < opts.restarts; ++r) {
    std::vector<double> w0(15);
    if (r == 0) {
      std::fill(w0.begin(), w0.end(), 1.0 / 15.0);
    } else {
      double sum = 0.0;
      for (double& x : w0) {
        x = -std::log(std::max(rng.uniform(), 1e-300));
        sum += x;
      }
      for (double& x : w0) x /= sum;
    }
    const OptimResult res = projected_coordinate_search(objective, w0, project_to_simplex,
                                                        0.25, opts.max_cycles);
    if (res.f < best_f) {
      best_f = res.f;
      best_w = res.x;
    }
  }

  std::vector<double> weights16(16, 0.0);
  for (std::size_t k = 0; k < 15; ++k) weights16[k + 1] = best_w[k];
  NoiseSpec diag_spec;
  diag_spec.kind = NoiseSpec::Kind::gate_basis_diagonal;
  diag_spec.weights = weights16;
  diag_spec.chi_noise = gate_basis_diagonal_chi(u_ideal, weights16, chi_exp.basis);
  diag_spec.description = "optimized gate-basis-diagonal";
  CMat noised = chi_exp.chi * cplx(1.0 - delta, 0.0) + diag_spec.chi_noise.chi * cplx(delta, 0.0);
  const double diag_bound =
      detail::epg_min_value(noised, chi_ideal.chi, kEpgBisectTol, kEpgPsdTol, false);

  NoiseSpec dep_spec = depolarizing_noise(chi_exp);
  CMat dep_noised =
      chi_exp.chi * cplx(1.0 - delta, 0.0) + dep_spec.chi_noise.chi * cplx(delta, 0.0);
  const double dep_bound =
      detail::epg_min_value(dep_noised, chi_ideal.chi, kEpgBisectTol, kEpgPsdTol, false);

  if (diag_bound <= dep_bound) return {std::move(diag_spec), diag_bound};
  dep_spec.fallback = true;
  dep_spec.description = "depolarizing (fallback)";
  return {std::move(dep_spec), dep_bound};
}

// ---------------------------------------------------------------------------
// Threshold comparison.
// ---------------------------------------------------------------------------

struct ThresholdSpec {
  std::string name;
  double epsilon0 = 0.0;
  std::string error_model;
};

struct ThresholdVerdict {
  ThresholdSpec spec;
  std::string verdict;  // below | above | indeterminate
};

inline std::vector<ThresholdSpec> default_thresholds() {
  return {
      {"knill-3pct", 0.03, "post-selection-based architecture, conservative end"},
      {"knill-6pct", 0.06, "post-selection-based architecture, optimistic end"},
      {"aliferis-gottesman-preskill", 2.73e-5, "local non-post-selected architecture"},
  };
}

inline std::vector<ThresholdVerdict> threshold_report(const EpgBounds& bounds,
                                                      const std::vector<ThresholdSpec>& thresholds) {
  std::vector<ThresholdVerdict> out;
  out.reserve(thresholds.size());
  for (const ThresholdSpec& t : thresholds) {
    if (t.epsilon0 <= 0.0 || t.epsilon0 >= 1.0)
      throw std::invalid_argument("threshold_report: epsilon0 must lie in (0,1)");
    ThresholdVerdict v{t, "indeterminate"};
    if (bounds.upper < t.epsilon0)
      v.verdict = "below";
    else if (bounds.lower > t.epsilon0)
      v.verdict = "above";
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace gatebench
