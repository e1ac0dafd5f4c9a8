#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gatebench/basis.hpp"
#include "gatebench/eig.hpp"
#include "gatebench/matrix.hpp"
#include "gatebench/process.hpp"
#include "gatebench/rng.hpp"

namespace gatebench {

// ---------------------------------------------------------------------------
// Settings.
// ---------------------------------------------------------------------------

/// Single-qubit polarization amplitudes (H, V) for the six standard states.
inline std::array<cplx, 2> polarization_amplitudes(char label) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (label) {
    case 'H': return {cplx(1.0, 0.0), cplx(0.0, 0.0)};
    case 'V': return {cplx(0.0, 0.0), cplx(1.0, 0.0)};
    case 'D': return {cplx(s, 0.0), cplx(s, 0.0)};
    case 'A': return {cplx(s, 0.0), cplx(-s, 0.0)};
    case 'R': return {cplx(s, 0.0), cplx(0.0, s)};
    case 'L': return {cplx(s, 0.0), cplx(0.0, -s)};
    default: throw std::invalid_argument(std::string("unknown polarization label: ") + label);
  }
}

struct PreparationSetting {
  std::string label;           // e.g. "DH": qubit 1 in D, qubit 2 in H
  std::array<cplx, 2> q1{}, q2{};
};

struct MeasurementSetting {
  std::string label;           // analyzer passes this per-qubit state
  std::array<cplx, 2> q1{}, q2{};
};

struct TomographySetting {
  PreparationSetting prep;
  MeasurementSetting meas;
};

inline PreparationSetting make_preparation(const std::string& label) {
  if (label.size() != 2) throw std::invalid_argument("preparation label must have two letters");
  return {label, polarization_amplitudes(label[0]), polarization_amplitudes(label[1])};
}

inline MeasurementSetting make_measurement(const std::string& label) {
  if (label.size() != 2) throw std::invalid_argument("measurement label must have two letters");
  return {label, polarization_amplitudes(label[0]), polarization_amplitudes(label[1])};
}

/// 16 preparations {H,V,D,R}⊗{H,V,D,R} × 36 analyzers {H,V,D,A,R,L}⊗2,
/// preparation-major; the first setting is prep HH / analyze HH.
inline std::vector<TomographySetting> default_settings() {
  static constexpr char preps[] = {'H', 'V', 'D', 'R'};
  static constexpr char meas[] = {'H', 'V', 'D', 'A', 'R', 'L'};
  std::vector<TomographySetting> out;
  out.reserve(576);
  for (char p1 : preps)
    for (char p2 : preps) {
      const PreparationSetting prep = make_preparation(std::string{p1, p2});
      for (char m1 : meas)
        for (char m2 : meas)
          out.push_back({prep, make_measurement(std::string{m1, m2})});
    }
  return out;
}

/// Fourfold-coincidence dataset. Counts are kept as doubles so that exact
/// model probabilities can stand in for asymptotic data without rounding.
struct TomographyDataset {
  std::vector<TomographySetting> settings;
  std::vector<double> counts;
  std::vector<double> durations;  // optional per-setting exposure; empty = uniform

  void validate() const {
    if (counts.size() != settings.size())
      throw std::invalid_argument("dataset: counts/settings length mismatch");
    if (!durations.empty() && durations.size() != settings.size())
      throw std::invalid_argument("dataset: durations/settings length mismatch");
    for (double c : counts)
      if (c < 0.0 || !std::isfinite(c))
        throw std::invalid_argument("dataset: counts must be finite and nonnegative");
    for (double t : durations)
      if (t <= 0.0 || !std::isfinite(t))
        throw std::invalid_argument("dataset: durations must be finite and positive");
  }
};

// ---------------------------------------------------------------------------
// Packed Hermitian representation: an n×n Hermitian matrix as an n² real
// vector (diagonal, then √2·Re / √2·Im per upper off-diagonal) chosen so the
// Euclidean dot product of two packed vectors equals Tr(AB). The Born rule,
// the inversion design matrix, and the trace-preservation constraint all
// become plain real linear algebra in this representation.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> pack_hermitian(const CMat& h) {
  const std::size_t n = h.rows();
  std::vector<double> x(n * n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::real(h(i, i));
  const double s = std::sqrt(2.0);
  std::size_t k = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      x[k++] = s * std::real(h(i, j));
      x[k++] = s * std::imag(h(i, j));
    }
  return x;
}

inline CMat unpack_hermitian(const std::vector<double>& x, std::size_t n) {
  if (x.size() != n * n) throw std::invalid_argument("unpack_hermitian: size mismatch");
  CMat h(n, n);
  for (std::size_t i = 0; i < n; ++i) h(i, i) = x[i];
  const double s = 1.0 / std::sqrt(2.0);
  std::size_t k = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx v(x[k] * s, x[k + 1] * s);
      k += 2;
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  return h;
}

/// Born-rule kernel of one setting: the Hermitian G with p = Tr(χ G),
/// G_nm = d · Tr[Π A_m ρ A_n†].
inline CMat born_kernel(const TomographySetting& s, const OperatorBasis& basis) {
  const std::size_t d = basis.dim();
  const auto projector = [](const std::array<cplx, 2>& a, const std::array<cplx, 2>& b) {
    CMat v(4, 1);
    v(0, 0) = a[0] * b[0];
    v(1, 0) = a[0] * b[1];
    v(2, 0) = a[1] * b[0];
    v(3, 0) = a[1] * b[1];
    return v * v.dagger();
  };
  const CMat rho = projector(s.prep.q1, s.prep.q2);
  const CMat pi = projector(s.meas.q1, s.meas.q2);
  const std::size_t n = basis.size();
  CMat g(n, n);
  for (std::size_t m = 0; m < n; ++m) {
    const CMat pm = pi * (basis.element(m) * rho);
    for (std::size_t nn = 0; nn < n; ++nn)
      g(nn, m) = static_cast<double>(d) * std::conj(hs_inner(pm, basis.element(nn)));
  }
  // Hermitian by construction; average away roundoff so packing is exact.
  CMat h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = 0.5 * (g(i, j) + std::conj(g(j, i)));
  return h;
}

inline std::vector<std::vector<double>> packed_kernels(const std::vector<TomographySetting>& settings,
                                                       const OperatorBasis& basis) {
  std::vector<std::vector<double>> g;
  g.reserve(settings.size());
  for (const TomographySetting& s : settings) g.push_back(pack_hermitian(born_kernel(s, basis)));
  return g;
}

/// Trace-preservation constraint as a real linear system: rows map packed χ
/// to the packed 4×4 operator Σ_kl χ_kl A_l†A_k, whose target is I/d.
struct TpConstraint {
  RMat p;                  // 16 × 256
  std::vector<double> e;   // packed I/d
  RMat ppt_chol;           // Cholesky factor of P·Pᵀ for affine projection

  explicit TpConstraint(const OperatorBasis& basis) {
    const std::size_t nb = basis.size();
    const std::size_t d = basis.dim();
    std::vector<CMat> prod(nb * nb);  // prod[k*nb+l] = A_l† A_k
    for (std::size_t k = 0; k < nb; ++k)
      for (std::size_t l = 0; l < nb; ++l)
        prod[k * nb + l] = basis.element(l).dagger() * basis.element(k);

    const std::size_t rows = d * d;
    const std::size_t cols = nb * nb;
    p = RMat(rows, cols);
    const double s = 1.0 / std::sqrt(2.0);
    std::size_t col = 0;
    const auto put = [&](const CMat& t, std::size_t c) {
      const std::vector<double> packed = pack_hermitian(t);
      for (std::size_t r = 0; r < rows; ++r) p(r, c) = packed[r];
    };
    for (std::size_t k = 0; k < nb; ++k) put(prod[k * nb + k], col++);
    for (std::size_t m = 0; m < nb; ++m)
      for (std::size_t n = m + 1; n < nb; ++n) {
        // χ basis vectors for the packed (m,n) Re and Im coordinates.
        const CMat re = (prod[m * nb + n] + prod[n * nb + m]) * cplx(s, 0.0);
        const CMat im = (prod[m * nb + n] - prod[n * nb + m]) * cplx(0.0, s);
        put(re, col++);
        put(im, col++);
      }
    e = pack_hermitian(CMat::identity(d) * cplx(1.0 / static_cast<double>(d), 0.0));

    RMat ppt(rows, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < rows; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += p(i, c) * p(j, c);
        ppt(i, j) = acc;
      }
    if (!cholesky_decompose(ppt))
      throw std::runtime_error("trace-preservation constraint is rank-deficient");
    ppt_chol = std::move(ppt);
  }

  std::vector<double> residual(const std::vector<double>& x) const {
    std::vector<double> r(e.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      double acc = -e[i];
      for (std::size_t c = 0; c < x.size(); ++c) acc += p(i, c) * x[c];
      r[i] = acc;
    }
    return r;
  }

  double residual_norm_inf(const std::vector<double>& x) const {
    double m = 0.0;
    for (double ri : residual(x)) m = std::max(m, std::abs(ri));
    return m;
  }

  /// Euclidean projection onto {x : Px = e}.
  void project(std::vector<double>& x) const {
    const std::vector<double> corr = cholesky_solve(ppt_chol, residual(x));
    for (std::size_t c = 0; c < x.size(); ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < corr.size(); ++i) acc += p(i, c) * corr[i];
      x[c] -= acc;
    }
  }
};

/// Lower-triangular factor L (positive diagonal) with M ≈ L L†; eigenvalue
/// floor applied so nearly singular inputs still factor.
inline CMat cholesky_factor(const CMat& m, double floor = 1e-12) {
  const std::size_t n = m.rows();
  CMat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = std::real(m(j, j));
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    d = std::max(d, floor);
    const double lj = std::sqrt(d);
    l(j, j) = lj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / lj;
    }
  }
  return l;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Forward model and sampling.
// ---------------------------------------------------------------------------

/// Born-rule probabilities p_s = Tr[Π_s Λ(ρ_s)] for every setting.
inline std::vector<double> predicted_probabilities(const ProcessMatrix& pm,
                                                   const std::vector<TomographySetting>& settings) {
  const std::vector<double> x = detail::pack_hermitian(pm.chi);
  std::vector<double> p;
  p.reserve(settings.size());
  for (const TomographySetting& s : settings) {
    const std::vector<double> g = detail::pack_hermitian(detail::born_kernel(s, pm.basis));
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) acc += g[k] * x[k];
    p.push_back(acc);
  }
  return p;
}

/// Independent Poisson draws with mean mean_total · p per setting.
inline std::vector<double> sample_counts(const std::vector<double>& probabilities,
                                         double mean_total, std::uint64_t seed) {
  if (mean_total <= 0.0) throw std::invalid_argument("sample_counts: mean_total must be positive");
  Rng rng(seed);
  std::vector<double> counts;
  counts.reserve(probabilities.size());
  for (double p : probabilities)
    counts.push_back(static_cast<double>(rng.poisson(std::max(0.0, p) * mean_total)));
  return counts;
}

// ---------------------------------------------------------------------------
// Linear inversion.
// ---------------------------------------------------------------------------

struct LinearInversionResult {
  ProcessMatrix chi;        // Hermitian, unit trace; PSD not guaranteed
  bool psd = false;
  double min_eigenvalue = 0.0;
};

/// Least-squares solve of the Born-rule system via normal equations, with the
/// overall count scale fixed by trace normalization. The output is Hermitian
/// by construction and may be unphysical (negative eigenvalues) on noisy data.
inline LinearInversionResult linear_inversion(const TomographyDataset& dataset,
                                              OperatorBasis basis = OperatorBasis::pauli(2)) {
  dataset.validate();
  const std::size_t nset = dataset.settings.size();
  const std::size_t dim = basis.size() * basis.size();
  if (nset < dim)
    throw std::invalid_argument("linear_inversion: fewer settings than process parameters");
  std::vector<std::vector<double>> g = detail::packed_kernels(dataset.settings, basis);
  for (std::size_t s = 0; s < nset; ++s) {
    const double t = dataset.durations.empty() ? 1.0 : dataset.durations[s];
    if (t != 1.0)
      for (double& v : g[s]) v *= t;
  }

  RMat ata(dim, dim);
  std::vector<double> aty(dim, 0.0);
  for (std::size_t s = 0; s < nset; ++s) {
    const std::vector<double>& row = g[s];
    const double y = dataset.counts[s];
    for (std::size_t i = 0; i < dim; ++i) {
      aty[i] += row[i] * y;
      for (std::size_t j = i; j < dim; ++j) ata(i, j) += row[i] * row[j];
    }
  }
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < i; ++j) ata(i, j) = ata(j, i);
  if (!cholesky_decompose(ata))
    throw std::runtime_error("linear_inversion: design matrix is rank-deficient "
                             "(settings are not informationally complete)");
  std::vector<double> x = cholesky_solve(ata, std::move(aty));

  double tr = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) tr += x[i];
  if (std::abs(tr) < 1e-12)
    throw std::runtime_error("linear_inversion: reconstructed trace is zero (degenerate counts)");
  for (double& v : x) v /= tr;

  LinearInversionResult r;
  r.chi = ProcessMatrix{std::move(basis), detail::unpack_hermitian(x, 16)};
  r.min_eigenvalue = min_eigenvalue(r.chi.chi);
  r.psd = r.min_eigenvalue >= -1e-9;
  return r;
}

// ---------------------------------------------------------------------------
// Maximum likelihood.
// ---------------------------------------------------------------------------

struct MleOptions {
  int max_iters = 50000;
  double rel_tol = 1e-10;       // relative log-likelihood change
  double tp_tol = 1e-6;         // trace-preservation residual required at stop
  double penalty0 = 10.0;       // initial trace-preservation penalty weight
  int penalty_ramp_every = 5000;
  double penalty_ramp_factor = 10.0;
  std::uint64_t seed = 0;       // reserved: the optimizer itself is deterministic
};

struct MleResult {
  ProcessMatrix chi;
  double log_likelihood = 0.0;  // profiled Poisson LL, up to a counts-only constant
  int iterations = 0;
  bool converged = false;
  std::vector<double> spectrum;  // ascending eigenvalues of the final χ
  double tp_residual = 0.0;
};

/// Poisson maximum-likelihood reconstruction over χ = TT†/Tr(TT†) with T
/// lower-triangular, gradient ascent with backtracking line search, and a
/// ramped quadratic penalty for trace preservation. The per-setting exposure
/// is profiled out analytically, so raw probabilities may be used directly as
/// counts; only relative magnitudes matter.
inline MleResult mle_reconstruct(const TomographyDataset& dataset, const MleOptions& opts = {},
                                 OperatorBasis basis = OperatorBasis::pauli(2)) {
  dataset.validate();
  const std::size_t nset = dataset.settings.size();
  const std::size_t nb = basis.size();
  const std::size_t dim = nb * nb;
  double total = 0.0;
  for (double c : dataset.counts) total += c;
  if (total <= 0.0)
    throw std::invalid_argument("mle_reconstruct: degenerate input (all counts are zero)");

  std::vector<std::vector<double>> g = detail::packed_kernels(dataset.settings, basis);
  for (std::size_t s = 0; s < nset; ++s) {
    const double t = dataset.durations.empty() ? 1.0 : dataset.durations[s];
    if (t != 1.0)
      for (double& v : g[s]) v *= t;
  }
  std::vector<double> g_tot(dim, 0.0);
  for (const std::vector<double>& row : g)
    for (std::size_t k = 0; k < dim; ++k) g_tot[k] += row[k];

  const detail::TpConstraint tp(basis);

  // Start from the PSD-clipped linear inversion, blended with a little
  // identity so the factor has full rank. The blend must stay far below the
  // statistical noise floor: the likelihood is nearly flat in this direction,
  // so whatever admixture goes in here survives to the reported chi.
  CMat chi0;
  {
    const LinearInversionResult li = linear_inversion(dataset, basis);
    chi0 = psd_clip(li.chi.chi);
    chi0 += CMat::identity(nb) * cplx(1e-10, 0.0);
    chi0 *= cplx(1.0 / std::real(chi0.trace()), 0.0);
  }
  CMat t_factor = detail::cholesky_factor(chi0, 1e-12);

  const auto chi_packed_unnorm = [&](const CMat& t) {
    return detail::pack_hermitian(t * t.dagger());
  };
  const auto q_of = [&](const std::vector<double>& xu) {
    std::vector<double> q(nset);
    for (std::size_t s = 0; s < nset; ++s) {
      double acc = 0.0;
      const std::vector<double>& row = g[s];
      for (std::size_t k = 0; k < dim; ++k) acc += row[k] * xu[k];
      q[s] = acc;
    }
    return q;
  };

  double penalty_w = opts.penalty0;
  // Objective pieces at a given factor; returns (f_likelihood, penalty, tau).
  struct Eval {
    double f = 0.0, pen = 0.0, tau = 0.0, big_q = 0.0;
    std::vector<double> xu, q, r;
  };
  const auto evaluate = [&](const CMat& t) {
    Eval ev;
    ev.xu = chi_packed_unnorm(t);
    for (std::size_t i = 0; i < nb; ++i) ev.tau += ev.xu[i];
    ev.q = q_of(ev.xu);
    double big_q = 0.0;
    for (double qs : ev.q) big_q += qs;
    ev.big_q = big_q;
    const double q_floor = 1e-16 * std::max(big_q, 1e-300);
    double f = 0.0;
    for (std::size_t s = 0; s < nset; ++s)
      if (dataset.counts[s] > 0.0) f += dataset.counts[s] * std::log(std::max(ev.q[s], q_floor));
    f -= total * std::log(std::max(big_q, 1e-300));
    ev.f = f;
    std::vector<double> xn = ev.xu;
    for (double& v : xn) v /= ev.tau;
    ev.r = tp.residual(xn);
    double pen = 0.0;
    for (double ri : ev.r) pen += ri * ri;
    ev.pen = 0.5 * penalty_w * pen;
    return ev;
  };

  Eval cur = evaluate(t_factor);
  double step = 1e-3;
  int iter = 0;
  bool converged = false;
  int iters_since_ramp = 0;
  for (; iter < opts.max_iters; ++iter, ++iters_since_ramp) {
    // Gradient of F = f − penalty with respect to conj(T), masked to the
    // lower triangle with a real diagonal.
    const double q_floor = 1e-16 * std::max(cur.big_q, 1e-300);
    std::vector<double> m_packed(dim, 0.0);
    for (std::size_t s = 0; s < nset; ++s) {
      const double w_s = dataset.counts[s] > 0.0
                             ? dataset.counts[s] / std::max(cur.q[s], q_floor)
                             : 0.0;
      if (w_s == 0.0) continue;
      const std::vector<double>& row = g[s];
      for (std::size_t k = 0; k < dim; ++k) m_packed[k] += w_s * row[k];
    }
    const double global_w = total / std::max(cur.big_q, 1e-300);
    for (std::size_t k = 0; k < dim; ++k) m_packed[k] -= global_w * g_tot[k];
    // Penalty part: Σ_a r_a C_a in packed form is Pᵀ r; its trace-coupling
    // scalar is Σ_a r_a Tr(C_a χ) = rᵀ(r + e).
    std::vector<double> pen_packed(dim, 0.0);
    double kappa = 0.0;
    for (std::size_t a = 0; a < cur.r.size(); ++a) {
      const double ra = cur.r[a];
      if (ra == 0.0) continue;
      kappa += ra * (cur.r[a] + tp.e[a]);
      for (std::size_t k = 0; k < dim; ++k) pen_packed[k] += ra * tp.p(a, k);
    }
    const double pw = penalty_w / cur.tau;
    for (std::size_t k = 0; k < dim; ++k) m_packed[k] -= pw * pen_packed[k];
    CMat m = detail::unpack_hermitian(m_packed, nb);
    for (std::size_t i = 0; i < nb; ++i) m(i, i) += pw * kappa;

    CMat grad = m * t_factor;
    double grad_norm2 = 0.0;
    for (std::size_t i = 0; i < nb; ++i)
      for (std::size_t j = 0; j < nb; ++j) {
        if (j > i) {
          grad(i, j) = 0.0;
        } else if (j == i) {
          grad(i, j) = std::real(grad(i, j));
        }
        grad_norm2 += std::norm(grad(i, j));
      }
    if (grad_norm2 < 1e-300) {
      double tp_res_now = 0.0;
      for (double ri : cur.r) tp_res_now = std::max(tp_res_now, std::abs(ri));
      converged = tp_res_now <= opts.tp_tol;
      break;
    }

    // Backtracking line search with step doubling on acceptance.
    const double objective = cur.f - cur.pen;
    double trial_step = step * 2.0;
    bool accepted = false;
    Eval next;
    for (int back = 0; back < 60; ++back) {
      CMat t_try = t_factor;
      for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = 0; j <= i; ++j) t_try(i, j) += trial_step * grad(i, j);
      next = evaluate(t_try);
      if (next.f - next.pen > objective + 1e-4 * trial_step * grad_norm2) {
        t_factor = std::move(t_try);
        accepted = true;
        break;
      }
      trial_step *= 0.5;
    }
    if (accepted) {
      step = trial_step;
      const double rel = std::abs((next.f - next.pen) - objective) /
                         std::max(1.0, std::abs(objective));
      const double tp_res_now = [&] {
        double mx = 0.0;
        for (double ri : next.r) mx = std::max(mx, std::abs(ri));
        return mx;
      }();
      cur = std::move(next);
      // Keep the factor at unit trace; the objective is exactly scale
      // invariant so this only conditions the parametrization.
      const double scale = 1.0 / std::sqrt(cur.tau);
      t_factor *= cplx(scale, 0.0);
      for (double& v : cur.xu) v *= scale * scale;
      for (double& v : cur.q) v *= scale * scale;
      cur.big_q *= scale * scale;
      cur.tau = 1.0;
      if (rel < opts.rel_tol) {
        if (tp_res_now <= opts.tp_tol) {
          converged = true;
          ++iter;
          break;
        }
        // Converged for this penalty weight but the constraint is loose:
        // tighten immediately instead of waiting for the ramp schedule.
        penalty_w *= opts.penalty_ramp_factor;
        iters_since_ramp = 0;
        cur = evaluate(t_factor);
        continue;
      }
    } else {
      // No ascent direction at any step size: tighten the constraint if it is
      // the blocker, otherwise we are at a stationary point.
      double tp_res_now = 0.0;
      for (double ri : cur.r) tp_res_now = std::max(tp_res_now, std::abs(ri));
      if (tp_res_now > opts.tp_tol) {
        penalty_w *= opts.penalty_ramp_factor;
        iters_since_ramp = 0;
        cur = evaluate(t_factor);
        continue;
      }
      converged = true;
      ++iter;
      break;
    }
    if (iters_since_ramp >= opts.penalty_ramp_every) {
      double tp_res_now = 0.0;
      for (double ri : cur.r) tp_res_now = std::max(tp_res_now, std::abs(ri));
      if (tp_res_now > opts.tp_tol) {
        penalty_w *= opts.penalty_ramp_factor;
        cur = evaluate(t_factor);
      }
      iters_since_ramp = 0;
    }
  }

  // Hard projection: alternate the trace-preservation affine projection with
  // a positivity clip until both hold tightly, then renormalize.
  std::vector<double> x = cur.xu;
  for (double& v : x) v /= cur.tau;
  CMat chi = detail::unpack_hermitian(x, nb);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> xp = detail::pack_hermitian(chi);
    tp.project(xp);
    chi = detail::unpack_hermitian(xp, nb);
    const double lam = min_eigenvalue(chi);
    if (lam >= -1e-9 && tp.residual_norm_inf(xp) <= 1e-9) break;
    if (lam < -1e-9) chi = psd_clip(chi);
  }
  chi *= cplx(1.0 / std::real(chi.trace()), 0.0);

  MleResult res;
  res.chi = ProcessMatrix{std::move(basis), chi};
  res.iterations = iter;
  res.converged = converged;
  const EigResult es = detail::jacobi_eig_unchecked(res.chi.chi);
  res.spectrum = es.values;
  res.tp_residual = tp.residual_norm_inf(detail::pack_hermitian(res.chi.chi));
  // Final profiled log-likelihood at the projected estimate.
  {
    const std::vector<double> xq = detail::pack_hermitian(res.chi.chi);
    const std::vector<double> q = q_of(xq);
    double big_q = 0.0;
    for (double qs : q) big_q += qs;
    double f = 0.0;
    for (std::size_t s = 0; s < nset; ++s)
      if (dataset.counts[s] > 0.0)
        f += dataset.counts[s] * std::log(std::max(q[s], 1e-16 * big_q));
    f -= total * std::log(std::max(big_q, 1e-300));
    res.log_likelihood = f + total * std::log(total) - total;  // exposure at its MLE
  }
  return res;
}

}  // namespace gatebench
