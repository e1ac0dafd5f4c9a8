#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gatebench/fock.hpp"
#include "gatebench/local_fit.hpp"
#include "gatebench/matrix.hpp"
#include "gatebench/process.hpp"
#include "gatebench/tomography.hpp"

namespace gatebench {

/// Mode layout: the six gate modes first (control/target × polarization plus
/// the two heralds), then the sinks of the balancing attenuators, then one
/// loss mode per detected mode for the efficiency beamsplitters.
struct ModeRegistry {
  static constexpr std::size_t cH = 0, cV = 1, tH = 2, tV = 3, hA = 4, hB = 5;
  static constexpr std::size_t lb_cV = 6, lb_tV = 7;
  static constexpr std::size_t l_cH = 8, l_cV = 9, l_tH = 10, l_tV = 11, l_hA = 12, l_hB = 13;
  static constexpr std::size_t gate_mode_count = 6;
  static constexpr std::size_t count = 14;

  static std::vector<std::string> labels() {
    return {"cH", "cV", "tH", "tV", "hA", "hB", "lb_cV", "lb_tV",
            "l_cH", "l_cV", "l_tH", "l_tV", "l_hA", "l_hB"};
  }
};

struct GateModelParams {
  double lambda_A = 0.0;      // per-source pair amplitude; pair probability ∝ λ²
  double lambda_B = 0.0;
  double eta_H = 1.0 / 3.0;   // central reflectivity for H (ideal 1/3)
  double eta_V = 1.0;         // central reflectivity for V (ideal 1)
  double tau_cV = 1.0 / 3.0;  // balancing transmissions on the V modes (ideal 1/3)
  double tau_tV = 1.0 / 3.0;
  double eff_c = 1.0;         // arm detection efficiencies
  double eff_t = 1.0;
  double eff_hA = 1.0;
  double eff_hB = 1.0;

  void validate() const {
    const auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (lambda_A < 0.0 || lambda_A > 0.3 || lambda_B < 0.0 || lambda_B > 0.3)
      throw std::invalid_argument("GateModelParams: pair amplitudes must lie in [0, 0.3]");
    if (!in01(eta_H) || !in01(eta_V))
      throw std::invalid_argument("GateModelParams: reflectivities must lie in [0,1]");
    if (!in01(tau_cV) || !in01(tau_tV))
      throw std::invalid_argument("GateModelParams: balancing transmissions must lie in [0,1]");
    if (!in01(eff_c) || !in01(eff_t) || !in01(eff_hA) || !in01(eff_hB))
      throw std::invalid_argument("GateModelParams: efficiencies must lie in [0,1]");
  }
};

struct ErrorBudgetToggles {
  bool source_on = false;
  bool gate_on = false;
  bool loss_on = false;
};

/// Substitutes ideal values for every switched-off imperfection.
inline GateModelParams resolve_toggles(const GateModelParams& p, const ErrorBudgetToggles& t) {
  GateModelParams e = p;
  if (!t.gate_on) {
    e.eta_H = 1.0 / 3.0;
    e.eta_V = 1.0;
    e.tau_cV = 1.0 / 3.0;
    e.tau_tV = 1.0 / 3.0;
  }
  if (!t.loss_on) e.eff_c = e.eff_t = e.eff_hA = e.eff_hB = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// Source.
// ---------------------------------------------------------------------------

/// Fraction of down-conversion events with more than one pair,
/// p(n ≥ 2)/p(n ≥ 1), under the truncated squeezed-pair distribution
/// p_n ∝ λ^{2n} (n ≤ 2).
inline double multipair_fraction(double lambda) {
  if (lambda < 0.0 || lambda > 0.3)
    throw std::invalid_argument("multipair_fraction: lambda must lie in [0, 0.3]");
  const double l2 = lambda * lambda;
  if (l2 == 0.0) return 0.0;
  return l2 / (1.0 + l2);
}

/// Inverse solve: pair amplitude giving the requested multi-pair fraction.
inline double lambda_for_multipair_fraction(double fraction) {
  if (fraction < 0.0 || fraction >= multipair_fraction(0.3))
    throw std::invalid_argument("lambda_for_multipair_fraction: fraction out of reachable range");
  double lo = 0.0, hi = 0.3;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (multipair_fraction(mid) >= fraction ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Truncated two-source pair expansion keeping the (1,1), (2,1) and (1,2)
/// pair-number terms: single-pair terms and four-pair terms are excluded, as
/// are events with all pairs in one source (those cannot produce a fourfold).
/// Source A feeds (cH, hA), source B feeds (tH, hB); amplitudes follow the
/// two-mode-squeezed weights λ^n with the (1−λ²) normalization prefactors.
inline FockState pdc_state(double lambda_A, double lambda_B, int cutoff_pairs = 3) {
  if (lambda_A < 0.0 || lambda_A > 0.3 || lambda_B < 0.0 || lambda_B > 0.3)
    throw std::invalid_argument("pdc_state: pair amplitudes must lie in [0, 0.3]");
  if (cutoff_pairs != 2 && cutoff_pairs != 3)
    throw std::invalid_argument("pdc_state: supported pair cutoffs are 2 and 3");
  const double norm = std::sqrt((1.0 - lambda_A * lambda_A) * (1.0 - lambda_B * lambda_B));
  FockState s(ModeRegistry::count);
  std::vector<int> occ(ModeRegistry::count, 0);
  const auto add = [&](int na, int nb, double amp) {
    occ[ModeRegistry::cH] = na;
    occ[ModeRegistry::hA] = na;
    occ[ModeRegistry::tH] = nb;
    occ[ModeRegistry::hB] = nb;
    s.add_term(occ, amp);
  };
  add(1, 1, norm * lambda_A * lambda_B);
  if (cutoff_pairs >= 3) {
    add(2, 1, norm * lambda_A * lambda_A * lambda_B);
    add(1, 2, norm * lambda_A * lambda_B * lambda_B);
  }
  s.prune();
  return s;
}

/// Deterministic single-pair-per-source input |1,1,1,1⟩ — the source with its
/// imperfections switched off.
inline FockState single_pair_state() {
  FockState s(ModeRegistry::count);
  std::vector<int> occ(ModeRegistry::count, 0);
  occ[ModeRegistry::cH] = 1;
  occ[ModeRegistry::hA] = 1;
  occ[ModeRegistry::tH] = 1;
  occ[ModeRegistry::hB] = 1;
  s.add_term(occ, 1.0);
  return s;
}

// ---------------------------------------------------------------------------
// Optical circuit.
// ---------------------------------------------------------------------------

namespace detail {

/// Beamsplitter on creation operators with the convention
/// a → √η·a − √(1−η)·b, b → √(1−η)·a + √η·b.
inline CMat beamsplitter_2x2(double eta) {
  const double r = std::sqrt(eta);
  const double t = std::sqrt(std::max(0.0, 1.0 - eta));
  CMat u(2, 2);
  u(0, 0) = r;
  u(0, 1) = t;
  u(1, 0) = -t;
  u(1, 1) = r;
  return u;
}

/// Preparation of α|H⟩+β|V⟩ from an H-polarized source photon:
/// a_H† → α a_H† + β a_V†, completed unitarily.
inline CMat prep_2x2(const std::array<cplx, 2>& psi) {
  CMat u(2, 2);
  u(0, 0) = psi[0];
  u(0, 1) = -std::conj(psi[1]);
  u(1, 0) = psi[1];
  u(1, 1) = std::conj(psi[0]);
  return u;
}

/// Analyzer rotation sending the passed state φ to the H mode, so the
/// polarizer output is the rotated H mode.
inline CMat analyzer_2x2(const std::array<cplx, 2>& phi) {
  CMat u(2, 2);
  u(0, 0) = std::conj(phi[0]);
  u(0, 1) = std::conj(phi[1]);
  u(1, 0) = -phi[1];
  u(1, 1) = phi[0];
  return u;
}

}  // namespace detail

/// Full creation-operator transfer matrix of the gate: central H-interfering
/// beamsplitter, central V coupling, V balancing attenuators, and per-mode
/// efficiency beamsplitters into dedicated loss modes (unit efficiency makes
/// those couplings trivial). The result is unitary on the dilated space.
inline CMat gate_transfer(const GateModelParams& params) {
  params.validate();
  using M = ModeRegistry;
  const std::size_t n = M::count;
  CMat t = two_mode_transfer(n, M::cH, M::tH, detail::beamsplitter_2x2(params.eta_H));
  t = two_mode_transfer(n, M::cV, M::tV, detail::beamsplitter_2x2(params.eta_V)) * t;
  t = two_mode_transfer(n, M::cV, M::lb_cV, detail::beamsplitter_2x2(params.tau_cV)) * t;
  t = two_mode_transfer(n, M::tV, M::lb_tV, detail::beamsplitter_2x2(params.tau_tV)) * t;
  const std::array<std::pair<std::size_t, std::size_t>, 6> loss{{{M::cH, M::l_cH},
                                                                 {M::cV, M::l_cV},
                                                                 {M::tH, M::l_tH},
                                                                 {M::tV, M::l_tV},
                                                                 {M::hA, M::l_hA},
                                                                 {M::hB, M::l_hB}}};
  const std::array<double, 6> eff{params.eff_c, params.eff_c, params.eff_t,
                                  params.eff_t,  params.eff_hA, params.eff_hB};
  for (std::size_t i = 0; i < loss.size(); ++i)
    t = two_mode_transfer(n, loss[i].first, loss[i].second, detail::beamsplitter_2x2(eff[i])) * t;
  return t;
}

/// Applies the per-qubit preparation waveplates to the control and target
/// input modes.
inline FockState prepare_input(const FockState& state, const PreparationSetting& prep) {
  using M = ModeRegistry;
  const CMat t1 = two_mode_transfer(M::count, M::cH, M::cV, detail::prep_2x2(prep.q1));
  const CMat t2 = two_mode_transfer(M::count, M::tH, M::tV, detail::prep_2x2(prep.q2));
  return FockEvolver(t2 * t1).evolve(state);
}

/// Probability that all four threshold detectors click: analyzer outputs on
/// the control and target arms plus both heralds. Multi-photon occupations
/// count as a single click, and everything else (analyzer reject ports, loss
/// modes) is summed over.
inline double fourfold_probability(const FockState& state, const MeasurementSetting& meas) {
  using M = ModeRegistry;
  const CMat r1 = two_mode_transfer(M::count, M::cH, M::cV, detail::analyzer_2x2(meas.q1));
  const CMat r2 = two_mode_transfer(M::count, M::tH, M::tV, detail::analyzer_2x2(meas.q2));
  const FockState rotated = FockEvolver(r2 * r1).evolve(state);
  double p = 0.0;
  for (const auto& [key, amp] : rotated.terms()) {
    if (fock::occupation(key, M::cH) >= 1 && fock::occupation(key, M::tH) >= 1 &&
        fock::occupation(key, M::hA) >= 1 && fock::occupation(key, M::hB) >= 1)
      p += std::norm(amp);
  }
  return p;
}

/// Exact fourfold probabilities for every tomography setting. Preparations
/// are cached, so prep-major setting lists evolve each input only once.
inline std::vector<double> model_probabilities(const GateModelParams& effective_params,
                                               bool multi_pair_source,
                                               const std::vector<TomographySetting>& settings) {
  const FockState source = multi_pair_source
                               ? pdc_state(effective_params.lambda_A, effective_params.lambda_B)
                               : single_pair_state();
  const FockEvolver gate(gate_transfer(effective_params));
  std::vector<double> p;
  p.reserve(settings.size());
  FockState evolved(ModeRegistry::count);
  bool have_prep = false;
  std::array<cplx, 4> prep_cache{};
  for (const TomographySetting& s : settings) {
    const std::array<cplx, 4> stamp{s.prep.q1[0], s.prep.q1[1], s.prep.q2[0], s.prep.q2[1]};
    if (!have_prep || stamp != prep_cache) {
      evolved = gate.evolve(prepare_input(source, s.prep));
      prep_cache = stamp;
      have_prep = true;
    }
    p.push_back(fourfold_probability(evolved, s.meas));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Model χ via simulated tomography.
// ---------------------------------------------------------------------------

struct SimulateResult {
  ProcessMatrix chi;               // rotated model χ (Pauli basis)
  std::vector<double> probabilities;
  MleResult mle;
  LocalFitResult fit;
};

/// Runs the model through the same tomography pipeline as an experiment:
/// exact fourfold probabilities → maximum-likelihood reconstruction → local
/// single-qubit rotation against the ideal gate.
inline SimulateResult simulate_process(const GateModelParams& params,
                                       const ErrorBudgetToggles& toggles,
                                       const std::vector<TomographySetting>& settings,
                                       const MleOptions& mle_opts = {},
                                       const LocalFitOptions& fit_opts = {}) {
  params.validate();
  const GateModelParams eff = resolve_toggles(params, toggles);
  SimulateResult out;
  out.probabilities = model_probabilities(eff, toggles.source_on, settings);
  TomographyDataset data{settings, out.probabilities, {}};
  out.mle = mle_reconstruct(data, mle_opts);
  out.fit = local_unitary_fit(out.mle.chi, bitflipped_cz_unitary(), fit_opts);
  out.chi = out.fit.chi_rot;
  return out;
}

inline ProcessMatrix simulate_chi(const GateModelParams& params, const ErrorBudgetToggles& toggles,
                                  const std::vector<TomographySetting>& settings) {
  return simulate_process(params, toggles, settings).chi;
}

// ---------------------------------------------------------------------------
// Error budget.
// ---------------------------------------------------------------------------

struct BudgetRow {
  std::string label;
  ErrorBudgetToggles toggles;
  double fp_ideal = 0.0;
  double fbar_ideal = 0.0;
  double fp_full = 0.0;    // overlap with the all-imperfections model
  double fbar_full = 0.0;
  double one_minus_fp = 0.0;
};

inline std::vector<std::pair<std::string, ErrorBudgetToggles>> budget_rows() {
  return {
      {"ideal", {false, false, false}},
      {"loss", {false, false, true}},
      {"gate", {false, true, false}},
      {"gate+loss", {false, true, true}},
      {"source", {true, false, false}},
      {"source+gate", {true, true, false}},
      {"source+loss", {true, false, true}},
      {"source+gate+loss", {true, true, true}},
  };
}

/// Model fidelity table: one row per imperfection-toggle combination, with
/// overlaps against both the ideal gate and the full model. Toggle rows that
/// resolve to the same effective configuration (e.g. the gate toggle when the
/// splitting ratios are already ideal) share one simulation.
inline std::vector<BudgetRow> error_budget(const GateModelParams& params,
                                           const std::vector<TomographySetting>& settings) {
  const ProcessMatrix ideal = chi_of_unitary(bitflipped_cz_unitary());
  const auto rows = budget_rows();
  const auto config_key = [&](const ErrorBudgetToggles& t) {
    const GateModelParams e = resolve_toggles(params, t);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g",
                  t.source_on ? 1 : 0, e.lambda_A, e.lambda_B, e.eta_H, e.eta_V, e.tau_cV,
                  e.tau_tV, e.eff_c, e.eff_t, e.eff_hA, e.eff_hB);
    return std::string(buf);
  };
  std::map<std::string, ProcessMatrix> cache;
  std::vector<ProcessMatrix> chis;
  chis.reserve(rows.size());
  for (const auto& [label, toggles] : rows) {
    const std::string key = config_key(toggles);
    const auto it = cache.find(key);
    if (it == cache.end())
      chis.push_back(cache.emplace(key, simulate_chi(params, toggles, settings)).first->second);
    else
      chis.push_back(it->second);
  }
  const ProcessMatrix& full = chis.back();

  std::vector<BudgetRow> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    BudgetRow r;
    r.label = rows[i].first;
    r.toggles = rows[i].second;
    r.fp_ideal = process_fidelity(chis[i], ideal);
    r.fbar_ideal = average_gate_fidelity(std::clamp(r.fp_ideal, 0.0, 1.0));
    r.fp_full = process_fidelity(chis[i], full);
    r.fbar_full = average_gate_fidelity(std::clamp(r.fp_full, 0.0, 1.0));
    r.one_minus_fp = 1.0 - r.fp_ideal;
    out.push_back(std::move(r));
  }
  return out;
}

/// Model defaults: pair amplitude calibrated to the top of the observed
/// multi-pair range, ideal optics, and sub-unity detection on every arm.
inline GateModelParams default_params() {
  GateModelParams p;
  p.lambda_A = p.lambda_B = lambda_for_multipair_fraction(0.032);
  p.eff_c = 0.45;
  p.eff_t = 0.45;
  p.eff_hA = 0.25;
  p.eff_hB = 0.25;
  return p;
}

}  // namespace gatebench
