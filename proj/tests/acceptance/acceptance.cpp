// Acceptance gate: one line per criterion, PASS or FAIL, with the measured
// quantity printed so a reviewer can audit the margin. Exits nonzero when any
// criterion fails.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gatebench/gatebench.hpp"

using namespace gatebench;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

const ProcessMatrix& ideal_chi() {
  static const ProcessMatrix pm = chi_of_unitary(bitflipped_cz_unitary());
  return pm;
}

ProcessMatrix depolarized(double p) {
  ProcessMatrix out = ideal_chi();
  out.chi = out.chi * cplx(1.0 - p, 0.0) + CMat::identity(16) * cplx(p / 16.0, 0.0);
  return out;
}

// Mean coherence across populated pairs of the error block (gate-basis
// indices 1..15); the ideal-gate element is excluded so the statistic
// reflects the character of the residual error, not its size.
double mean_populated_coherence(const ProcessMatrix& pauli_chi) {
  const ProcessMatrix gb = to_gate_basis(pauli_chi, bitflipped_cz_unitary());
  const RMat c = coherence_matrix(gb);
  const double pop_floor = 1e-5;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 1; i < 16; ++i)
    for (std::size_t j = i + 1; j < 16; ++j)
      if (gb.chi(i, i).real() > pop_floor && gb.chi(j, j).real() > pop_floor) {
        sum += c(i, j);
        ++pairs;
      }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

// --------------------------------------------------------------------------

Outcome criterion_gate_basis_identity() {
  Rng rng(1000);
  const CMat u = bitflipped_cz_unitary();
  double worst_corner = 0.0, worst_round_trip = 0.0;
  for (int i = 0; i < 200; ++i) {
    const ProcessMatrix chi = random_cptp_chi(rng, 1 + rng.below(16));
    const ProcessMatrix gb = to_gate_basis(chi, u);
    const double fp = process_fidelity(chi, ideal_chi());
    worst_corner = std::max(worst_corner, std::abs(gb.chi(0, 0) - cplx(fp)));
    const ProcessMatrix back = to_basis(gb, OperatorBasis::pauli(2));
    worst_round_trip = std::max(worst_round_trip, (back.chi - chi.chi).max_abs());
  }
  return {worst_corner <= 1e-10 && worst_round_trip <= 1e-10,
          fmt("corner-element error %.2e, basis round-trip error %.2e over 200 random channels",
              worst_corner, worst_round_trip)};
}

Outcome criterion_fidelity_pairs() {
  const double pairs[8][2] = {{1.000, 1.000}, {1.000, 1.000}, {0.972, 0.978}, {0.932, 0.946},
                              {0.880, 0.904}, {0.872, 0.898}, {0.814, 0.851}, {0.782, 0.825}};
  double worst = 0.0;
  for (const auto& p : pairs)
    worst = std::max(worst, std::abs(average_gate_fidelity(p[0]) - p[1]));
  const double lower = 1.0 - 0.782;
  const bool lower_ok = std::abs(lower - 0.218) < 1e-12;
  return {worst <= 0.001 && lower_ok,
          fmt("largest average-fidelity mismatch %.4f; residual error rate %.1f%%", worst,
              100.0 * lower)};
}

Outcome criterion_epsilon_closed_forms() {
  double worst_dep = 0.0;
  for (double p : {0.05, 0.2, 0.5}) {
    const double eps = epg_min(depolarized(p), ideal_chi()).epsilon_star;
    worst_dep = std::max(worst_dep, std::abs(eps - 15.0 * p / 16.0));
  }
  Rng rng(2000);
  std::vector<double> w(16, 0.0);
  double sum = 0.0;
  for (std::size_t k = 1; k < 16; ++k) sum += (w[k] = rng.uniform());
  const double err = 0.23;
  for (std::size_t k = 1; k < 16; ++k) w[k] *= err / sum;
  w[0] = 1.0 - err;
  const ProcessMatrix diag = gate_basis_diagonal_chi(bitflipped_cz_unitary(), w);
  const double eps_diag = epg_min(diag, ideal_chi()).epsilon_star;
  const double worst_diag = std::abs(eps_diag - err);
  return {worst_dep <= 1e-6 && worst_diag <= 1e-6,
          fmt("depolarizing closed-form error %.2e, diagonal closed-form error %.2e", worst_dep,
              worst_diag)};
}

Outcome criterion_pathology() {
  const ProcessMatrix wrong = chi_of_unitary(cz_unitary());
  const double eps = epg_min(wrong, ideal_chi()).epsilon_star;
  const EpgBounds b =
      epg_upper_curve(wrong, ideal_chi(), depolarizing_noise(wrong), {0.01});
  return {std::abs(eps - 1.0) <= 1e-6 && b.upper < 1.0,
          fmt("epsilon* = %.8f, noise-added bound at delta 0.01 = %.6f", eps, b.upper)};
}

Outcome criterion_bound_accuracy() {
  std::vector<double> w(16, 0.0);
  w[3] = 0.5;
  w[12] = 0.3;
  w[15] = 0.2;
  double worst_gap = 0.0;
  for (double eps_true : {0.1, 0.3}) {
    std::vector<double> mix = w;
    for (double& v : mix) v *= eps_true;
    mix[0] = 1.0 - eps_true;
    const ProcessMatrix chi_exp = gate_basis_diagonal_chi(bitflipped_cz_unitary(), mix);
    for (double delta : {1e-3, 1e-2}) {
      const EpgBounds b =
          epg_upper_curve(chi_exp, ideal_chi(), depolarizing_noise(chi_exp), {delta});
      const double gap = std::abs(b.curve[0].bound - eps_true) - delta;
      worst_gap = std::max(worst_gap, gap);
    }
  }

  // the optimized-noise bound must not lose to depolarizing anywhere on a grid
  const ProcessMatrix chi_exp = depolarized(0.2);
  const std::vector<double> grid = default_delta_grid(10);
  const EpgBounds dep =
      epg_upper_curve(chi_exp, ideal_chi(), depolarizing_noise(chi_exp), grid);
  OptimizeNoiseOptions opts;
  opts.restarts = 4;
  opts.max_cycles = 120;
  double worst_excess = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [spec, bound] = optimize_noise(chi_exp, ideal_chi(), grid[i], opts);
    worst_excess = std::max(worst_excess, bound - dep.curve[i].bound);
  }
  return {worst_gap <= 1e-6 && worst_excess <= 1e-9,
          fmt("bound-vs-truth slack beyond delta %.2e; optimized-minus-depolarizing max %.2e",
              worst_gap, worst_excess)};
}

Outcome criterion_ideal_simulation() {
  const GateModelParams ideal_params;
  const auto settings = default_settings();
  double success = 0.0;
  {
    const FockState in = prepare_input(single_pair_state(), make_preparation("HH"));
    const FockState evolved = FockEvolver(gate_transfer(ideal_params)).evolve(in);
    for (const char* m : {"HH", "HV", "VH", "VV"})
      success += fourfold_probability(evolved, make_measurement(m));
  }
  const SimulateResult res =
      simulate_process(ideal_params, {false, false, false}, settings);
  const double fp = process_fidelity(res.chi, ideal_chi());
  return {fp >= 0.999 && std::abs(success - 1.0 / 9.0) <= 1e-9,
          fmt("simulated ideal-gate fidelity %.6f, success probability %.12f", fp, success)};
}

Outcome criterion_loss_neutrality() {
  const auto settings = default_settings();
  std::vector<ProcessMatrix> chis;
  for (double eff : {1.0, 0.5, 0.1}) {
    GateModelParams p;
    p.eff_c = p.eff_t = p.eff_hA = p.eff_hB = eff;
    chis.push_back(simulate_chi(p, {false, false, true}, settings));
  }
  double worst = 1.0;
  for (std::size_t i = 0; i < chis.size(); ++i)
    for (std::size_t j = i + 1; j < chis.size(); ++j)
      worst = std::min(worst, process_fidelity(chis[i], chis[j]));
  return {worst >= 0.999999,
          fmt("worst pairwise fidelity across efficiencies {1.0, 0.5, 0.1}: %.9f", worst)};
}

Outcome criterion_multipair_degradation() {
  const auto settings = default_settings();
  GateModelParams p = default_params();  // lambda at a 3.2% multi-pair fraction
  const SimulateResult source_loss = simulate_process(p, {true, false, true}, settings);
  const double fp = process_fidelity(source_loss.chi, ideal_chi());

  const SimulateResult source_only = simulate_process(p, {true, false, false}, settings);
  const double source_coh = mean_populated_coherence(source_only.chi);

  GateModelParams gp = default_params();
  gp.eta_H = 0.30;
  const SimulateResult gate_only = simulate_process(gp, {false, true, false}, settings);
  const double gate_coh = mean_populated_coherence(gate_only.chi);

  // The reflectivity error is dominated by coherent phase terms while the
  // multi-pair background is incoherent; require that contrast, not exact
  // values (the trace-preserving fit caps coherences below 1 for
  // post-selected maps that are not proportional to a unitary).
  return {fp < 0.97 && source_coh < gate_coh && gate_coh >= 0.7 && source_coh <= 0.45,
          fmt("source+loss fidelity %.4f; mean error-block coherence source %.4f vs gate %.4f",
              fp, source_coh, gate_coh)};
}

Outcome criterion_budget_monotone() {
  const auto rows = error_budget(default_params(), default_settings());
  bool monotone = rows.size() == 8;
  double worst_step = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double step = rows[i].one_minus_fp - rows[i - 1].one_minus_fp;
    worst_step = std::min(worst_step, step);
    if (step < -1e-4) monotone = false;
  }
  std::string detail = "1-F_p per row:";
  for (const auto& r : rows) detail += fmt(" %.4f", r.one_minus_fp);
  return {monotone, detail + fmt(" (worst backward step %.2e)", worst_step)};
}

Outcome criterion_mle_rank_transparency() {
  const auto settings = default_settings();
  const auto p = predicted_probabilities(ideal_chi(), settings);
  int hits = 0;
  const int trials = 50;
  for (int seed = 0; seed < trials; ++seed) {
    TomographyDataset data{settings, sample_counts(p, 1e4, 3000 + seed), {}};
    const MleResult r = mle_reconstruct(data);
    if (!r.spectrum.empty() && r.spectrum.front() < 1e-4) ++hits;
  }
  return {hits >= 40,
          fmt("%d / %d reconstructions kept the smallest eigenvalue below 1e-4", hits, trials)};
}

Outcome criterion_hom_dip() {
  double worst = 0.0;
  for (double eta : {0.0, 1.0 / 3.0, 0.5, 1.0}) {
    CMat u(2, 2);
    const double r = std::sqrt(eta), t = std::sqrt(1.0 - eta);
    u(0, 0) = r;
    u(0, 1) = t;
    u(1, 0) = -t;
    u(1, 1) = r;
    FockState in(2);
    in.add_term({1, 1}, 1.0);
    const FockState out = FockEvolver(two_mode_transfer(2, 0, 1, u)).evolve(in);
    const cplx amp = out.amplitude({1, 1});
    CMat sub(2, 2);
    sub(0, 0) = u(0, 0);
    sub(0, 1) = u(0, 1);
    sub(1, 0) = u(1, 0);
    sub(1, 1) = u(1, 1);
    worst = std::max(worst, std::abs(amp - permanent(sub)));
    worst = std::max(worst, std::abs(amp - cplx(2.0 * eta - 1.0)));
  }
  return {worst <= 1e-12, fmt("largest coincidence-amplitude deviation %.2e", worst)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gate-adapted corner element equals the process fidelity", criterion_gate_basis_identity},
      {2, "published fidelity pairs satisfy the average-fidelity map", criterion_fidelity_pairs},
      {3, "error-rate closed forms (depolarizing and diagonal)", criterion_epsilon_closed_forms},
      {4, "orthogonal-gate pathology saturates and noise restores finiteness", criterion_pathology},
      {5, "noise-added bound accuracy and optimizer dominance", criterion_bound_accuracy},
      {6, "ideal optical model reconstructs the ideal gate", criterion_ideal_simulation},
      {7, "uniform arm loss leaves the conditional process unchanged", criterion_loss_neutrality},
      {8, "multi-pair emission degrades fidelity incoherently", criterion_multipair_degradation},
      {9, "error-budget rows are monotone in combined imperfections", criterion_budget_monotone},
      {10, "reconstruction reports rank deficiency on pure-gate data", criterion_mle_rank_transparency},
      {11, "two-photon interference amplitude matches the permanent", criterion_hom_dip},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s  criterion %2d: %s — %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  if (failures > 0) std::printf("%d of 11 criteria failed\n", failures);
  else std::printf("all 11 criteria passed\n");
  return failures == 0 ? 0 : 1;
}
