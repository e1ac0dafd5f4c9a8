#include <algorithm>
#include <numeric>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gatebench/gatebench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitNotConverged = 3;

struct GlobalOptions {
  std::uint64_t seed = 0;
  double tol = gatebench::kEpgBisectTol;
  int threads = 1;
  bool quiet = false;
};

void print(const GlobalOptions& g, const std::string& line) {
  if (!g.quiet) std::cout << line << "\n";
}

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * fraction);
  return buf;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, static_cast<int>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

gatebench::ProcessMatrix load_chi_pauli(const std::string& path) {
  gatebench::ProcessMatrix pm = gatebench::read_chi_json(path);
  if (pm.basis.kind() != gatebench::BasisKind::pauli)
    pm = gatebench::to_basis(pm, gatebench::OperatorBasis::pauli(2));
  return pm;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string params_path;
  std::string source = "on", gate = "on", loss = "on";
  std::string out_path;
  std::string counts_out;
  double shots = 0.0;  // 0 = exact probabilities
};

int run_simulate(const GlobalOptions& g, const SimulateArgs& a) {
  gatebench::GateModelParams params = a.params_path.empty()
                                          ? gatebench::default_params()
                                          : gatebench::read_params_json(a.params_path);
  const gatebench::ErrorBudgetToggles toggles{a.source == "on", a.gate == "on", a.loss == "on"};

  if (!a.counts_out.empty()) {
    const gatebench::GateModelParams eff = gatebench::resolve_toggles(params, toggles);
    const auto settings = gatebench::default_settings();
    std::vector<double> p = gatebench::model_probabilities(eff, toggles.source_on, settings);
    gatebench::TomographyDataset data{settings, p, {}};
    if (a.shots > 0.0) {
      // --shots is the expected total event count across the table; the raw
      // model probabilities carry tiny generation/success factors, so scale
      // the exposure by their total mass.
      const double mass = std::accumulate(p.begin(), p.end(), 0.0);
      if (mass <= 0.0) throw std::runtime_error("model produced no events to sample");
      data.counts = gatebench::sample_counts(p, a.shots / mass, g.seed);
    }
    gatebench::write_counts_csv(a.counts_out, data);
    print(g, "wrote counts: " + a.counts_out +
                 (a.shots > 0.0 ? " (sampled, " + num(a.shots) + " expected total events)"
                                : " (exact probabilities)"));
  }

  int exit_code = kExitOk;
  if (!a.out_path.empty() || a.counts_out.empty()) {
    const gatebench::SimulateResult res =
        gatebench::simulate_process(params, toggles, gatebench::default_settings());
    const gatebench::ProcessMatrix ideal =
        gatebench::chi_of_unitary(gatebench::bitflipped_cz_unitary());
    const double fp = gatebench::process_fidelity(res.chi, ideal);
    print(g, "process fidelity vs ideal: " + pct(fp));
    print(g, "average fidelity vs ideal: " + pct(gatebench::average_gate_fidelity(
                  std::clamp(fp, 0.0, 1.0))));
    print(g, "reconstruction iterations: " + std::to_string(res.mle.iterations));
    if (!res.mle.converged || !res.fit.converged) {
      std::cerr << "warning: " << (res.mle.converged ? "local-rotation fit" : "reconstruction")
                << " did not converge; output written from the best iterate\n";
      exit_code = kExitNotConverged;
    }
    if (!a.out_path.empty()) {
      gatebench::write_chi_json(a.out_path, res.chi);
      print(g, "wrote process matrix: " + a.out_path);
    }
  }
  return exit_code;
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

struct ReconstructArgs {
  std::string counts_path;
  std::string out_path;
  std::string method = "mle";
  std::string ideal = "bitflipped-cz";
  bool fit_local = false;
};

int run_reconstruct(const GlobalOptions& g, const ReconstructArgs& a) {
  std::vector<std::string> warnings;
  const gatebench::TomographyDataset data = gatebench::read_counts_csv(a.counts_path, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  const gatebench::CMat u_ideal = gatebench::resolve_ideal_unitary(a.ideal);
  const gatebench::ProcessMatrix chi_ideal = gatebench::chi_of_unitary(u_ideal);

  gatebench::ProcessMatrix chi;
  int exit_code = kExitOk;
  if (a.method == "linear") {
    const gatebench::LinearInversionResult li = gatebench::linear_inversion(data);
    print(g, std::string("linear inversion: min eigenvalue ") + num(li.min_eigenvalue) +
                 (li.psd ? " (physical)" : " (clipped to the physical cone for output)"));
    chi = li.chi;
    if (!li.psd) {
      chi.chi = gatebench::psd_clip(chi.chi);
      const double tr = chi.chi.trace().real();
      if (tr > 0.0) chi.chi *= gatebench::cplx(1.0 / tr, 0.0);
    }
  } else {
    const gatebench::MleResult mle = gatebench::mle_reconstruct(data);
    print(g, "log-likelihood: " + num(mle.log_likelihood) + "  iterations: " +
                 std::to_string(mle.iterations) + "  tp residual: " + num(mle.tp_residual));
    print(g, "min eigenvalue: " + num(mle.spectrum.empty() ? 0.0 : mle.spectrum.front()));
    chi = mle.chi;
    if (!mle.converged) {
      std::cerr << "warning: reconstruction did not converge; output written from the best "
                   "iterate\n";
      exit_code = kExitNotConverged;
    }
  }

  if (a.fit_local) {
    const gatebench::LocalFitResult fit = gatebench::local_unitary_fit(chi, u_ideal);
    print(g, "after local rotations: process fidelity " + pct(fit.process_fidelity) +
                 ", average fidelity " + pct(fit.average_fidelity));
    if (!fit.converged && exit_code == kExitOk) {
      std::cerr << "warning: local-rotation fit did not converge\n";
      exit_code = kExitNotConverged;
    }
    chi = fit.chi_rot;
  }

  const double fp = gatebench::process_fidelity(chi, chi_ideal);
  print(g, "process fidelity vs ideal: " + pct(fp));
  print(g, "average fidelity vs ideal: " +
               pct(gatebench::average_gate_fidelity(std::clamp(fp, 0.0, 1.0))));
  if (!a.out_path.empty()) {
    gatebench::write_chi_json(a.out_path, chi);
    print(g, "wrote process matrix: " + a.out_path);
  }
  return exit_code;
}

// ---------------------------------------------------------------------------
// epg
// ---------------------------------------------------------------------------

struct EpgArgs {
  std::string chi_path;
  std::string ideal = "bitflipped-cz";
  std::string out_path;
  std::string curve_out;
  bool optimize = false;
  std::size_t delta_points = 40;
  double delta_min = 1e-3;
  double delta_max = 0.5;
  int restarts = 16;
};

int run_epg(const GlobalOptions& g, const EpgArgs& a) {
  const gatebench::ProcessMatrix chi_exp = load_chi_pauli(a.chi_path);
  const gatebench::ProcessMatrix chi_ideal =
      gatebench::chi_of_unitary(gatebench::resolve_ideal_unitary(a.ideal));
  const std::vector<double> grid =
      gatebench::default_delta_grid(a.delta_points, a.delta_min, a.delta_max);

  gatebench::EpgBounds bounds = gatebench::epg_upper_curve(
      chi_exp, chi_ideal, gatebench::depolarizing_noise(chi_exp), grid, g.tol);
  std::vector<gatebench::CurvePoint> depolarizing_curve = bounds.curve;

  const bool optimize = a.optimize || !a.curve_out.empty();
  if (optimize) {
    gatebench::OptimizeNoiseOptions opts;
    opts.restarts = a.restarts;
    opts.seed = g.seed == 0 ? opts.seed : g.seed;
    std::vector<gatebench::CurvePoint> optimized(grid.size());
    std::vector<gatebench::NoiseSpec> specs(grid.size());
    parallel_for(grid.size(), g.threads, [&](std::size_t i) {
      auto [spec, bound] = gatebench::optimize_noise(chi_exp, chi_ideal, grid[i], opts);
      gatebench::CMat noised = chi_exp.chi * gatebench::cplx(1.0 - grid[i], 0.0) +
                               spec.chi_noise.chi * gatebench::cplx(grid[i], 0.0);
      optimized[i] = {grid[i], bound, spec.description,
                      gatebench::min_eigenvalue(noised) > gatebench::kEpgRankFloor};
      specs[i] = std::move(spec);
    });
    for (std::size_t i = 0; i < optimized.size(); ++i) {
      if (optimized[i].full_rank && optimized[i].bound < bounds.upper) {
        bounds.upper = optimized[i].bound;
        bounds.noise = specs[i];
      }
    }
    bounds.curve = optimized;
    if (!a.curve_out.empty()) {
      auto f = gatebench::detail::open_output(a.curve_out);
      gatebench::write_curve_csv(f, depolarizing_curve, optimized);
      print(g, "wrote curve: " + a.curve_out);
    }
  }

  print(g, "lower bound: " + num(bounds.lower) + " (" + pct(bounds.lower) + ")");
  print(g, "noise-added upper estimate: " + num(bounds.upper) + " (" + pct(bounds.upper) +
               ") using " + bounds.noise.description + " noise");
  const auto verdicts = gatebench::threshold_report(bounds, gatebench::default_thresholds());
  for (const auto& v : verdicts)
    print(g, "threshold " + v.spec.name + " (epsilon0 = " + num(v.spec.epsilon0) +
                 "): " + v.verdict);
  if (!a.out_path.empty()) {
    auto f = gatebench::detail::open_output(a.out_path);
    gatebench::write_bounds_json(f, bounds, verdicts);
    print(g, "wrote report: " + a.out_path);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// budget
// ---------------------------------------------------------------------------

struct BudgetArgs {
  std::string params_path;
  std::string out_path;
};

int run_budget(const GlobalOptions& g, const BudgetArgs& a) {
  const gatebench::GateModelParams params = a.params_path.empty()
                                                ? gatebench::default_params()
                                                : gatebench::read_params_json(a.params_path);
  const auto rows = gatebench::error_budget(params, gatebench::default_settings());
  char line[160];
  print(g, "configuration        F_p(ideal)  F_avg(ideal)  F_p(full)  F_avg(full)  1-F_p");
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-20s %9.1f%% %12.1f%% %9.1f%% %11.1f%% %6.1f%%",
                  r.label.c_str(), 100.0 * r.fp_ideal, 100.0 * r.fbar_ideal, 100.0 * r.fp_full,
                  100.0 * r.fbar_full, 100.0 * r.one_minus_fp);
    print(g, line);
  }
  if (!a.out_path.empty()) {
    auto f = gatebench::detail::open_output(a.out_path);
    gatebench::write_budget_csv(f, rows);
    print(g, "wrote budget: " + a.out_path);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// coherence
// ---------------------------------------------------------------------------

struct CoherenceArgs {
  std::string chi_path;
  std::string ideal = "bitflipped-cz";
  std::string out_path;
};

int run_coherence(const GlobalOptions& g, const CoherenceArgs& a) {
  const gatebench::ProcessMatrix pm = load_chi_pauli(a.chi_path);
  const gatebench::ProcessMatrix gate_basis =
      gatebench::to_gate_basis(pm, gatebench::resolve_ideal_unitary(a.ideal));
  const gatebench::RMat c = gatebench::coherence_matrix(gate_basis);

  double mean = 0.0;
  std::size_t pairs = 0;
  const double pop_floor = 1e-5;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = i + 1; j < c.cols(); ++j)
      if (gate_basis.chi(i, i).real() > pop_floor && gate_basis.chi(j, j).real() > pop_floor) {
        mean += c(i, j);
        ++pairs;
      }
  if (pairs > 0) mean /= static_cast<double>(pairs);
  print(g, "populated off-diagonal pairs: " + std::to_string(pairs));
  print(g, "mean coherence over populated pairs: " + num(mean));

  if (a.out_path.empty()) {
    if (!g.quiet) gatebench::write_coherence_csv(std::cout, gate_basis);
  } else {
    auto f = gatebench::detail::open_output(a.out_path);
    gatebench::write_coherence_csv(f, gate_basis);
    print(g, "wrote coherence table: " + a.out_path);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fidelity
// ---------------------------------------------------------------------------

struct FidelityArgs {
  std::string chi_path;
  std::string other_path;
  std::string ideal = "bitflipped-cz";
};

int run_fidelity(const GlobalOptions& g, const FidelityArgs& a) {
  const gatebench::ProcessMatrix chi = load_chi_pauli(a.chi_path);
  const gatebench::ProcessMatrix ref =
      a.other_path.empty() ? gatebench::chi_of_unitary(gatebench::resolve_ideal_unitary(a.ideal))
                           : load_chi_pauli(a.other_path);
  const double fp = gatebench::process_fidelity(chi, ref);
  print(g, "process fidelity: " + pct(fp));
  print(g, "average fidelity: " +
               pct(gatebench::average_gate_fidelity(std::clamp(fp, 0.0, 1.0))));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-qubit gate benchmarking: error-per-gate bounds and a photonic gate model"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "seed for sampling and stochastic searches");
  app.add_option("--tol", g.tol, "bisection tolerance for error-rate bounds");
  app.add_option("--threads", g.threads, "worker threads for grid sweeps")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "suppress informational output");
  // global options may appear after the subcommand as well
  app.fallthrough();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand(
      "simulate", "run the optical model through simulated tomography and reconstruction");
  c_sim->add_option("--params", sim.params_path, "model parameter JSON (defaults if omitted)");
  c_sim->add_option("--source", sim.source, "multi-pair source imperfections (on/off)")
      ->check(CLI::IsMember({"on", "off"}));
  c_sim->add_option("--gate", sim.gate, "beamsplitter-ratio imperfections (on/off)")
      ->check(CLI::IsMember({"on", "off"}));
  c_sim->add_option("--loss", sim.loss, "arm-efficiency imperfections (on/off)")
      ->check(CLI::IsMember({"on", "off"}));
  c_sim->add_option("--out", sim.out_path, "output process-matrix JSON");
  c_sim->add_option("--counts-out", sim.counts_out, "output count-table CSV");
  c_sim->add_option("--shots", sim.shots,
                    "Poisson-sample counts with this exposure (0 = exact probabilities)")
      ->check(CLI::NonNegativeNumber);

  ReconstructArgs rec;
  auto* c_rec = app.add_subcommand("reconstruct", "reconstruct a process matrix from counts");
  c_rec->add_option("--counts", rec.counts_path, "input count-table CSV")->required();
  c_rec->add_option("--out", rec.out_path, "output process-matrix JSON");
  c_rec->add_option("--method", rec.method, "mle (default) or linear")
      ->check(CLI::IsMember({"mle", "linear"}));
  c_rec->add_option("--ideal", rec.ideal, "ideal gate: cz, bitflipped-cz, or a unitary JSON");
  c_rec->add_flag("--fit-local", rec.fit_local,
                  "absorb local single-qubit rotations before reporting");

  EpgArgs epg;
  auto* c_epg = app.add_subcommand("epg", "error-probability-per-gate bounds for a process matrix");
  c_epg->add_option("--chi", epg.chi_path, "input process-matrix JSON")->required();
  c_epg->add_option("--ideal", epg.ideal, "ideal gate: cz, bitflipped-cz, or a unitary JSON");
  c_epg->add_option("--out", epg.out_path, "output report JSON");
  c_epg->add_option("--curve-out", epg.curve_out, "output bound-vs-delta CSV (implies --optimize)");
  c_epg->add_flag("--optimize", epg.optimize, "search structured noise for the upper estimate");
  c_epg->add_option("--delta-points", epg.delta_points, "points in the delta grid")
      ->check(CLI::Range(std::size_t{2}, std::size_t{10000}));
  c_epg->add_option("--delta-min", epg.delta_min, "smallest delta")->check(CLI::PositiveNumber);
  c_epg->add_option("--delta-max", epg.delta_max, "largest delta")->check(CLI::PositiveNumber);
  c_epg->add_option("--restarts", epg.restarts, "optimizer restarts per delta")
      ->check(CLI::PositiveNumber);

  BudgetArgs bud;
  auto* c_bud = app.add_subcommand("budget", "fidelity table of the model imperfection toggles");
  c_bud->add_option("--params", bud.params_path, "model parameter JSON (defaults if omitted)");
  c_bud->add_option("--out", bud.out_path, "output budget CSV");

  CoherenceArgs coh;
  auto* c_coh = app.add_subcommand("coherence", "coherence table in the gate-adapted basis");
  c_coh->add_option("--chi", coh.chi_path, "input process-matrix JSON")->required();
  c_coh->add_option("--ideal", coh.ideal, "ideal gate: cz, bitflipped-cz, or a unitary JSON");
  c_coh->add_option("--out", coh.out_path, "output coherence CSV (stdout if omitted)");

  FidelityArgs fid;
  auto* c_fid = app.add_subcommand("fidelity", "process and average fidelity of a process matrix");
  c_fid->add_option("--chi", fid.chi_path, "input process-matrix JSON")->required();
  c_fid->add_option("--other", fid.other_path, "second process-matrix JSON to compare against");
  c_fid->add_option("--ideal", fid.ideal, "ideal gate when --other is not given");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (c_sim->parsed()) return run_simulate(g, sim);
    if (c_rec->parsed()) return run_reconstruct(g, rec);
    if (c_epg->parsed()) return run_epg(g, epg);
    if (c_bud->parsed()) return run_budget(g, bud);
    if (c_coh->parsed()) return run_coherence(g, coh);
    if (c_fid->parsed()) return run_fidelity(g, fid);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
