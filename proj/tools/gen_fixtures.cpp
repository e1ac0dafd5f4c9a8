// Generates the deterministic fixtures checked in under tests/fixtures/:
// an experiment-like process matrix pinned to a target fidelity, a sampled
// count table for it, and a reference parameter file.

#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gatebench/gatebench.hpp"

using namespace gatebench;

namespace {

// Imperfect χ with coherent local-rotation error plus structured and white
// noise, blended so the overlap with the ideal gate hits `target_fp` exactly.
ProcessMatrix experiment_like_chi(double target_fp) {
  const CMat u_ideal = bitflipped_cz_unitary();
  const CMat u_err = kron(euler_unitary(0.24, 0.20, -0.10), euler_unitary(-0.14, 0.26, 0.08)) *
                     u_ideal *
                     kron(euler_unitary(0.10, -0.18, 0.04), euler_unitary(0.06, 0.12, -0.20));
  const ProcessMatrix coherent = chi_of_unitary(u_err);

  std::vector<double> w(16, 0.0);
  w[3] = 0.35;   // IZ'
  w[12] = 0.35;  // ZI'
  w[15] = 0.20;  // ZZ'
  w[5] = 0.10;   // XX'
  const ProcessMatrix structured = gate_basis_diagonal_chi(u_ideal, w);
  const ProcessMatrix white = depolarizing_chi(OperatorBasis::pauli(2));
  ProcessMatrix noise = structured;
  noise.chi = structured.chi * cplx(0.6, 0.0) + white.chi * cplx(0.4, 0.0);

  const ProcessMatrix ideal = chi_of_unitary(u_ideal);
  const double f_coh = process_fidelity(coherent, ideal);
  const double f_noise = process_fidelity(noise, ideal);
  if (target_fp >= f_coh || target_fp <= f_noise)
    throw std::runtime_error("experiment_like_chi: target fidelity out of reach");
  const double mix = (f_coh - target_fp) / (f_coh - f_noise);

  ProcessMatrix out = coherent;
  out.chi = coherent.chi * cplx(1.0 - mix, 0.0) + noise.chi * cplx(mix, 0.0);
  validate_process_matrix(out);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "tests/fixtures";
  try {
    const ProcessMatrix chi = experiment_like_chi(0.782);
    write_chi_json(dir + "/experiment_chi.json", chi);

    const auto settings = default_settings();
    const std::vector<double> p = predicted_probabilities(chi, settings);
    TomographyDataset data{settings, sample_counts(p, 2000.0, 7), {}};
    write_counts_csv(dir + "/experiment_counts.csv", data);

    write_params_json(dir + "/params_default.json", default_params());

    const ProcessMatrix ideal = chi_of_unitary(bitflipped_cz_unitary());
    const EpgBounds bounds = epg_upper_curve(chi, ideal, depolarizing_noise(chi),
                                             default_delta_grid());
    json metrics;
    metrics["fp_vs_ideal"] = process_fidelity(chi, ideal);
    metrics["lower_bound"] = bounds.lower;
    metrics["upper_bound_depolarizing"] = bounds.upper;
    auto f = detail::open_output(dir + "/metrics.json");
    f << metrics.dump(2) << "\n";

    std::cout << "fixtures written to " << dir << "\n"
              << "  fp_vs_ideal = " << process_fidelity(chi, ideal) << "\n"
              << "  lower = " << bounds.lower << ", upper(depol) = " << bounds.upper << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
