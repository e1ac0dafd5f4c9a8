#include <catch2/catch_amalgamated.hpp>

#include "gatebench/local_fit.hpp"
#include "gatebench/rng.hpp"

using namespace gatebench;

TEST_CASE("euler_unitary produces unitaries and covers known points") {
  CHECK((euler_unitary(0.0, 0.0, 0.0) - CMat::identity(2)).max_abs() < 1e-15);
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    const CMat u = euler_unitary(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                                 rng.uniform(-3.0, 3.0));
    CHECK(u.is_unitary(1e-12));
  }
}

TEST_CASE("local rotations are fully absorbed by the fit") {
  const CMat ideal = bitflipped_cz_unitary();
  const CMat err = kron(euler_unitary(0.31, 0.12, -0.22), euler_unitary(-0.08, 0.27, 0.15)) *
                   ideal * kron(euler_unitary(0.05, -0.33, 0.14), euler_unitary(0.21, 0.09, -0.11));
  const ProcessMatrix pm = chi_of_unitary(err);
  const double before = process_fidelity(pm, chi_of_unitary(ideal));
  REQUIRE(before < 0.99);  // the distortion is real

  const LocalFitResult fit = local_unitary_fit(pm, ideal);
  CHECK(fit.process_fidelity == Catch::Approx(1.0).margin(1e-6));
  CHECK(fit.average_fidelity == Catch::Approx(1.0).margin(1e-6));
  CHECK(fit.pre_1.is_unitary(1e-9));
  CHECK(fit.pre_2.is_unitary(1e-9));
  CHECK(fit.post_1.is_unitary(1e-9));
  CHECK(fit.post_2.is_unitary(1e-9));
  CHECK_NOTHROW(validate_process_matrix(fit.chi_rot));
  CHECK(fit.converged);
}

TEST_CASE("rotated chi reproduces the reported fidelity") {
  const CMat ideal = bitflipped_cz_unitary();
  const CMat err = kron(euler_unitary(0.2, 0.1, 0.0), CMat::identity(2)) * ideal;
  const LocalFitResult fit = local_unitary_fit(chi_of_unitary(err), ideal);
  const double fp = process_fidelity(fit.chi_rot, chi_of_unitary(ideal));
  CHECK(fp == Catch::Approx(fit.process_fidelity).margin(1e-9));
}

TEST_CASE("isotropic noise admits no local-rotation gain") {
  const CMat ideal = bitflipped_cz_unitary();
  ProcessMatrix pm = chi_of_unitary(ideal);
  const double p = 0.4;
  pm.chi = pm.chi * cplx(1.0 - p, 0.0) + CMat::identity(16) * cplx(p / 16.0, 0.0);
  const double before = process_fidelity(pm, chi_of_unitary(ideal));
  const LocalFitResult fit = local_unitary_fit(pm, ideal);
  CHECK(fit.process_fidelity >= before - 1e-9);
  CHECK(fit.process_fidelity <= before + 1e-5);
}

TEST_CASE("fit rejects non-pauli input") {
  const ProcessMatrix pm = chi_of_unitary(cz_unitary());
  const ProcessMatrix gb = to_gate_basis(pm, cz_unitary());
  CHECK_THROWS_AS(local_unitary_fit(gb, cz_unitary()), std::invalid_argument);
}
