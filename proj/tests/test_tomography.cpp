#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "gatebench/eig.hpp"
#include "gatebench/rng.hpp"
#include "gatebench/tomography.hpp"

using namespace gatebench;

TEST_CASE("default settings enumerate 16 preparations x 36 analyzers") {
  const auto settings = default_settings();
  REQUIRE(settings.size() == 576);
  CHECK(settings[0].prep.label == "HH");
  CHECK(settings[0].meas.label == "HH");
  // preparation-major: the first 36 share a preparation
  for (std::size_t i = 0; i < 36; ++i) CHECK(settings[i].prep.label == "HH");
  CHECK(settings[36].prep.label == "HV");
  // analyzer letters include all six polarizations
  CHECK(settings[35].meas.label == "LL");
}

TEST_CASE("preparation amplitudes match the polarization table") {
  const PreparationSetting dr = make_preparation("DR");
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(dr.q1[0] - cplx(s)) < 1e-15);
  CHECK(std::abs(dr.q1[1] - cplx(s)) < 1e-15);
  CHECK(std::abs(dr.q2[0] - cplx(s)) < 1e-15);
  CHECK(std::abs(dr.q2[1] - cplx(0.0, s)) < 1e-15);
  CHECK_THROWS_AS(make_preparation("Q"), std::invalid_argument);
  CHECK_THROWS_AS(make_preparation("AX"), std::invalid_argument);  // A not a preparation
  CHECK_NOTHROW(make_measurement("AL"));
}

TEST_CASE("packed representation is a real isometry for the trace product") {
  Rng rng(12);
  CMat a(4, 4), b(4, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    a(i, i) = rng.normal();
    b(i, i) = rng.normal();
    for (std::size_t j = i + 1; j < 4; ++j) {
      a(i, j) = {rng.normal(), rng.normal()};
      a(j, i) = std::conj(a(i, j));
      b(i, j) = {rng.normal(), rng.normal()};
      b(j, i) = std::conj(b(i, j));
    }
  }
  const auto pa = detail::pack_hermitian(a);
  const auto pb = detail::pack_hermitian(b);
  double dot = 0.0;
  for (std::size_t k = 0; k < pa.size(); ++k) dot += pa[k] * pb[k];
  CHECK(dot == Catch::Approx(hs_inner(a, b).real()).margin(1e-12));
  CHECK((detail::unpack_hermitian(pa, 4) - a).max_abs() < 1e-15);
}

TEST_CASE("probabilities sum to one over each complete analyzer basis") {
  Rng rng(31);
  const ProcessMatrix pm = random_cptp_chi(rng);
  const auto settings = default_settings();
  const auto p = predicted_probabilities(pm, settings);
  // within each block of 36, analyzer pairs form 9 bases of 4 outcomes
  const char outcomes[3][2] = {{'H', 'V'}, {'D', 'A'}, {'R', 'L'}};
  for (std::size_t prep = 0; prep < 16; ++prep) {
    for (int b1 = 0; b1 < 3; ++b1)
      for (int b2 = 0; b2 < 3; ++b2) {
        double sum = 0.0;
        for (int o1 = 0; o1 < 2; ++o1)
          for (int o2 = 0; o2 < 2; ++o2) {
            const std::string label{outcomes[b1][o1], outcomes[b2][o2]};
            bool found = false;
            for (std::size_t s = prep * 36; s < (prep + 1) * 36; ++s) {
              if (settings[s].meas.label == label) {
                sum += p[s];
                found = true;
                break;
              }
            }
            REQUIRE(found);
          }
        CHECK(sum == Catch::Approx(1.0).margin(1e-10));
      }
  }
}

TEST_CASE("trace-preservation constraint vanishes on unitary channels") {
  const detail::TpConstraint tp(OperatorBasis::pauli(2));
  const ProcessMatrix pm = chi_of_unitary(cz_unitary());
  CHECK(tp.residual_norm_inf(detail::pack_hermitian(pm.chi)) < 1e-12);

  Rng rng(17);
  CMat h(16, 16);
  for (std::size_t i = 0; i < 16; ++i) {
    h(i, i) = rng.normal();
    for (std::size_t j = i + 1; j < 16; ++j) {
      h(i, j) = {rng.normal(), rng.normal()};
      h(j, i) = std::conj(h(i, j));
    }
  }
  auto x = detail::pack_hermitian(h);
  tp.project(x);
  CHECK(tp.residual_norm_inf(x) < 1e-10);
}

TEST_CASE("linear inversion recovers a random channel from exact data") {
  Rng rng(41);
  const ProcessMatrix truth = random_cptp_chi(rng);
  const auto settings = default_settings();
  TomographyDataset data{settings, predicted_probabilities(truth, settings), {}};
  const LinearInversionResult r = linear_inversion(data);
  CHECK((r.chi.chi - truth.chi).max_abs() < 1e-8);
  CHECK(r.psd);
}

TEST_CASE("durations rescale counts without changing the estimate") {
  Rng rng(42);
  const ProcessMatrix truth = random_cptp_chi(rng);
  const auto settings = default_settings();
  const auto p = predicted_probabilities(truth, settings);
  TomographyDataset data{settings, p, {}};
  TomographyDataset scaled{settings, p, {}};
  scaled.durations.assign(settings.size(), 1.0);
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const double t = 1.0 + static_cast<double>(s % 5);
    scaled.durations[s] = t;
    scaled.counts[s] = p[s] * t;
  }
  const CMat a = linear_inversion(data).chi.chi;
  const CMat b = linear_inversion(scaled).chi.chi;
  CHECK((a - b).max_abs() < 1e-9);
}

TEST_CASE("too few settings are rejected") {
  const auto settings = default_settings();
  TomographyDataset data;
  data.settings.assign(settings.begin(), settings.begin() + 100);
  data.counts.assign(100, 1.0);
  CHECK_THROWS_AS(linear_inversion(data), std::invalid_argument);
}

TEST_CASE("maximum likelihood reconstructs exact data to high fidelity") {
  Rng rng(43);
  const ProcessMatrix truth = random_cptp_chi(rng, 4);
  const auto settings = default_settings();
  TomographyDataset data{settings, predicted_probabilities(truth, settings), {}};
  const MleResult r = mle_reconstruct(data);
  CHECK(r.converged);
  CHECK(r.tp_residual <= 1e-6);
  CHECK_NOTHROW(validate_process_matrix(r.chi));
  // Element-wise recovery; the overlap Tr(chi_a chi_b) would saturate at the
  // truth's purity here, so it is not a useful closeness metric for mixed chi.
  CHECK((r.chi.chi - truth.chi).max_abs() < 1e-4);
  CHECK(process_fidelity(r.chi, truth) ==
        Catch::Approx(process_fidelity(truth, truth)).margin(1e-4));
  REQUIRE(r.spectrum.size() == 16);
  CHECK(r.spectrum.front() > -1e-12);
}

TEST_CASE("maximum likelihood tolerates sampling noise") {
  Rng rng(44);
  const ProcessMatrix truth = random_cptp_chi(rng, 3);
  const auto settings = default_settings();
  const auto p = predicted_probabilities(truth, settings);
  TomographyDataset data{settings, sample_counts(p, 5000.0, 99), {}};
  const MleResult r = mle_reconstruct(data);
  CHECK(r.tp_residual <= 1e-6);
  CHECK_NOTHROW(validate_process_matrix(r.chi));
  const double overlap =
      process_fidelity(r.chi, truth) /
      std::sqrt(process_fidelity(r.chi, r.chi) * process_fidelity(truth, truth));
  CHECK(overlap > 0.99);
  CHECK((r.chi.chi - truth.chi).max_abs() < 0.02);
}

TEST_CASE("degenerate count tables are rejected") {
  const auto settings = default_settings();
  TomographyDataset data{settings, std::vector<double>(settings.size(), 0.0), {}};
  CHECK_THROWS_AS(mle_reconstruct(data), std::invalid_argument);
}

TEST_CASE("sampling is deterministic in the seed") {
  const std::vector<double> p{0.1, 0.4, 0.2, 0.3};
  CHECK(sample_counts(p, 1000.0, 5) == sample_counts(p, 1000.0, 5));
  CHECK(sample_counts(p, 1000.0, 5) != sample_counts(p, 1000.0, 6));
}
