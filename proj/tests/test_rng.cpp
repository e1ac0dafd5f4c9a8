#include <catch2/catch_amalgamated.hpp>

#include "gatebench/rng.hpp"

using namespace gatebench;

TEST_CASE("same seed reproduces the stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.raw() == b.raw());
  Rng c(43);
  CHECK(Rng(42).raw() != c.raw());
}

TEST_CASE("uniform values stay in range with a sane mean") {
  Rng rng(1);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == Catch::Approx(0.5).margin(0.01));
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-2.0, 3.0);
    REQUIRE(u >= -2.0);
    REQUIRE(u < 3.0);
  }
}

TEST_CASE("below stays in range and covers values") {
  Rng rng(2);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const std::uint64_t v = rng.below(7);
    REQUIRE(v < 7);
    ++hits[static_cast<std::size_t>(v)];
  }
  for (int h : hits) CHECK(h > 700);
}

TEST_CASE("normal moments") {
  Rng rng(3);
  double sum = 0.0, sum2 = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  CHECK(sum / n == Catch::Approx(0.0).margin(0.02));
  CHECK(sum2 / n == Catch::Approx(1.0).margin(0.03));
  CHECK(rng.normal(10.0, 0.0) == 10.0);
}

TEST_CASE("poisson mean tracks the parameter in both regimes") {
  Rng rng(4);
  for (double mean : {3.0, 200.0}) {
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(mean));
    CHECK(sum / n == Catch::Approx(mean).epsilon(0.05));
  }
  CHECK(rng.poisson(0.0) == 0);
  CHECK_THROWS_AS(rng.poisson(-1.0), std::invalid_argument);
}
