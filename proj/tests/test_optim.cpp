#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gatebench/optim.hpp"

using namespace gatebench;

TEST_CASE("nelder_mead minimizes a shifted quadratic") {
  const auto f = [](const std::vector<double>& x) {
    return (x[0] - 2.0) * (x[0] - 2.0) + (x[1] + 1.0) * (x[1] + 1.0) + 3.0;
  };
  NelderMeadOptions opts;
  opts.max_iters = 5000;
  const OptimResult r = nelder_mead(f, {0.0, 0.0}, opts);
  CHECK(r.x[0] == Catch::Approx(2.0).margin(1e-5));
  CHECK(r.x[1] == Catch::Approx(-1.0).margin(1e-5));
  CHECK(r.f == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("nelder_mead handles a narrow valley") {
  const auto rosenbrock = [](const std::vector<double>& x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  NelderMeadOptions opts;
  opts.max_iters = 20000;
  opts.initial_step = 0.5;
  const OptimResult r = nelder_mead(rosenbrock, {-1.2, 1.0}, opts);
  CHECK(r.f < 1e-6);
}

TEST_CASE("project_to_simplex known cases") {
  std::vector<double> a{2.0, 0.0, 0.0};
  project_to_simplex(a);
  CHECK(a[0] == Catch::Approx(1.0));
  CHECK(a[1] == Catch::Approx(0.0).margin(1e-15));

  std::vector<double> b{0.25, 0.25, 0.25, 0.25};
  project_to_simplex(b);
  for (double v : b) CHECK(v == Catch::Approx(0.25));

  std::vector<double> c{0.9, -0.5, 0.8};
  project_to_simplex(c);
  double sum = 0.0;
  for (double v : c) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  CHECK(c[1] == 0.0);  // the strongly negative coordinate hits the boundary
}

TEST_CASE("projected coordinate search minimizes over the simplex") {
  // minimize ||x - t||² over the simplex; t inside → x = t
  const std::vector<double> target{0.5, 0.3, 0.2};
  const auto f = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - target[i]) * (x[i] - target[i]);
    return s;
  };
  const OptimResult r = projected_coordinate_search(
      f, {1.0, 0.0, 0.0}, [](std::vector<double>& v) { project_to_simplex(v); });
  CHECK(r.f < 1e-8);
  for (std::size_t i = 0; i < r.x.size(); ++i)
    CHECK(r.x[i] == Catch::Approx(target[i]).margin(1e-3));
}
