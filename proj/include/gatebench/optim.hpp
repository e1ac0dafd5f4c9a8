#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace gatebench {

struct NelderMeadOptions {
  int max_iters = 2000;
  double f_tol = 1e-12;     // stop when the simplex function spread drops below this
  double initial_step = 0.1;
};

struct OptimResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
};

/// Nelder-Mead downhill simplex minimization. Standard reflection /
/// expansion / contraction / shrink coefficients.
inline OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x0,
                               const NelderMeadOptions& opts = {}) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");

  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opts.initial_step;
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> order(n + 1);
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];
    if (vals[worst] - vals[best] < opts.f_tol) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
      return p;
    };

    std::vector<double> refl = blend(-1.0);
    const double f_refl = f(refl);
    if (f_refl < vals[best]) {
      std::vector<double> expd = blend(-2.0);
      const double f_expd = f(expd);
      if (f_expd < f_refl) {
        pts[worst] = std::move(expd);
        vals[worst] = f_expd;
      } else {
        pts[worst] = std::move(refl);
        vals[worst] = f_refl;
      }
      continue;
    }
    if (f_refl < vals[second]) {
      pts[worst] = std::move(refl);
      vals[worst] = f_refl;
      continue;
    }
    const bool outside = f_refl < vals[worst];
    std::vector<double> contr = blend(outside ? -0.5 : 0.5);
    const double f_contr = f(contr);
    if (f_contr < std::min(f_refl, vals[worst])) {
      pts[worst] = std::move(contr);
      vals[worst] = f_contr;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
      vals[i] = f(pts[i]);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (vals[i] < vals[best]) best = i;
  return {pts[best], vals[best], iter};
}

/// Euclidean projection onto the probability simplex {w >= 0, sum w = 1}.
inline void project_to_simplex(std::vector<double>& w) {
  if (w.empty()) throw std::invalid_argument("project_to_simplex: empty vector");
  std::vector<double> u = w;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  std::size_t rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  for (double& x : w) x = std::max(0.0, x - theta);
}

/// Coordinate descent with a feasibility projector: perturb one coordinate at
/// a time, project, keep improvements, halve the step when a full cycle makes
/// no progress.
inline OptimResult projected_coordinate_search(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x,
    const std::function<void(std::vector<double>&)>& project,
    double step0 = 0.25, int max_iters = 500, double step_min = 1e-7) {
  project(x);
  double fx = f(x);
  double step = step0;
  int iter = 0;
  for (; iter < max_iters && step > step_min; ++iter) {
    bool improved = false;
    for (std::size_t k = 0; k < x.size(); ++k) {
      for (const double sign : {+1.0, -1.0}) {
        std::vector<double> y = x;
        y[k] += sign * step;
        project(y);
        const double fy = f(y);
        if (fy < fx - 1e-15) {
          x = std::move(y);
          fx = fy;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {std::move(x), fx, iter};
}

}  // namespace gatebench
