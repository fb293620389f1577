#pragma once

// Bounded downhill simplex (minimization). Points are projected onto the box
// before evaluation. On convergence the simplex is rebuilt around the best
// vertex a few times; this recovers from collapse onto a ridge.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace cact::detail {

struct NelderMeadResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  double f_start = std::numeric_limits<double>::infinity();  // at the start point
  double f_initial_best = std::numeric_limits<double>::infinity();  // best vertex of the first simplex
  int evals = 0;
};

struct NelderMeadOptions {
  int max_evals = 4000;
  double simplex_tol = 1e-12;  // absolute vertex spread at which a simplex counts as converged
  double initial_step = 0.1;   // fraction of box width
  int rebuilds = 3;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const std::vector<double>& lower,
                                    const std::vector<double>& upper, const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  NelderMeadResult res;

  auto project = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  };
  auto eval = [&](std::vector<double>& x) {
    project(x);
    ++res.evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<std::vector<double>> simplex(n + 1);
  std::vector<double> fv(n + 1);

  auto build = [&](const std::vector<double>& base, double base_f, double scale) {
    simplex[0] = base;
    fv[0] = base_f;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v = base;
      const double h = scale * (upper[i] - lower[i]);
      v[i] = (v[i] + h <= upper[i]) ? v[i] + h : v[i] - h;
      fv[i + 1] = eval(v);
      simplex[i + 1] = std::move(v);
    }
  };

  res.f_start = eval(x0);
  build(x0, res.f_start, opts.initial_step);
  res.f_initial_best = *std::min_element(fv.begin(), fv.end());

  std::vector<std::size_t> idx(n + 1);
  auto order = [&]() {
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  };
  auto spread = [&]() {
    double d = 0.0;
    const auto& best = simplex[idx[0]];
    for (std::size_t k = 1; k <= n; ++k)
      for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(simplex[idx[k]][i] - best[i]));
    return d;
  };

  int rebuilds_left = opts.rebuilds;
  double scale = opts.initial_step;
  double last_rebuild_f = std::numeric_limits<double>::infinity();
  while (res.evals < opts.max_evals) {
    order();
    if (spread() <= opts.simplex_tol) {
      const double best = fv[idx[0]];
      if (rebuilds_left-- <= 0 || !(best < last_rebuild_f)) break;
      last_rebuild_f = best;
      scale *= 0.5;
      const std::vector<double> base = simplex[idx[0]];
      build(base, best, scale);
      continue;
    }
    const std::size_t worst = idx[n];
    const std::size_t second = idx[n - 1];
    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[idx[k]][i] / static_cast<double>(n);

    auto along = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = centroid[i] + coef * (simplex[worst][i] - centroid[i]);
      return x;
    };

    std::vector<double> xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[idx[0]]) {
      std::vector<double> xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        simplex[worst] = std::move(xr);
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = std::move(xr);
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    std::vector<double> xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = std::move(xc);
      fv[worst] = fc;
      continue;
    }
    const std::vector<double> best = simplex[idx[0]];
    for (std::size_t k = 1; k <= n; ++k) {
      auto& v = simplex[idx[k]];
      for (std::size_t i = 0; i < n; ++i) v[i] = best[i] + 0.5 * (v[i] - best[i]);
      fv[idx[k]] = eval(v);
    }
  }
  order();
  res.x = simplex[idx[0]];
  res.f = fv[idx[0]];
  return res;
}

}  // namespace cact::detail
