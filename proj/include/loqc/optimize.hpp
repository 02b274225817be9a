#pragma once

// Derivative-free minimizers used by the analysis and tuning layers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/tools/minima.hpp>

namespace loqc {

struct NelderMeadOptions {
  double initial_step = 0.1;  // fraction of each box side
  double ftol = 1e-12;
  double xtol = 1e-9;
  int max_evaluations = 4000;
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
};

/// Nelder-Mead on a box. Trial points are clamped into [lower, upper]; the
/// initial simplex steps inward from x0 along each axis.
template <class F>
MinimizeResult nelder_mead(F&& f, std::vector<double> x0, std::span<const double> lower,
                           std::span<const double> upper, const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (lower.size() != n || upper.size() != n) throw std::invalid_argument("nelder_mead: bounds size");
  auto clamp = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  };
  clamp(x0);

  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };

  std::vector<std::vector<double>> s(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = opt.initial_step * (upper[i] - lower[i]);
    s[i + 1][i] += (s[i + 1][i] + h <= upper[i]) ? h : -h;
  }
  std::vector<double> fs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(s[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto point = [&](double t, const std::vector<double>& worst, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = centroid[i] + t * (worst[i] - centroid[i]);
    clamp(out);
  };

  while (evals < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (auto i : order) {
      s2.push_back(s[i]);
      f2.push_back(fs[i]);
    }
    s = std::move(s2);
    fs = std::move(f2);

    double xspread = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
      for (std::size_t i = 0; i < n; ++i) xspread = std::max(xspread, std::abs(s[k][i] - s[0][i]));
    if (fs[n] - fs[0] <= opt.ftol && xspread <= opt.xtol) break;
    if (xspread <= 1e-15) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += s[k][i] / static_cast<double>(n);

    point(-1.0, s[n], xr);
    const double fr = eval(xr);
    if (fr < fs[0]) {
      point(-2.0, s[n], xe);
      const double fe = eval(xe);
      if (fe < fr) {
        s[n] = xe;
        fs[n] = fe;
      } else {
        s[n] = xr;
        fs[n] = fr;
      }
      continue;
    }
    if (fr < fs[n - 1]) {
      s[n] = xr;
      fs[n] = fr;
      continue;
    }
    const bool outside = fr < fs[n];
    point(outside ? -0.5 : 0.5, s[n], xc);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fs[n])) {
      s[n] = xc;
      fs[n] = fc;
      continue;
    }
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t i = 0; i < n; ++i) s[k][i] = s[0][i] + 0.5 * (s[k][i] - s[0][i]);
      fs[k] = eval(s[k]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  return {s[best], fs[best], evals};
}

/// Brent's method on [a, b] (Boost.Math), to about `bits` binary digits.
template <class F>
MinimizeResult brent_minimize(F&& f, double a, double b, int bits = 30, std::uintmax_t max_iter = 200) {
  int evals = 0;
  auto counted = [&](double x) {
    ++evals;
    return f(x);
  };
  const auto [x, fx] = boost::math::tools::brent_find_minima(counted, a, b, bits, max_iter);
  return {{x}, fx, evals};
}

}  // namespace loqc
