#pragma once

// Reflectivity tuning for the KLM gate (both NS gates share eta1, eta2):
// maximize the minimum fidelity over eta2 with eta1 = 1, or over both.

#include <cmath>
#include <optional>

#include "loqc/analysis.hpp"

namespace loqc {

struct TuneOptions {
  MinFidelityOptions inner{9, 5, 1e-10, 1e-7};  // used while searching
  MinFidelityOptions verify{};                  // reported values
  int eta2_scan_points = 41;
  int brent_bits = 26;
  int joint_seeds_per_axis = 9;
  int joint_refine_starts = 3;
  double joint_xtol = 1e-5;
};

struct TuneResult {
  EfficiencyConfig eff;
  double eta1 = 1.0;
  double eta2 = 0.0;
  double min_fidelity = 0.0;
  double baseline_min_fidelity = 0.0;  // nominal reflectivities, same efficiencies
  double success_at_optimum = 0.0;     // basis-averaged success probability at eff
  double success_nominal_lossless = 0.0;

  double success_ratio() const { return success_at_optimum / success_nominal_lossless; }
};

/// min_fidelity of build_klm(eta1, eta2); points where an accepted pattern
/// becomes impossible for some input (e.g. eta2 = 0) score 0.
inline std::optional<SweepRow> klm_min_fidelity(double eta1, double eta2, const EfficiencyConfig& eff,
                                                const MinFidelityOptions& opt) {
  try {
    return min_fidelity(build_klm(eta1, eta2), eff, opt);
  } catch (const NearZeroTraceError&) {
    return std::nullopt;
  }
}

inline double klm_objective(double eta1, double eta2, const EfficiencyConfig& eff, const MinFidelityOptions& opt) {
  const auto row = klm_min_fidelity(eta1, eta2, eff, opt);
  return row ? row->min_fidelity : 0.0;
}

namespace detail {

inline TuneResult finish(const EfficiencyConfig& eff, double eta1, double eta2, const TuneOptions& opt,
                         std::optional<double> baseline = std::nullopt) {
  TuneResult r;
  r.eff = eff;
  r.eta1 = eta1;
  r.eta2 = eta2;
  const auto row = klm_min_fidelity(eta1, eta2, eff, opt.verify);
  r.min_fidelity = row ? row->min_fidelity : 0.0;
  r.success_at_optimum = row ? row->success_avg_basis : 0.0;
  r.baseline_min_fidelity = baseline ? *baseline : klm_objective(kNsEta1, kNsEta2, eff, opt.verify);
  r.success_nominal_lossless = kNsEta2 * kNsEta2;
  return r;
}

}  // namespace detail

/// Best eta2 for a fixed eta1: uniform scan, then Brent inside the bracket
/// around the best scan point. Returns (eta2, search objective).
inline std::pair<double, double> best_eta2(double eta1, const EfficiencyConfig& eff, const TuneOptions& opt = {}) {
  const int n = opt.eta2_scan_points;
  std::vector<double> f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = klm_objective(eta1, double(i) / (n - 1), eff, opt.inner);
  const auto best = static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin());
  const double lo = double(std::max(best - 1, 0)) / (n - 1);
  const double hi = double(std::min(best + 1, n - 1)) / (n - 1);
  const auto r = brent_minimize([&](double e2) { return -klm_objective(eta1, e2, eff, opt.inner); }, lo, hi,
                                opt.brent_bits);
  if (-r.value >= f[static_cast<std::size_t>(best)]) return {r.x[0], -r.value};
  return {double(best) / (n - 1), f[static_cast<std::size_t>(best)]};
}

/// eta1 = 1: the first NS beamsplitter reflects the signal completely, so the
/// vacuum ancilla and its detector are still simulated but decouple.
inline TuneResult optimize_eta2(const EfficiencyConfig& eff, const TuneOptions& opt = {}) {
  check_efficiency(eff);
  const auto [eta2, score] = best_eta2(1.0, eff, opt);
  (void)score;
  return detail::finish(eff, 1.0, eta2, opt);
}

/// Joint search over (eta1, eta2) in [0, 1]^2: a seed grid, the nominal
/// point and the eta1 = 1 optimum are scored; Nelder-Mead runs from the best
/// few. Final candidates are compared at full inner density; ties within
/// 1e-9 go to the larger eta1.
inline TuneResult optimize_joint(const EfficiencyConfig& eff, const TuneOptions& opt = {}) {
  check_efficiency(eff);
  struct Candidate {
    double eta1, eta2, score;
  };
  std::vector<Candidate> seeds;
  const int m = opt.joint_seeds_per_axis;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double e1 = double(i) / (m - 1), e2 = double(j) / (m - 1);
      seeds.push_back({e1, e2, klm_objective(e1, e2, eff, opt.inner)});
    }
  seeds.push_back({kNsEta1, kNsEta2, klm_objective(kNsEta1, kNsEta2, eff, opt.inner)});
  const auto [line_eta2, line_score] = best_eta2(1.0, eff, opt);
  const Candidate line{1.0, line_eta2, line_score};

  std::stable_sort(seeds.begin(), seeds.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  const std::array<double, 2> lower{0.0, 0.0}, upper{1.0, 1.0};
  NelderMeadOptions nm;
  nm.xtol = opt.joint_xtol;
  nm.ftol = 1e-10;
  nm.initial_step = 0.5 / (m - 1);
  std::vector<Candidate> finals{line, {kNsEta1, kNsEta2, 0.0}};
  const auto starts = std::min<std::size_t>(static_cast<std::size_t>(opt.joint_refine_starts), seeds.size());
  for (std::size_t s = 0; s < starts; ++s) {
    const auto r = nelder_mead([&](std::span<const double> x) { return -klm_objective(x[0], x[1], eff, opt.inner); },
                               std::vector<double>{seeds[s].eta1, seeds[s].eta2}, lower, upper, nm);
    finals.push_back({r.x[0], r.x[1], 0.0});
  }

  const double baseline = klm_objective(kNsEta1, kNsEta2, eff, opt.verify);
  std::optional<Candidate> best;
  for (auto& c : finals) {
    c.score = klm_objective(c.eta1, c.eta2, eff, opt.verify);
    if (!best || c.score > best->score + 1e-9 || (std::abs(c.score - best->score) <= 1e-9 && c.eta1 > best->eta1))
      best = c;
  }
  return detail::finish(eff, best->eta1, best->eta2, opt, baseline);
}

/// Landscape of min_fidelity over nominal + (d_eta1, d_eta2); entries whose
/// reflectivities leave [0, 1] are nullopt.
inline std::vector<std::vector<std::optional<double>>> landscape(const EfficiencyConfig& eff,
                                                                 std::span<const double> d_eta1,
                                                                 std::span<const double> d_eta2,
                                                                 const MinFidelityOptions& opt = {}, unsigned jobs = 1) {
  check_efficiency(eff);
  std::vector<std::vector<std::optional<double>>> out(d_eta1.size(), std::vector<std::optional<double>>(d_eta2.size()));
  parallel_for(d_eta1.size() * d_eta2.size(), jobs, [&](std::size_t idx) {
    const auto i = idx / d_eta2.size(), j = idx % d_eta2.size();
    const double e1 = kNsEta1 + d_eta1[i], e2 = kNsEta2 + d_eta2[j];
    if (e1 < -1e-12 || e1 > 1.0 + 1e-12 || e2 < -1e-12 || e2 > 1.0 + 1e-12) return;
    out[i][j] = klm_objective(std::clamp(e1, 0.0, 1.0), std::clamp(e2, 0.0, 1.0), eff, opt);
  });
  return out;
}

/// Default landscape axis: from the nominal value to both [0, 1] limits,
/// `points` offsets spanning [-nominal, 1 - nominal].
inline std::vector<double> default_landscape_axis(double nominal, int points = 21) {
  std::vector<double> v;
  for (int i = 0; i < points; ++i) v.push_back(-nominal + double(i) / (points - 1));
  return v;
}

struct CrossoverRow {
  double efficiency = 1.0;
  double baseline = 0.0;
  double eta1_one = 0.0;  // eta1 = 1, eta2 optimized
  double joint = 0.0;
};

inline std::vector<CrossoverRow> crossover_scan(std::span<const double> grid, const TuneOptions& opt = {}, unsigned jobs = 1) {
  std::vector<CrossoverRow> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    const EfficiencyConfig eff{grid[i], grid[i]};
    const auto line = optimize_eta2(eff, opt);
    rows[i] = {grid[i], line.baseline_min_fidelity, line.min_fidelity, optimize_joint(eff, opt).min_fidelity};
  });
  return rows;
}

/// Efficiency at which the eta1 = 1 curve stops beating the baseline, by
/// linear interpolation of their difference; nullopt if it never changes sign.
inline std::optional<double> crossover_point(std::span<const CrossoverRow> rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double a = rows[i - 1].eta1_one - rows[i - 1].baseline;
    const double b = rows[i].eta1_one - rows[i].baseline;
    if (a > 0.0 && b <= 0.0)
      return rows[i - 1].efficiency + (rows[i].efficiency - rows[i - 1].efficiency) * a / (a - b);
  }
  return std::nullopt;
}

struct SuccessCostRow {
  double efficiency = 1.0;
  double eta2 = 0.0;
  double success_ratio = 0.0;
};

/// Success probability of the eta1 = 1 optimized gate at equal source and
/// detector efficiency, relative to the nominal lossless gate.
inline std::vector<SuccessCostRow> success_cost(std::span<const double> grid, const TuneOptions& opt = {}, unsigned jobs = 1) {
  std::vector<SuccessCostRow> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    const auto r = optimize_eta2({grid[i], grid[i]}, opt);
    rows[i] = {grid[i], r.eta2, r.success_ratio()};
  });
  return rows;
}

}  // namespace loqc
