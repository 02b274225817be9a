#pragma once

// Worst-case fidelity over the real two-qubit input family
//   cos a |00> + sin a cos b |10> + sin a sin b cos c |01> + sin a sin b sin c |11>,
// a, b, c in [0, pi], and efficiency sweeps built on it.

#include <cmath>
#include <numbers>
#include <optional>

#include "loqc/channel.hpp"
#include "loqc/optimize.hpp"
#include "loqc/parallel.hpp"

namespace loqc {

struct InputParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  // Extended search only: phases on the control and target excitations.
  double phase_control = 0.0;
  double phase_target = 0.0;

  friend bool operator==(const InputParams&, const InputParams&) = default;
};

inline LogicalAmplitudes input_amplitudes(const InputParams& p) {
  const double sa = std::sin(p.alpha), sb = std::sin(p.beta);
  const cplx ec = std::polar(1.0, p.phase_control), et = std::polar(1.0, p.phase_target);
  return {cplx{std::cos(p.alpha)}, sa * std::cos(p.beta) * ec, sa * sb * std::cos(p.gamma) * et,
          sa * sb * std::sin(p.gamma) * ec * et};
}

inline PureState input_state(const GateSpec& g, const InputParams& p) { return encode_input(g, input_amplitudes(p)); }

inline PureState expected_output(const GateSpec& g, const InputParams& p) {
  return encode_output(g, apply_csign(input_amplitudes(p)));
}

struct FidelitySample {
  double fidelity = 0.0;
  double success = 0.0;
};

/// Reference evaluation through the density-operator pipeline.
inline FidelitySample fidelity_at(const GateSpec& gate, const EfficiencyConfig& eff, const InputParams& p) {
  const auto out = run_gate(gate, input_state(gate, p), eff);
  return {fidelity(out.rho_out, expected_output(gate, p)), out.success_probability};
}

struct SweepRow {
  double eta_src = 1.0;
  double eta_det = 1.0;
  double min_fidelity = 1.0;
  InputParams argmin;
  double success_at_argmin = 0.0;
  double success_avg_basis = 0.0;
  bool boundary = false;  // argmin has an angle at 0 or pi
  double coarse_min = 1.0;  // best value on the grid before refinement

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct MinFidelityOptions {
  int grid_points = 17;
  int refine_starts = 5;
  double ftol = 1e-12;  // Nelder-Mead simplex spread in fidelity
  double xtol = 1e-9;   // and in radians
  bool complex_phases = false;
  int phase_points = 4;  // grid over [0, 2pi) per phase when complex_phases is set
};

namespace detail {

inline InputParams params_from(std::span<const double> x) {
  InputParams p{x[0], x[1], x[2]};
  if (x.size() == 5) {
    p.phase_control = x[3];
    p.phase_target = x[4];
  }
  return p;
}

inline bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline bool on_boundary(const InputParams& p) {
  constexpr double tol = 1e-6;
  for (double v : {p.alpha, p.beta, p.gamma})
    if (v < tol || v > std::numbers::pi - tol) return true;
  return false;
}

}  // namespace detail

/// Minimum fidelity of a compiled C-sign channel: deterministic grid, then
/// Nelder-Mead from the best `refine_starts` grid points. Among refined
/// minima agreeing within 1e-9 the lexicographically smallest argmin wins.
inline SweepRow min_fidelity(const LogicalEvaluator& ev, const EfficiencyConfig& eff,
                             const MinFidelityOptions& opt = {}) {
  if (opt.grid_points < 2 || opt.refine_starts < 1)
    throw std::invalid_argument("min_fidelity: need >= 2 grid points and >= 1 refinement start");
  const std::size_t dims = opt.complex_phases ? 5 : 3;
  std::vector<double> lower(dims, 0.0), upper(dims, std::numbers::pi);
  if (opt.complex_phases) upper[3] = upper[4] = 2.0 * std::numbers::pi;

  auto objective = [&](std::span<const double> x) { return ev.evaluate(input_amplitudes(detail::params_from(x))).first; };

  std::vector<std::vector<double>> axes(dims);
  for (std::size_t d = 0; d < 3; ++d)
    for (int i = 0; i < opt.grid_points; ++i)
      axes[d].push_back(std::numbers::pi * i / (opt.grid_points - 1));
  for (std::size_t d = 3; d < dims; ++d)
    for (int i = 0; i < opt.phase_points; ++i) axes[d].push_back(2.0 * std::numbers::pi * i / opt.phase_points);

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  std::vector<std::pair<double, std::size_t>> values(total);
  std::vector<double> x(dims);
  auto decode = [&](std::size_t idx, std::vector<double>& out) {
    for (std::size_t d = dims; d-- > 0;) {
      out[d] = axes[d][idx % axes[d].size()];
      idx /= axes[d].size();
    }
  };
  for (std::size_t i = 0; i < total; ++i) {
    decode(i, x);
    values[i] = {objective(x), i};
  }
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(opt.refine_starts), total);
  std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());

  NelderMeadOptions nm;
  nm.ftol = opt.ftol;
  nm.xtol = opt.xtol;
  nm.initial_step = 0.5 / (opt.grid_points - 1);
  std::vector<MinimizeResult> refined;
  for (std::size_t s = 0; s < k; ++s) {
    decode(values[s].second, x);
    refined.push_back(nelder_mead(objective, x, lower, upper, nm));
  }
  double lowest = values.front().first;
  for (const auto& r : refined) lowest = std::min(lowest, r.value);
  const MinimizeResult* chosen = nullptr;
  for (const auto& r : refined)
    if (r.value <= lowest + 1e-9 && (!chosen || detail::lex_less(r.x, chosen->x))) chosen = &r;

  SweepRow row;
  row.eta_src = eff.eta_src;
  row.eta_det = eff.eta_det;
  row.coarse_min = values.front().first;
  row.min_fidelity = lowest;
  row.argmin = detail::params_from(chosen->x);
  row.success_at_argmin = ev.evaluate(input_amplitudes(row.argmin)).second;
  double avg = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    LogicalAmplitudes a{};
    a[i] = 1.0;
    avg += ev.success(a) / 4.0;
  }
  row.success_avg_basis = avg;
  row.boundary = detail::on_boundary(row.argmin);
  return row;
}

inline SweepRow min_fidelity(const GateSpec& gate, const EfficiencyConfig& eff, const MinFidelityOptions& opt = {}) {
  check_efficiency(eff);
  const auto ch = compile_channel(gate, eff);
  return min_fidelity(LogicalEvaluator(gate, ch), eff, opt);
}

enum class SweepAxis { Detector, Source, JointEqual };

inline EfficiencyConfig sweep_point(SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::Detector: return {1.0, v};
    case SweepAxis::Source: return {v, 1.0};
    case SweepAxis::JointEqual: return {v, v};
  }
  return {};
}

/// Inclusive arithmetic grid from..to; the step count is rounded so that
/// the endpoint is hit exactly despite floating-point accumulation.
inline std::vector<double> linear_grid(double from, double to, double step) {
  if (!(step > 0.0) || to < from) throw std::invalid_argument("linear_grid: need step > 0 and to >= from");
  const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
  std::vector<double> g;
  for (long i = 0; i <= n; ++i) g.push_back(i == n && std::abs(from + n * step - to) < 1e-9 ? to : from + i * step);
  return g;
}

/// One row per grid value, in grid order; rows are computed on up to `jobs` threads.
inline std::vector<SweepRow> sweep_efficiency(const GateSpec& gate, SweepAxis axis, std::span<const double> grid,
                                              const MinFidelityOptions& opt = {}, unsigned jobs = 1) {
  for (double v : grid)
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("sweep_efficiency: grid values must lie in [0, 1]");
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) { rows[i] = min_fidelity(gate, sweep_point(axis, grid[i]), opt); });
  return rows;
}

struct DualRailComparison {
  double single_rail = 0.0;  // min_fidelity of the single-rail gate
  double dual_rail = 0.0;    // min_fidelity of its dual-rail form
  double max_pointwise_gap = 0.0;  // reference pipeline, over a coarse input grid
};

/// Compares a single-rail gate with its dual-rail form: the minimum-fidelity
/// search on both, plus a pointwise check through the density-operator
/// pipeline on a coarse grid of inputs.
inline DualRailComparison dual_rail_equivalence_check(const GateSpec& single, const EfficiencyConfig& eff,
                                                      const MinFidelityOptions& opt = {}, int reference_points = 3) {
  const auto dual = make_dual_rail(single);
  DualRailComparison out;
  out.single_rail = min_fidelity(single, eff, opt).min_fidelity;
  out.dual_rail = min_fidelity(dual, eff, opt).min_fidelity;
  const double step = std::numbers::pi / std::max(1, reference_points - 1);
  for (int i = 0; i < reference_points; ++i)
    for (int j = 0; j < reference_points; ++j)
      for (int k = 0; k < reference_points; ++k) {
        const InputParams p{i * step, j * step, k * step};
        out.max_pointwise_gap = std::max(out.max_pointwise_gap,
                                         std::abs(fidelity_at(single, eff, p).fidelity - fidelity_at(dual, eff, p).fidelity));
      }
  return out;
}

}  // namespace loqc
