#pragma once

// The acceptance suite shared by `loqc verify` and the acceptance test.
// Reports contain only deterministic text (no timings); runtime limits are
// enforced by failing the criterion.

#include <chrono>
#include <functional>
#include <random>
#include <sstream>

#include "loqc/csv.hpp"
#include "loqc/tuner.hpp"

namespace loqc::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
};

struct Options {
  // Mutation hook for testing the suite itself: flips the sign convention
  // of the first KLM beamsplitter.
  bool flip_klm_sign = false;
};

struct Report {
  std::vector<CriterionResult> criteria;
  bool passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.passed; });
  }
  std::string render() const {
    std::ostringstream os;
    for (const auto& c : criteria)
      os << (c.passed ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.title << ": " << c.detail << '\n';
    os << (passed() ? "ALL CRITERIA PASSED" : "ACCEPTANCE FAILED") << '\n';
    return os.str();
  }
};

namespace detail {

inline std::string fx(double v, int digits = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

inline std::string sci(double v) {
  std::ostringstream os;
  os.setf(std::ios::scientific);
  os.precision(2);
  os << v;
  return os.str();
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Gates {
  GateSpec klm, knill, pjf;
};

inline Gates make_gates(const Options& opt) {
  Gates g{build_klm(), build_knill(), build_pjf()};
  if (opt.flip_klm_sign) {
    auto& bs = std::get<BeamsplitterSpec>(g.klm.elements.front());
    bs.convention = bs.convention == SignConvention::OnReflection ? SignConvention::OnTransmission
                                                                  : SignConvention::OnReflection;
  }
  return g;
}

inline std::vector<double> grid(double from, double to, double step) { return linear_grid(from, to, step); }

inline std::string strip_separator(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == ';')) s.pop_back();
  return s;
}

}  // namespace detail

inline CriterionResult ideal_truth_tables(const detail::Gates& g) {
  CriterionResult r{1, "ideal truth tables", true, ""};
  detail::Timer t;
  std::ostringstream os;
  for (const auto* gate : {&g.klm, &g.knill, &g.pjf}) {
    const auto rep = ideal_truth_check(*gate, 1.0);  // success is criterion 2
    double worst = 1.0;
    for (const auto& c : rep.cases) worst = std::min(worst, c.fidelity);
    os << gate->name << " min F=" << detail::fx(worst, 10) << "; ";
    if (!rep.passed) {
      r.passed = false;
      os << "ideal_truth_check failed for " << gate->name << " (" << rep.failures.front() << "); ";
    }
  }
  if (t.seconds() > 10.0) {
    r.passed = false;
    os << "runtime limit of 10 s exceeded";
  }
  r.detail = detail::strip_separator(os.str());
  return r;
}

inline CriterionResult ideal_success(const detail::Gates& g) {
  CriterionResult r{2, "ideal success probabilities", true, ""};
  std::ostringstream os;
  auto check = [&](const GateSpec& gate, double target, double tol) {
    double lo = 1.0, hi = 0.0;
    for (const auto& c : ideal_truth_check(gate, 1.0).cases) {
      lo = std::min(lo, c.success);
      hi = std::max(hi, c.success);
    }
    const bool ok = std::abs(lo - target) <= tol && std::abs(hi - target) <= tol;
    r.passed = r.passed && ok;
    os << gate.name << " P=" << detail::fx(lo, 10) << (hi - lo > 1e-12 ? ".." + detail::fx(hi, 10) : "") << "; ";
  };
  check(g.klm, 0.05, 0.003);
  check(g.knill, 2.0 / 27.0, 1e-9);
  check(g.pjf, 0.25, 1e-9);
  r.detail = detail::strip_separator(os.str());
  return r;
}

inline CriterionResult ns_gate_action() {
  CriterionResult r{3, "NS gate conditional map", true, ""};
  const auto ns = build_ns();
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> normal;
  std::vector<double> successes;
  double worst = 1.0;
  for (int i = 0; i < 20; ++i) {
    auto in = PureState::zero(ns.input_basis());
    for (Eigen::Index k = 0; k < 3; ++k) in.amplitudes[k] = cplx{normal(rng), normal(rng)};
    in.amplitudes /= std::sqrt(in.norm2());
    auto expected = PureState::zero(ns.output_basis());
    for (Eigen::Index k = 0; k < 3; ++k) {
      const auto idx = static_cast<Eigen::Index>(expected.basis->index_or_throw({static_cast<int>(k)}));
      expected.amplitudes[idx] = (k == 2 ? -1.0 : 1.0) * in.amplitudes[k];
    }
    const auto out = run_gate(ns, in, EfficiencyConfig{1.0, 1.0});
    worst = std::min(worst, fidelity(out.rho_out, expected));
    successes.push_back(out.success_probability);
  }
  double mean = 0.0, var = 0.0;
  for (double s : successes) mean += s / 20.0;
  for (double s : successes) var += (s - mean) * (s - mean) / 20.0;
  r.passed = worst >= 1.0 - 1e-9 && var < 1e-18;
  r.detail = "min F=" + detail::fx(worst, 10) + ", success mean=" + detail::fx(mean, 10) +
             ", variance " + (var < 1e-18 ? "< 1e-18" : detail::sci(var));
  return r;
}

inline CriterionResult loss_oracle() {
  CriterionResult r{4, "loss channel oracle equivalence", true, ""};
  detail::Timer t;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t modes = 1 + static_cast<std::size_t>(i % 3);
    const auto basis = enumerate_basis(modes, 3);
    // Rank-2 mixture so coherences and populations are both exercised.
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(basis->dimension()),
                                                static_cast<Eigen::Index>(basis->dimension()));
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXcd v(m.rows());
      for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = cplx{normal(rng), normal(rng)};
      m += v * v.adjoint();
    }
    const DensityOperator rho{basis, m / m.trace().real()};
    const std::size_t mode = static_cast<std::size_t>(i) % modes;
    const double eta = unit(rng);
    const auto a = apply_loss(rho, mode, eta, LossMethod::Kraus);
    const auto b = apply_loss(rho, mode, eta, LossMethod::AncillaTrace);
    worst = std::max(worst, (a.matrix - b.matrix).cwiseAbs().maxCoeff());
  }
  r.passed = worst <= 1e-10;
  r.detail = "max deviation " + detail::sci(worst) + " over 100 states";
  if (t.seconds() > 5.0) {
    r.passed = false;
    r.detail += "; runtime limit of 5 s exceeded";
  }
  return r;
}

inline CriterionResult detector_crossover(const detail::Gates& g) {
  CriterionResult r{5, "detector-efficiency crossover (Knill vs KLM)", true, ""};
  const auto grid = detail::grid(0.80, 0.99, 0.01);
  const auto klm = sweep_efficiency(g.klm, SweepAxis::Detector, grid);
  const auto knill = sweep_efficiency(g.knill, SweepAxis::Detector, grid);
  std::optional<double> crossing;
  bool low_ok = true, high_ok = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double diff = knill[i].min_fidelity - klm[i].min_fidelity;
    if (grid[i] <= 0.90 + 1e-12 && !(diff < 0.0)) low_ok = false;
    if (grid[i] >= 0.95 - 1e-12 && !(diff > 0.0)) high_ok = false;
    if (i > 0 && !crossing) {
      const double prev = knill[i - 1].min_fidelity - klm[i - 1].min_fidelity;
      if (prev < 0.0 && diff >= 0.0) crossing = grid[i - 1] + (grid[i] - grid[i - 1]) * (-prev) / (diff - prev);
    }
  }
  const bool cross_ok = crossing && *crossing >= 0.91 && *crossing <= 0.95;
  r.passed = low_ok && high_ok && cross_ok;
  const auto at = [&](double e) {
    const auto i = static_cast<std::size_t>(std::lround((e - 0.80) / 0.01));
    return "knill-klm@" + detail::fx(e, 2) + "=" + detail::fx(knill[i].min_fidelity - klm[i].min_fidelity, 6);
  };
  r.detail = at(0.90) + ", " + at(0.93) + ", " + at(0.95) + ", " + at(0.99) + "; crossing " +
             (crossing ? detail::fx(*crossing, 4) : std::string("none"));
  return r;
}

inline CriterionResult source_ordering(const detail::Gates& g) {
  CriterionResult r{6, "source-efficiency ordering (KLM highest)", true, ""};
  const auto grid = detail::grid(0.80, 1.0, 0.02);
  const auto klm = sweep_efficiency(g.klm, SweepAxis::Source, grid);
  const auto knill = sweep_efficiency(g.knill, SweepAxis::Source, grid);
  const auto pjf = sweep_efficiency(g.pjf, SweepAxis::Source, grid);
  double margin = 1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double m = klm[i].min_fidelity - std::max(knill[i].min_fidelity, pjf[i].min_fidelity);
    if (grid[i] < 1.0) margin = std::min(margin, m);
    else if (m < -1e-9) margin = std::min(margin, m);
  }
  r.passed = margin > 0.0;
  r.detail = "smallest margin below unity " + detail::fx(margin, 6) + " (klm@0.80=" + detail::fx(klm.front().min_fidelity) +
             ", knill=" + detail::fx(knill.front().min_fidelity) + ", pjf=" + detail::fx(pjf.front().min_fidelity) + ")";
  return r;
}

inline CriterionResult klm_bias(const detail::Gates& g) {
  CriterionResult r{7, "KLM bias structure at detector efficiency 0.9", true, ""};
  const EfficiencyConfig eff{1.0, 0.9};
  const double f00 = fidelity_at(g.klm, eff, {0.0, 0.0, 0.0}).fidelity;
  const double f10 = fidelity_at(g.klm, eff, {std::numbers::pi / 2, 0.0, 0.0}).fidelity;
  const double f01 = fidelity_at(g.klm, eff, {std::numbers::pi / 2, std::numbers::pi / 2, 0.0}).fidelity;
  const auto row = min_fidelity(g.klm, eff);
  r.passed = std::abs(f00 - 1.0) <= 1e-9 && std::abs(f01 - f10) <= 1e-9 && std::abs(row.min_fidelity - f01) <= 1e-6;
  r.detail = "F(00)=" + detail::fx(f00, 10) + ", F(01)=" + detail::fx(f01, 10) + ", F(10)=" + detail::fx(f10, 10) +
             ", min=" + detail::fx(row.min_fidelity, 10);
  return r;
}

inline CriterionResult tuning_optima() {
  CriterionResult r{8, "tuning optima", true, ""};
  const auto a = optimize_eta2({0.98, 1.0});
  const auto b = optimize_joint({0.98, 1.0});
  const auto c = optimize_eta2({0.8, 1.0});
  const auto d = optimize_joint({0.8, 1.0});
  const bool ok_a = std::abs(a.min_fidelity - 0.956) <= 0.005;
  const bool ok_b = std::abs(b.min_fidelity - 0.959) <= 0.005 && std::abs(b.eta1 - 0.7703) <= 0.02 &&
                    std::abs(b.eta2 - 0.1838) <= 0.02;
  const bool ok_c = std::abs(c.min_fidelity - 0.723) <= 0.005;
  const bool ok_d = d.min_fidelity - c.min_fidelity < 0.001;
  r.passed = ok_a && ok_b && ok_c && ok_d;
  r.detail = "eta2-only@0.98=" + detail::fx(a.min_fidelity, 4) + ", joint@0.98=" + detail::fx(b.min_fidelity, 4) + " at (" +
             detail::fx(b.eta1, 4) + ", " + detail::fx(b.eta2, 4) + "), eta2-only@0.80=" + detail::fx(c.min_fidelity, 4) +
             ", joint gain@0.80=" + detail::fx(d.min_fidelity - c.min_fidelity, 5);
  return r;
}

/// min_fidelity along eta1 from the nominal value to 1, each point at its own best eta2.
inline std::vector<std::pair<double, double>> eta1_profile(const EfficiencyConfig& eff, const TuneOptions& opt = {}) {
  std::vector<double> eta1s{kNsEta1};
  for (double d : default_landscape_axis(kNsEta1))
    if (d > 1e-12) eta1s.push_back(kNsEta1 + d);
  std::vector<std::pair<double, double>> out;
  for (double e1 : eta1s) {
    const double e2 = best_eta2(std::min(e1, 1.0), eff, opt).first;
    out.emplace_back(e1, klm_objective(std::min(e1, 1.0), e2, eff, opt.verify));
  }
  return out;
}

inline CriterionResult landscape_monotonicity() {
  CriterionResult r{9, "landscape monotone in eta1 at detector efficiency 0.9", true, ""};
  const auto prof = eta1_profile({1.0, 0.9});
  std::ostringstream os;
  for (std::size_t i = 0; i < prof.size(); ++i) {
    if (i > 0 && prof[i].second < prof[i - 1].second - 1e-6) r.passed = false;
    os << detail::fx(prof[i].first, 3) << ":" << detail::fx(prof[i].second, 6) << (i + 1 < prof.size() ? " " : "");
  }
  r.detail = detail::strip_separator(os.str());
  return r;
}

inline CriterionResult eta1_crossover() {
  CriterionResult r{10, "eta1=1 improvement crossover near unity", true, ""};
  const auto grid = detail::grid(0.99, 1.0, 0.001);
  const auto rows = crossover_scan(grid);
  const auto cross = crossover_point(rows);
  bool consistent = cross.has_value();
  if (cross)
    for (const auto& row : rows) {
      const double gain = row.eta1_one - row.baseline;
      if (row.efficiency < *cross && !(gain > 0.0)) consistent = false;
      if (row.efficiency > *cross && gain > 0.0) consistent = false;
    }
  r.passed = consistent && std::abs(*cross - 0.995) <= 0.002;
  r.detail = "crossover " + (cross ? detail::fx(*cross, 4) : std::string("none")) + ", gain@0.990=" +
             detail::fx(rows.front().eta1_one - rows.front().baseline, 5) +
             ", gain@1.000=" + detail::fx(rows.back().eta1_one - rows.back().baseline, 5);
  return r;
}

inline CriterionResult success_floor() {
  CriterionResult r{11, "success-probability floor", true, ""};
  const auto grid = detail::grid(0.80, 1.0, 0.02);
  const auto rows = success_cost(grid);
  double lowest = 1e9;
  for (const auto& row : rows) lowest = std::min(lowest, row.success_ratio);
  r.passed = lowest >= 0.2 - 0.02;
  r.detail = "lowest ratio " + detail::fx(lowest, 4) + " (at 0.80: " + detail::fx(rows.front().success_ratio, 4) + ")";
  return r;
}

inline CriterionResult dual_rail(const detail::Gates& g) {
  CriterionResult r{12, "dual-rail equivalence", true, ""};
  detail::Timer t;
  std::ostringstream os;
  for (double det : {1.0, 0.9}) {
    const auto c = dual_rail_equivalence_check(g.klm, {1.0, det});
    const double gap = std::abs(c.single_rail - c.dual_rail);
    if (gap > 1e-9 || c.max_pointwise_gap > 1e-9) r.passed = false;
    os << "det " << detail::fx(det, 1) << ": single=" << detail::fx(c.single_rail, 10) << " dual=" << detail::fx(c.dual_rail, 10)
       << (gap > 1e-9 || c.max_pointwise_gap > 1e-9 ? " MISMATCH" : "") << "; ";
  }
  if (t.seconds() > 300.0) {
    r.passed = false;
    os << "runtime limit of 5 min exceeded";
  }
  r.detail = detail::strip_separator(os.str());
  return r;
}

inline CriterionResult headline() {
  CriterionResult r{13, "optimized KLM at efficiencies 0.9", true, ""};
  const EfficiencyConfig eff{0.9, 0.9};
  const auto a = optimize_eta2(eff);
  const auto b = optimize_joint(eff);
  const double best = std::max(a.min_fidelity, b.min_fidelity);
  r.passed = best >= 0.8;
  r.detail = "optimized min fidelity " + detail::fx(best, 4) + " (baseline " + detail::fx(a.baseline_min_fidelity, 4) + ")";
  return r;
}

inline CriterionResult guarded(int id, const std::string& title, const std::function<CriterionResult()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {id, title, false, std::string("numerical failure: ") + e.what()};
  }
}

inline Report run_criteria_1_to_13(const Options& opt = {}) {
  const auto gates = detail::make_gates(opt);
  Report rep;
  auto add = [&](int id, const char* title, const std::function<CriterionResult()>& fn) {
    rep.criteria.push_back(guarded(id, title, fn));
  };
  add(1, "ideal truth tables", [&] { return ideal_truth_tables(gates); });
  add(2, "ideal success probabilities", [&] { return ideal_success(gates); });
  add(3, "NS gate conditional map", [] { return ns_gate_action(); });
  add(4, "loss channel oracle equivalence", [] { return loss_oracle(); });
  add(5, "detector-efficiency crossover (Knill vs KLM)", [&] { return detector_crossover(gates); });
  add(6, "source-efficiency ordering (KLM highest)", [&] { return source_ordering(gates); });
  add(7, "KLM bias structure at detector efficiency 0.9", [&] { return klm_bias(gates); });
  add(8, "tuning optima", [] { return tuning_optima(); });
  add(9, "landscape monotone in eta1 at detector efficiency 0.9", [] { return landscape_monotonicity(); });
  add(10, "eta1=1 improvement crossover near unity", [] { return eta1_crossover(); });
  add(11, "success-probability floor", [] { return success_floor(); });
  add(12, "dual-rail equivalence", [&] { return dual_rail(gates); });
  add(13, "optimized KLM at efficiencies 0.9", [] { return headline(); });
  return rep;
}

/// Criterion 14 in-process: a second full evaluation must render the same
/// report, and a sweep CSV must not depend on the thread count.
inline CriterionResult determinism(const Report& first, const Options& opt) {
  CriterionResult r{14, "determinism", true, ""};
  const bool same_report = run_criteria_1_to_13(opt).render() == first.render();
  const auto grid = detail::grid(0.80, 1.0, 0.02);
  const auto gates = detail::make_gates(opt);
  const auto one = csv::sweep(sweep_efficiency(gates.klm, SweepAxis::JointEqual, grid, {}, 1));
  const auto eight = csv::sweep(sweep_efficiency(gates.klm, SweepAxis::JointEqual, grid, {}, 8));
  r.passed = same_report && one == eight;
  r.detail = std::string("repeat report ") + (same_report ? "identical" : "DIFFERS") + ", sweep CSV jobs 1 vs 8 " +
             (one == eight ? "identical" : "DIFFERS");
  return r;
}

inline Report run_all(const Options& opt = {}) {
  auto rep = run_criteria_1_to_13(opt);
  rep.criteria.push_back(guarded(14, "determinism", [&] { return determinism(rep, opt); }));
  return rep;
}

}  // namespace loqc::acceptance
