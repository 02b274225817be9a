#pragma once

// Non-deterministic linear-optical gates as declarative GateSpec values, and
// the reference density-operator pipeline that evaluates them.
//
// Mode layout convention for every GateSpec: the input register occupies
// modes [0, k), the ancilla modes occupy [k, mode_count). After the circuit,
// each mode is exactly one of: output register, detected, or discarded.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "loqc/fock.hpp"
#include "loqc/optics.hpp"

namespace loqc {

enum class IdealAction { NonlinearSign, ControlledSign };

/// Single rail: logical 0/1 = zero/one photon in one mode. Dual rail: the
/// register holds (spectator, qubit) per logical qubit and logical x puts the
/// photon in the qubit mode when x = 1, in the spectator mode when x = 0.
enum class Encoding { SingleRail, DualRail };

struct DetectionPattern {
  std::vector<int> counts;               // photon numbers, aligned with detected_modes
  std::vector<std::size_t> phase_flips;  // output-register positions that get (-1)^n
};

struct GateSpec {
  std::string name;
  std::size_t mode_count = 0;
  std::vector<std::size_t> input_modes;
  std::vector<std::size_t> output_modes;
  std::vector<std::size_t> ancilla_modes;
  PureState ancilla_prep;  // over ancilla_modes, in that order
  std::vector<CircuitElement> elements;
  std::vector<std::size_t> detected_modes;
  std::vector<std::size_t> discarded_modes;  // ancilla outputs that are never looked at
  std::vector<DetectionPattern> patterns;
  double nominal_success = 0.0;
  IdealAction action = IdealAction::ControlledSign;
  Encoding encoding = Encoding::SingleRail;
  int max_input_photons = 2;
  std::vector<std::pair<std::string, double>> parameters;  // named reflectivities, for reports

  /// Largest photon number present in the ancilla preparation.
  int ancilla_photons() const {
    int best = 0;
    for (std::size_t i = 0; i < ancilla_prep.basis->dimension(); ++i)
      if (std::abs(ancilla_prep.amplitudes[static_cast<Eigen::Index>(i)]) > 0.0)
        best = std::max(best, total_photons(ancilla_prep.basis->occupation(i)));
    return best;
  }

  int photon_budget() const { return max_input_photons + ancilla_photons(); }

  BasisPtr input_basis() const { return enumerate_basis(input_modes.size(), max_input_photons); }
  BasisPtr output_basis() const { return enumerate_basis(output_modes.size(), photon_budget()); }
};

struct EfficiencyConfig {
  double eta_src = 1.0;
  double eta_det = 1.0;
};

inline void check_efficiency(const EfficiencyConfig& eff) {
  if (!(eff.eta_src >= 0.0 && eff.eta_src <= 1.0) || !(eff.eta_det >= 0.0 && eff.eta_det <= 1.0))
    throw std::invalid_argument("EfficiencyConfig: efficiencies must lie in [0, 1]");
}

/// Per-mode efficiencies: `source` is aligned with ancilla_modes, `detector`
/// with detected_modes.
struct LossProfile {
  std::vector<double> source;
  std::vector<double> detector;

  static LossProfile uniform(const GateSpec& gate, const EfficiencyConfig& eff) {
    check_efficiency(eff);
    return {std::vector<double>(gate.ancilla_modes.size(), eff.eta_src),
            std::vector<double>(gate.detected_modes.size(), eff.eta_det)};
  }
};

struct GateOutcome {
  DensityOperator rho_out;  // normalized, on the output register
  double success_probability = 0.0;
};

namespace detail {

inline std::vector<std::size_t> iota_modes(std::size_t from, std::size_t count) {
  std::vector<std::size_t> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = from + i;
  return v;
}

inline std::vector<std::size_t> element_modes(const CircuitElement& e) {
  if (const auto* bs = std::get_if<BeamsplitterSpec>(&e)) return {bs->first, bs->second};
  if (const auto* l = std::get_if<LossChannel>(&e)) return {l->mode};
  return {};
}

}  // namespace detail

/// Throws std::invalid_argument describing the first violated structural invariant.
inline void validate(const GateSpec& g) {
  auto fail = [&](const std::string& why) { throw std::invalid_argument(g.name + ": " + why); };
  const auto k = g.input_modes.size();
  if (g.input_modes != detail::iota_modes(0, k)) fail("input modes must be [0, k)");
  if (g.ancilla_modes != detail::iota_modes(k, g.ancilla_modes.size()))
    fail("ancilla modes must follow the input register");
  if (k + g.ancilla_modes.size() != g.mode_count) fail("input + ancilla modes must cover all modes");
  if (!g.ancilla_prep.basis || g.ancilla_prep.basis->mode_count() != g.ancilla_modes.size())
    fail("ancilla preparation must live on the ancilla modes");
  if (std::abs(g.ancilla_prep.norm2() - 1.0) > 1e-12) fail("ancilla preparation not normalized");

  std::vector<int> role(g.mode_count, 0);
  for (const auto* set : {&g.output_modes, &g.detected_modes, &g.discarded_modes})
    for (auto m : *set) {
      if (m >= g.mode_count) fail("mode index out of range");
      if (role[m]++) fail("mode " + std::to_string(m) + " has more than one output role");
    }
  for (std::size_t m = 0; m < g.mode_count; ++m)
    if (!role[m]) fail("mode " + std::to_string(m) + " is neither output, detected nor discarded");

  if (g.patterns.empty()) fail("no accepted detection pattern");
  std::set<std::vector<int>> seen;
  for (const auto& p : g.patterns) {
    if (p.counts.size() != g.detected_modes.size()) fail("pattern length != detected mode count");
    if (!seen.insert(p.counts).second) fail("detection patterns must be mutually exclusive");
    for (auto f : p.phase_flips)
      if (f >= g.output_modes.size()) fail("phase flip outside the output register");
  }
  for (const auto& e : g.elements)
    for (auto m : detail::element_modes(e))
      if (m >= g.mode_count) fail("circuit element touches an undeclared mode");
}

/// Sign (-1)^(sum of flipped occupations) for each output-register basis state.
inline Eigen::VectorXd correction_signs(const FockBasis& out_basis,
                                        std::span<const std::size_t> flips) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(out_basis.dimension()));
  for (std::size_t i = 0; i < out_basis.dimension(); ++i) {
    int n = 0;
    for (auto f : flips) n += out_basis.occupation(i)[f];
    s[static_cast<Eigen::Index>(i)] = (n % 2 == 0) ? 1.0 : -1.0;
  }
  return s;
}

/// Reference pipeline, one unnormalized output per accepted pattern:
/// ancilla source loss, circuit, detector loss, number projection, trace of
/// all non-output modes, per-pattern phase correction. Qubit modes never
/// pass through loss.
inline std::vector<DensityOperator> conditional_outputs(const GateSpec& gate, const PureState& input,
                                                        const LossProfile& loss,
                                                        LossMethod method = LossMethod::Kraus,
                                                        bool apply_corrections = true) {
  validate(gate);
  const auto in_basis = gate.input_basis();
  require_same_basis(*input.basis, *in_basis, "run_gate input");
  if (std::abs(input.norm2() - 1.0) > 1e-9) throw std::invalid_argument("run_gate: input not normalized");
  if (loss.source.size() != gate.ancilla_modes.size() || loss.detector.size() != gate.detected_modes.size())
    throw std::invalid_argument("run_gate: loss profile does not match the gate");

  const PureState full = tensor(input, gate.ancilla_prep, gate.photon_budget());
  DensityOperator rho = DensityOperator::from_pure(full);
  for (std::size_t i = 0; i < gate.ancilla_modes.size(); ++i)
    rho = apply_loss(rho, gate.ancilla_modes[i], loss.source[i], method);
  rho = apply_elements(rho, gate.elements, method);
  for (std::size_t i = 0; i < gate.detected_modes.size(); ++i)
    rho = apply_loss(rho, gate.detected_modes[i], loss.detector[i], method);

  std::vector<std::size_t> traced = gate.detected_modes;
  traced.insert(traced.end(), gate.discarded_modes.begin(), gate.discarded_modes.end());
  std::sort(traced.begin(), traced.end());

  // After tracing, surviving modes are in ascending order; map them onto the
  // declared output order.
  std::vector<std::size_t> sorted_out = gate.output_modes;
  std::sort(sorted_out.begin(), sorted_out.end());
  std::vector<std::size_t> order(gate.output_modes.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<std::size_t>(
        std::find(sorted_out.begin(), sorted_out.end(), gate.output_modes[i]) - sorted_out.begin());

  std::vector<DensityOperator> outs;
  outs.reserve(gate.patterns.size());
  for (const auto& pattern : gate.patterns) {
    DensityOperator branch = rho;
    for (std::size_t i = 0; i < gate.detected_modes.size(); ++i)
      branch = project_number(branch, gate.detected_modes[i], pattern.counts[i]).state;
    branch = permute_modes(partial_trace(branch, traced), order);
    if (apply_corrections && !pattern.phase_flips.empty()) {
      const auto s = correction_signs(*branch.basis, pattern.phase_flips);
      branch.matrix = s.asDiagonal() * branch.matrix * s.asDiagonal();
    }
    outs.push_back(std::move(branch));
  }
  return outs;
}

/// Sum of the corrected pattern outputs, before normalization.
inline DensityOperator run_gate_unnormalized(const GateSpec& gate, const PureState& input,
                                             const LossProfile& loss,
                                             LossMethod method = LossMethod::Kraus) {
  auto outs = conditional_outputs(gate, input, loss, method);
  DensityOperator total = outs.front();
  for (std::size_t i = 1; i < outs.size(); ++i) total.matrix += outs[i].matrix;
  return total;
}

inline GateOutcome run_gate(const GateSpec& gate, const PureState& input, const LossProfile& loss,
                            LossMethod method = LossMethod::Kraus) {
  const auto total = run_gate_unnormalized(gate, input, loss, method);
  const double p = total.trace();
  return {normalize(total), p};
}

inline GateOutcome run_gate(const GateSpec& gate, const PureState& input,
                            const EfficiencyConfig& eff = {}) {
  return run_gate(gate, input, LossProfile::uniform(gate, eff));
}

// ---------------------------------------------------------------------------
// Logical encodings

/// Two-qubit amplitudes ordered |00>, |10>, |01>, |11> (control digit first).
using LogicalAmplitudes = std::array<cplx, 4>;

inline constexpr std::array<std::pair<int, int>, 4> kLogicalOrder{{{0, 0}, {1, 0}, {0, 1}, {1, 1}}};

inline Occupation logical_occupation(Encoding enc, int control, int target) {
  if (enc == Encoding::SingleRail) return {control, target};
  return {1 - control, control, 1 - target, target};
}

inline PureState encode_logical(Encoding enc, const LogicalAmplitudes& amps, BasisPtr basis) {
  auto psi = PureState::zero(std::move(basis));
  for (std::size_t i = 0; i < 4; ++i) {
    const auto [c, t] = kLogicalOrder[i];
    psi.amplitudes[static_cast<Eigen::Index>(psi.basis->index_or_throw(logical_occupation(enc, c, t)))] +=
        amps[i];
  }
  return psi;
}

inline LogicalAmplitudes apply_csign(LogicalAmplitudes a) {
  a[3] = -a[3];
  return a;
}

inline PureState encode_input(const GateSpec& g, const LogicalAmplitudes& a) {
  return encode_logical(g.encoding, a, g.input_basis());
}

inline PureState encode_output(const GateSpec& g, const LogicalAmplitudes& a) {
  return encode_logical(g.encoding, a, g.output_basis());
}

// ---------------------------------------------------------------------------
// Gate constructions

inline const double kNsEta1 = 5.0 - 3.0 * std::numbers::sqrt2;
inline const double kNsEta2 = (3.0 - std::numbers::sqrt2) / 7.0;
inline const double kKnillEta1 = 1.0 / 3.0;
inline const double kKnillEta2 = (3.0 + std::sqrt(6.0)) / 6.0;

namespace detail {

inline BeamsplitterSpec bs(double eta, SignConvention c, Orientation o, std::size_t a, std::size_t b) {
  return {eta, c, o, a, b};
}

inline void check_ns_reflectivities(double eta1, double eta2) {
  check_reflectivity(eta1, "NS gate eta1");
  check_reflectivity(eta2, "NS gate eta2");
}

// The two NS beamsplitters acting on `signal`: eta1 couples the vacuum
// ancilla, eta2 the single-photon ancilla. Orientations are the ones that
// pass the ideal truth check (see tests/test_gates.cpp).
inline void append_ns(std::vector<CircuitElement>& els, double eta1, double eta2, std::size_t signal,
                      std::size_t photon, std::size_t vacuum) {
  els.emplace_back(bs(eta1, SignConvention::OnReflection, Orientation::BA, signal, vacuum));
  els.emplace_back(bs(eta2, SignConvention::OnReflection, Orientation::AB, signal, photon));
}

}  // namespace detail

/// Nonlinear sign gate on one signal mode (mode 0), ancilla |1>|0> on modes
/// 1 (photon) and 2 (vacuum); success when the ancilla is found as injected.
inline GateSpec build_ns(double eta1 = kNsEta1, double eta2 = kNsEta2) {
  detail::check_ns_reflectivities(eta1, eta2);
  GateSpec g;
  g.name = "ns";
  g.mode_count = 3;
  g.input_modes = {0};
  g.ancilla_modes = {1, 2};
  g.ancilla_prep = PureState::basis_state(enumerate_basis(2, 1), {1, 0});
  detail::append_ns(g.elements, eta1, eta2, 0, 1, 2);
  g.output_modes = {0};
  g.detected_modes = {1, 2};
  g.patterns = {{{1, 0}, {}}};
  // The vacuum-input success amplitude is the photon-ancilla reflection amplitude.
  g.nominal_success = eta2;
  g.action = IdealAction::NonlinearSign;
  g.max_input_photons = 2;
  g.parameters = {{"eta1", eta1}, {"eta2", eta2}};
  return g;
}

/// Simplified KLM C-sign: a balanced Mach-Zehnder (modes 0, 1) with one NS
/// gate per arm. Modes 2/3 and 4/5 are the photon/vacuum ancillas of the two
/// NS gates, which share the same reflectivities.
inline GateSpec build_klm(double eta1 = kNsEta1, double eta2 = kNsEta2) {
  detail::check_ns_reflectivities(eta1, eta2);
  GateSpec g;
  g.name = "klm";
  g.mode_count = 6;
  g.input_modes = {0, 1};
  g.ancilla_modes = {2, 3, 4, 5};
  g.ancilla_prep = PureState::basis_state(enumerate_basis(4, 2), {1, 0, 1, 0});
  const auto half = [](std::size_t a, std::size_t b) {
    return detail::bs(0.5, SignConvention::OnReflection, Orientation::AB, a, b);
  };
  g.elements.emplace_back(half(0, 1));
  detail::append_ns(g.elements, eta1, eta2, 0, 2, 3);
  detail::append_ns(g.elements, eta1, eta2, 1, 4, 5);
  g.elements.emplace_back(half(0, 1));
  g.output_modes = {0, 1};
  g.detected_modes = {2, 3, 4, 5};
  g.patterns = {{{1, 0, 1, 0}, {}}};
  g.nominal_success = eta2 * eta2;
  g.parameters = {{"eta1", eta1}, {"eta2", eta2}};
  return g;
}

/// Knill C-sign: qubit modes 0, 1 and two single-photon ancillas (modes 2, 3),
/// all beamsplitters in the sign-on-transmission convention. Success when
/// each ancilla mode holds one photon. The network realizes C-sign up to a
/// fixed pi phase on both outputs, which the pattern correction removes.
inline GateSpec build_knill() {
  GateSpec g;
  g.name = "knill";
  g.mode_count = 4;
  g.input_modes = {0, 1};
  g.ancilla_modes = {2, 3};
  g.ancilla_prep = PureState::basis_state(enumerate_basis(2, 2), {1, 1});
  constexpr auto T = SignConvention::OnTransmission;
  g.elements = {
      detail::bs(kKnillEta1, T, Orientation::AB, 0, 2),
      detail::bs(kKnillEta1, T, Orientation::BA, 1, 3),
      detail::bs(kKnillEta2, T, Orientation::AB, 2, 3),
      detail::bs(kKnillEta1, T, Orientation::AB, 0, 1),
  };
  g.output_modes = {0, 1};
  g.detected_modes = {2, 3};
  g.patterns = {{{1, 1}, {0, 1}}};
  g.nominal_success = 2.0 / 27.0;
  g.parameters = {{"eta1", kKnillEta1}, {"eta2", kKnillEta2}};
  return g;
}

/// Pittman-Jacobs-Franson C-sign. Ancilla modes a1..a4 (modes 2..5) start in
/// (|0110> + |1001>)/sqrt(2). Detector pair (0, 2) checks the control against
/// a1, pair (1, 3) the target against a2 after a2 has been mixed with a4; the
/// outputs are a3 (control) and a4 (target). Each pair must register exactly
/// one photon; the four accepted patterns each carry a phase-flip correction.
inline GateSpec build_pjf() {
  GateSpec g;
  g.name = "pjf";
  g.mode_count = 6;
  g.input_modes = {0, 1};
  g.ancilla_modes = {2, 3, 4, 5};
  auto anc = PureState::zero(enumerate_basis(4, 2));
  const double h = std::numbers::sqrt2 / 2.0;
  anc.amplitudes[static_cast<Eigen::Index>(anc.basis->index_or_throw({0, 1, 1, 0}))] = h;
  anc.amplitudes[static_cast<Eigen::Index>(anc.basis->index_or_throw({1, 0, 0, 1}))] = h;
  g.ancilla_prep = std::move(anc);
  constexpr auto R = SignConvention::OnReflection;
  g.elements = {
      detail::bs(0.5, R, Orientation::AB, 0, 2),
      detail::bs(0.5, R, Orientation::AB, 3, 5),
      detail::bs(0.5, R, Orientation::AB, 1, 3),
  };
  g.output_modes = {4, 5};
  g.detected_modes = {0, 2, 1, 3};
  g.patterns = {
      {{1, 0, 1, 0}, {1}},
      {{1, 0, 0, 1}, {}},
      {{0, 1, 1, 0}, {0, 1}},
      {{0, 1, 0, 1}, {0}},
  };
  g.nominal_success = 0.25;
  g.parameters = {{"bs", 0.5}};
  return g;
}

inline std::optional<GateSpec> gate_by_name(const std::string& name) {
  if (name == "klm") return build_klm();
  if (name == "knill") return build_knill();
  if (name == "pjf") return build_pjf();
  if (name == "ns") return build_ns();
  return std::nullopt;
}

/// Dual-rail form of a single-rail C-sign gate: one spectator mode per qubit
/// is adjoined. Register layout (control spectator, control, target
/// spectator, target); the spectators never meet any element.
inline GateSpec make_dual_rail(const GateSpec& single) {
  if (single.encoding != Encoding::SingleRail || single.input_modes.size() != 2 ||
      single.output_modes.size() != 2)
    throw std::invalid_argument("make_dual_rail: expects a single-rail two-qubit gate");
  auto map = [](std::size_t m) -> std::size_t { return m == 0 ? 1 : (m == 1 ? 3 : m + 2); };
  GateSpec g = single;
  g.name = single.name + "-dual";
  g.mode_count = single.mode_count + 2;
  g.input_modes = {0, 1, 2, 3};
  g.ancilla_modes.clear();
  for (auto m : single.ancilla_modes) g.ancilla_modes.push_back(map(m));
  g.output_modes = {0, map(single.output_modes[0]), 2, map(single.output_modes[1])};
  for (auto& m : g.detected_modes) m = map(m);
  for (auto& m : g.discarded_modes) m = map(m);
  for (auto& p : g.patterns)
    for (auto& f : p.phase_flips) f = (f == 0) ? 1 : 3;
  g.elements.clear();
  for (const auto& e : single.elements) {
    if (const auto* b = std::get_if<BeamsplitterSpec>(&e)) {
      auto nb = *b;
      nb.first = map(b->first);
      nb.second = map(b->second);
      g.elements.emplace_back(nb);
    } else if (const auto* l = std::get_if<LossChannel>(&e)) {
      g.elements.emplace_back(LossChannel{l->efficiency, map(l->mode)});
    } else {
      const auto& p = std::get<ModePermutation>(e);
      ModePermutation np{std::vector<std::size_t>(g.mode_count)};
      np.target[0] = 0;
      np.target[2] = 2;
      for (std::size_t i = 0; i < p.target.size(); ++i) np.target[map(i)] = map(p.target[i]);
      g.elements.emplace_back(np);
    }
  }
  g.encoding = Encoding::DualRail;
  return g;
}

// ---------------------------------------------------------------------------
// Ideal operation

struct TruthCase {
  std::string label;
  double fidelity = 0.0;
  double success = 0.0;
};

struct TruthReport {
  std::string gate;
  bool passed = false;
  std::vector<TruthCase> cases;
  std::vector<std::string> failures;
};

namespace detail {

inline std::vector<std::pair<std::string, std::pair<PureState, PureState>>> truth_inputs(const GateSpec& g) {
  std::vector<std::pair<std::string, std::pair<PureState, PureState>>> cases;
  if (g.action == IdealAction::NonlinearSign) {
    const auto in_b = g.input_basis();
    const auto out_b = g.output_basis();
    for (int n = 0; n <= 2; ++n)
      cases.push_back({"|" + std::to_string(n) + ">",
                       {PureState::basis_state(in_b, {n}), PureState::basis_state(out_b, {n}, n == 2 ? -1.0 : 1.0)}});
    const double s = 1.0 / std::sqrt(3.0);
    auto in = PureState::zero(in_b);
    auto out = PureState::zero(out_b);
    for (int n = 0; n <= 2; ++n) {
      in.amplitudes[static_cast<Eigen::Index>(in_b->index_or_throw({n}))] = s;
      out.amplitudes[static_cast<Eigen::Index>(out_b->index_or_throw({n}))] = n == 2 ? -s : s;
    }
    cases.push_back({"(|0>+|1>+|2>)/sqrt3", {in, out}});
    return cases;
  }
  static const char* labels[] = {"|00>", "|10>", "|01>", "|11>"};
  for (std::size_t i = 0; i < 4; ++i) {
    LogicalAmplitudes a{};
    a[i] = 1.0;
    cases.push_back({labels[i], {encode_input(g, a), encode_output(g, apply_csign(a))}});
  }
  const LogicalAmplitudes plus{0.5, 0.5, 0.5, 0.5};
  cases.push_back({"(|0>+|1>)(|0>+|1>)/2", {encode_input(g, plus), encode_output(g, apply_csign(plus))}});
  return cases;
}

}  // namespace detail

/// Runs the gate losslessly on the basis states and an equal superposition;
/// passes iff every fidelity is >= 1 - 1e-9 and every success probability is
/// within `success_tol` of nominal_success.
inline TruthReport ideal_truth_check(const GateSpec& gate, double success_tol = 1e-9) {
  TruthReport rep;
  rep.gate = gate.name;
  try {
    for (const auto& [label, io] : detail::truth_inputs(gate)) {
      const auto out = run_gate(gate, io.first, EfficiencyConfig{1.0, 1.0});
      const double f = fidelity(out.rho_out, io.second);
      rep.cases.push_back({label, f, out.success_probability});
      if (f < 1.0 - 1e-9) rep.failures.push_back(label + ": fidelity " + std::to_string(f));
      if (std::abs(out.success_probability - gate.nominal_success) > success_tol)
        rep.failures.push_back(label + ": success " + std::to_string(out.success_probability) +
                               " != nominal " + std::to_string(gate.nominal_success));
    }
  } catch (const Error& e) {
    rep.failures.push_back(std::string("numerical failure: ") + e.what());
  }
  rep.passed = rep.failures.empty();
  return rep;
}

/// For each detection pattern, the phase flips (subset of the two output
/// qubits) that turn its lossless conditional map into C-sign, found by
/// trying all four subsets. nullopt for a pattern where none works.
inline std::vector<std::optional<std::vector<std::size_t>>> derive_phase_corrections(const GateSpec& gate) {
  if (gate.action != IdealAction::ControlledSign)
    throw std::invalid_argument("derive_phase_corrections: C-sign gates only");
  const std::vector<std::vector<std::size_t>> candidates{{}, {0}, {1}, {0, 1}};
  std::vector<std::optional<std::vector<std::size_t>>> result(gate.patterns.size());
  for (std::size_t p = 0; p < gate.patterns.size(); ++p) {
    GateSpec trial = gate;
    trial.patterns = {gate.patterns[p]};
    for (const auto& flips : candidates) {
      trial.patterns[0].phase_flips = flips;
      bool ok = true;
      for (const auto& [label, io] : detail::truth_inputs(trial)) {
        const auto out = run_gate_unnormalized(trial, io.first, LossProfile::uniform(trial, {1.0, 1.0}));
        if (out.trace() <= kNearZeroTrace || fidelity(normalize(out), io.second) < 1.0 - 1e-9) {
          ok = false;
          break;
        }
      }
      if (ok) {
        result[p] = flips;
        break;
      }
    }
  }
  return result;
}

}  // namespace loqc
