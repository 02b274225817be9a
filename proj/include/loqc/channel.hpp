#pragma once

// Pure-state route to a gate's post-selected channel. Source-loss branches
// of the ancilla are expanded into pure states, every branch is propagated
// through the circuit, and detector loss is folded into the detection
// weights, so the accepted map is a finite set of Kraus matrices from the
// input register to the output register. Applied to an input state it equals
// run_gate_unnormalized (checked in tests/test_channel.cpp).

#include <map>
#include <tuple>

#include "loqc/gates.hpp"

namespace loqc {

struct ConditionalChannel {
  BasisPtr input_basis;
  BasisPtr output_basis;
  std::vector<Eigen::MatrixXcd> kraus;  // output_dim x input_dim, corrections included

  DensityOperator apply(const PureState& in) const {
    require_same_basis(*in.basis, *input_basis, "ConditionalChannel::apply");
    auto out = DensityOperator::zero(output_basis);
    for (const auto& a : kraus) {
      const Eigen::VectorXcd v = a * in.amplitudes;
      out.matrix += v * v.adjoint();
    }
    return out;
  }

  double success(const PureState& in) const {
    require_same_basis(*in.basis, *input_basis, "ConditionalChannel::success");
    double p = 0.0;
    for (const auto& a : kraus) p += (a * in.amplitudes).squaredNorm();
    return p;
  }
};

namespace detail {

inline double binomial(int n, int k) {
  return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

// Ancilla preparation after independent source loss on each ancilla mode,
// as an unnormalized pure-state ensemble (one entry per Kraus index string).
inline std::vector<Eigen::VectorXcd> source_branches(const GateSpec& gate, const LossProfile& loss) {
  const auto& basis = *gate.ancilla_prep.basis;
  std::vector<Eigen::VectorXcd> branches{gate.ancilla_prep.amplitudes};
  for (std::size_t q = 0; q < gate.ancilla_modes.size(); ++q) {
    std::vector<Eigen::VectorXcd> next;
    for (const auto& k : loss_kraus(loss.source[q], basis.max_total_photons())) {
      const auto op = embed_single_mode(k, basis, q);
      for (const auto& b : branches) {
        Eigen::VectorXcd v = op * b;
        if (v.squaredNorm() > 0.0) next.push_back(std::move(v));
      }
    }
    branches = std::move(next);
  }
  return branches;
}

}  // namespace detail

/// Compiles the accepted channel of a gate with no loss elements in its
/// circuit. Kraus matrices are keyed by (source branch, pattern, actual
/// detector counts, discarded occupations) so that distinguishable records
/// never interfere.
inline ConditionalChannel compile_channel(const GateSpec& gate, const LossProfile& loss) {
  validate(gate);
  if (loss.source.size() != gate.ancilla_modes.size() || loss.detector.size() != gate.detected_modes.size())
    throw std::invalid_argument("compile_channel: loss profile does not match the gate");
  for (double e : loss.detector) check_reflectivity(e, "detector efficiency");

  const auto in_basis = gate.input_basis();
  const auto out_basis = gate.output_basis();
  const auto full_basis = enumerate_basis(gate.mode_count, gate.photon_budget());
  const auto& anc_basis = *gate.ancilla_prep.basis;
  const Eigen::MatrixXcd u = circuit_mode_matrix(gate.elements, gate.mode_count);
  const auto branches = detail::source_branches(gate, loss);

  std::vector<Eigen::VectorXd> signs;
  for (const auto& p : gate.patterns) signs.push_back(correction_signs(*out_basis, p.phase_flips));

  using Key = std::tuple<std::size_t, std::size_t, Occupation, Occupation>;
  std::map<Key, Eigen::MatrixXcd> acc;
  const auto out_dim = static_cast<Eigen::Index>(out_basis->dimension());
  const auto in_dim = static_cast<Eigen::Index>(in_basis->dimension());
  const std::size_t k = gate.input_modes.size();

  Occupation occ(gate.mode_count), out_occ(gate.output_modes.size()), det(gate.detected_modes.size()),
      disc(gate.discarded_modes.size());
  for (std::size_t b = 0; b < branches.size(); ++b) {
    for (std::size_t n = 0; n < in_basis->dimension(); ++n) {
      auto psi = PureState::zero(full_basis);
      const auto& in_occ = in_basis->occupation(n);
      for (std::size_t j = 0; j < anc_basis.dimension(); ++j) {
        const cplx a = branches[b][static_cast<Eigen::Index>(j)];
        if (a == cplx{0.0}) continue;
        std::copy(in_occ.begin(), in_occ.end(), occ.begin());
        const auto& aj = anc_basis.occupation(j);
        std::copy(aj.begin(), aj.end(), occ.begin() + static_cast<std::ptrdiff_t>(k));
        const auto idx = full_basis->index_of(occ);
        if (!idx) throw TruncationError("compile_channel: input and ancilla exceed the photon budget");
        psi.amplitudes[static_cast<Eigen::Index>(*idx)] = a;
      }
      const auto evolved = transform_pure(psi, u);

      for (std::size_t i = 0; i < full_basis->dimension(); ++i) {
        const cplx v = evolved.amplitudes[static_cast<Eigen::Index>(i)];
        if (std::abs(v) < 1e-15) continue;
        const auto& o = full_basis->occupation(i);
        for (std::size_t q = 0; q < det.size(); ++q) det[q] = o[gate.detected_modes[q]];
        for (std::size_t q = 0; q < disc.size(); ++q) disc[q] = o[gate.discarded_modes[q]];
        for (std::size_t q = 0; q < out_occ.size(); ++q) out_occ[q] = o[gate.output_modes[q]];
        const auto row = static_cast<Eigen::Index>(out_basis->index_or_throw(out_occ));

        for (std::size_t p = 0; p < gate.patterns.size(); ++p) {
          const auto& want = gate.patterns[p].counts;
          double w = 1.0;
          for (std::size_t q = 0; q < det.size() && w != 0.0; ++q) {
            const int lost = det[q] - want[q];
            if (lost < 0) {
              w = 0.0;
              break;
            }
            const double eta = loss.detector[q];
            w *= std::sqrt(detail::binomial(det[q], lost) * std::pow(eta, want[q]) * std::pow(1.0 - eta, lost));
          }
          if (w == 0.0) continue;
          auto [it, fresh] = acc.try_emplace(Key{b, p, det, disc});
          if (fresh) it->second = Eigen::MatrixXcd::Zero(out_dim, in_dim);
          it->second(row, static_cast<Eigen::Index>(n)) += v * w * signs[p][row];
        }
      }
    }
  }

  ConditionalChannel ch{in_basis, out_basis, {}};
  ch.kraus.reserve(acc.size());
  for (auto& [key, a] : acc) ch.kraus.push_back(std::move(a));
  return ch;
}

inline ConditionalChannel compile_channel(const GateSpec& gate, const EfficiencyConfig& eff) {
  return compile_channel(gate, LossProfile::uniform(gate, eff));
}

/// Fidelity and success probability of a compiled C-sign channel restricted
/// to the logical subspace. With E (O) the encodings of the four logical
/// basis states in the input (output) register and B = O^dag A E per Kraus
/// matrix, the overlap with the ideal output d for input c is
/// sum_A |d^dag B c|^2 = w^dag Q w, w = conj(d) (x) c, and the success is
/// c^dag G c. Leakage outside the logical output subspace counts as
/// infidelity because it contributes to G but not to Q.
class LogicalEvaluator {
 public:
  LogicalEvaluator(const GateSpec& gate, const ConditionalChannel& ch) {
    if (gate.action != IdealAction::ControlledSign)
      throw std::invalid_argument("LogicalEvaluator: C-sign gates only");
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(ch.input_basis->dimension()), 4);
    Eigen::MatrixXcd o = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(ch.output_basis->dimension()), 4);
    for (int i = 0; i < 4; ++i) {
      LogicalAmplitudes a{};
      a[static_cast<std::size_t>(i)] = 1.0;
      e.col(i) = encode_logical(gate.encoding, a, ch.input_basis).amplitudes;
      o.col(i) = encode_logical(gate.encoding, a, ch.output_basis).amplitudes;
    }
    q_.setZero();
    g_.setZero();
    for (const auto& a : ch.kraus) {
      const Eigen::MatrixXcd ae = a * e;
      const Eigen::Matrix4cd b = o.adjoint() * ae;
      Eigen::Matrix<cplx, 16, 1> vb;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) vb[4 * r + c] = b(r, c);
      q_ += vb.conjugate() * vb.transpose();
      g_ += ae.adjoint() * ae;
    }
  }

  double success(const LogicalAmplitudes& c) const {
    const Eigen::Map<const Eigen::Vector4cd> cv(c.data());
    return (cv.adjoint() * g_ * cv)(0, 0).real();
  }

  /// Unnormalized overlap <d| rho_unnorm |d> for ideal output d.
  double overlap(const LogicalAmplitudes& c, const LogicalAmplitudes& d) const {
    Eigen::Matrix<cplx, 16, 1> w;
    for (int r = 0; r < 4; ++r)
      for (int k = 0; k < 4; ++k) w[4 * r + k] = std::conj(d[static_cast<std::size_t>(r)]) * c[static_cast<std::size_t>(k)];
    return (w.adjoint() * q_ * w)(0, 0).real();
  }

  /// (fidelity, success) for a normalized logical input; the ideal output is
  /// C-sign applied to it.
  std::pair<double, double> evaluate(const LogicalAmplitudes& c) const {
    const double p = success(c);
    if (p <= kNearZeroTrace) throw NearZeroTraceError("accepted pattern has vanishing probability", p);
    return {std::clamp(overlap(c, apply_csign(c)) / p, 0.0, 1.0), p};
  }

 private:
  Eigen::Matrix<cplx, 16, 16> q_;
  Eigen::Matrix4cd g_;
};

}  // namespace loqc
