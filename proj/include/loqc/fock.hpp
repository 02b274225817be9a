#pragma once

// Dense state algebra over a truncated multimode Fock space.
//
// A FockBasis enumerates every occupation vector of `mode_count` modes whose
// total photon number is at most `max_total_photons`, in lexicographic order.
// All circuit elements used here conserve total photon number, so truncating
// at the number of photons actually injected is exact.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loqc/errors.hpp"

namespace loqc {

using cplx = std::complex<double>;
using Occupation = std::vector<int>;

inline constexpr std::size_t kDefaultDimensionCap = 1'000'000;

/// Number of occupation vectors of `modes` modes with total <= `max_photons`,
/// i.e. C(max_photons + modes, modes). Returns nullopt if it exceeds `cap`.
inline std::optional<std::size_t> fock_dimension(std::size_t modes, int max_photons,
                                                 std::size_t cap = kDefaultDimensionCap) {
  // C(n + m, m) built incrementally; every partial product is itself a binomial.
  long double acc = 1;
  for (std::size_t k = 1; k <= modes; ++k) {
    acc = acc * static_cast<long double>(max_photons + static_cast<long double>(k)) /
          static_cast<long double>(k);
    if (acc > static_cast<long double>(cap) + 0.5L) return std::nullopt;
  }
  return static_cast<std::size_t>(std::llround(static_cast<double>(acc)));
}

class FockBasis {
 public:
  FockBasis(std::size_t mode_count, int max_total_photons,
            std::size_t dimension_cap = kDefaultDimensionCap)
      : mode_count_(mode_count), max_total_(max_total_photons) {
    if (mode_count == 0) throw std::invalid_argument("FockBasis: mode_count must be >= 1");
    if (max_total_photons < 0)
      throw std::invalid_argument("FockBasis: max_total_photons must be >= 0");
    const auto dim = fock_dimension(mode_count, max_total_photons, dimension_cap);
    if (!dim) {
      throw DimensionOverflowError("FockBasis: dimension for " + std::to_string(mode_count) +
                                   " modes and " + std::to_string(max_total_photons) +
                                   " photons exceeds cap " + std::to_string(dimension_cap));
    }
    states_.reserve(*dim);
    Occupation occ(mode_count, 0);
    enumerate(0, max_total_photons, occ);
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
  }

  std::size_t mode_count() const noexcept { return mode_count_; }
  int max_total_photons() const noexcept { return max_total_; }
  std::size_t dimension() const noexcept { return states_.size(); }
  const Occupation& occupation(std::size_t i) const { return states_.at(i); }
  const std::vector<Occupation>& states() const noexcept { return states_; }

  std::optional<std::size_t> index_of(const Occupation& occ) const {
    auto it = index_.find(occ);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_or_throw(const Occupation& occ) const {
    auto idx = index_of(occ);
    if (!idx) throw TruncationError("occupation vector outside the truncated basis");
    return *idx;
  }

  bool same_as(const FockBasis& other) const noexcept {
    return mode_count_ == other.mode_count_ && max_total_ == other.max_total_;
  }

 private:
  void enumerate(std::size_t mode, int budget, Occupation& occ) {
    if (mode == mode_count_) {
      states_.push_back(occ);
      return;
    }
    for (int n = 0; n <= budget; ++n) {
      occ[mode] = n;
      enumerate(mode + 1, budget - n, occ);
    }
    occ[mode] = 0;
  }

  std::size_t mode_count_;
  int max_total_;
  std::vector<Occupation> states_;
  std::map<Occupation, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

inline BasisPtr enumerate_basis(std::size_t mode_count, int max_total_photons,
                                std::size_t dimension_cap = kDefaultDimensionCap) {
  return std::make_shared<const FockBasis>(mode_count, max_total_photons, dimension_cap);
}

inline int total_photons(const Occupation& occ) { return std::accumulate(occ.begin(), occ.end(), 0); }

inline void require_same_basis(const FockBasis& a, const FockBasis& b, const char* where) {
  if (!a.same_as(b)) throw BasisMismatchError(std::string(where) + ": basis mismatch");
}

struct PureState {
  BasisPtr basis;
  Eigen::VectorXcd amplitudes;

  PureState() = default;
  PureState(BasisPtr b, Eigen::VectorXcd amps) : basis(std::move(b)), amplitudes(std::move(amps)) {
    if (static_cast<std::size_t>(amplitudes.size()) != basis->dimension())
      throw std::invalid_argument("PureState: amplitude vector length != basis dimension");
  }

  static PureState zero(BasisPtr b) {
    const auto dim = static_cast<Eigen::Index>(b->dimension());
    return {std::move(b), Eigen::VectorXcd::Zero(dim)};
  }

  static PureState basis_state(BasisPtr b, const Occupation& occ, cplx amplitude = 1.0) {
    auto s = zero(std::move(b));
    s.amplitudes[static_cast<Eigen::Index>(s.basis->index_or_throw(occ))] = amplitude;
    return s;
  }

  cplx amplitude(const Occupation& occ) const {
    auto idx = basis->index_of(occ);
    return idx ? amplitudes[static_cast<Eigen::Index>(*idx)] : cplx{0.0};
  }

  double norm2() const { return amplitudes.squaredNorm(); }
};

struct DensityOperator {
  BasisPtr basis;
  Eigen::MatrixXcd matrix;

  DensityOperator() = default;
  DensityOperator(BasisPtr b, Eigen::MatrixXcd m) : basis(std::move(b)), matrix(std::move(m)) {
    const auto dim = static_cast<Eigen::Index>(basis->dimension());
    if (matrix.rows() != dim || matrix.cols() != dim)
      throw std::invalid_argument("DensityOperator: matrix shape != basis dimension");
  }

  static DensityOperator from_pure(const PureState& psi) {
    return {psi.basis, psi.amplitudes * psi.amplitudes.adjoint()};
  }

  static DensityOperator zero(BasisPtr b) {
    const auto dim = static_cast<Eigen::Index>(b->dimension());
    return {std::move(b), Eigen::MatrixXcd::Zero(dim, dim)};
  }

  double trace() const { return matrix.trace().real(); }
};

/// Largest element-wise deviation from Hermiticity.
inline double hermiticity_error(const DensityOperator& rho) {
  return (rho.matrix - rho.matrix.adjoint()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (rho.matrix + rho.matrix.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Checks the DensityOperator invariants (Hermitian, PSD, trace in [0, 1]).
inline bool is_valid_density(const DensityOperator& rho, double tol = 1e-10) {
  const double tr = rho.trace();
  return hermiticity_error(rho) <= tol && min_eigenvalue(rho) >= -tol && tr >= -tol &&
         tr <= 1.0 + tol && std::abs(rho.matrix.trace().imag()) <= tol;
}

/// |m (+) n> amplitude = a(m) b(n). The output keeps a's modes first. The
/// photon bound defaults to the sum of both bounds; a smaller bound is allowed
/// only if no nonzero amplitude is dropped.
inline PureState tensor(const PureState& a, const PureState& b,
                        std::optional<int> max_total_photons = std::nullopt) {
  const int bound = max_total_photons.value_or(a.basis->max_total_photons() +
                                               b.basis->max_total_photons());
  auto out_basis = enumerate_basis(a.basis->mode_count() + b.basis->mode_count(), bound);
  PureState out = PureState::zero(out_basis);
  Occupation joined(out_basis->mode_count());
  for (std::size_t i = 0; i < a.basis->dimension(); ++i) {
    const cplx ai = a.amplitudes[static_cast<Eigen::Index>(i)];
    const auto& oa = a.basis->occupation(i);
    for (std::size_t j = 0; j < b.basis->dimension(); ++j) {
      const cplx v = ai * b.amplitudes[static_cast<Eigen::Index>(j)];
      const auto& ob = b.basis->occupation(j);
      std::copy(oa.begin(), oa.end(), joined.begin());
      std::copy(ob.begin(), ob.end(), joined.begin() + static_cast<std::ptrdiff_t>(oa.size()));
      auto idx = out_basis->index_of(joined);
      if (!idx) {
        if (v != cplx{0.0}) throw TruncationError("tensor: nonzero amplitude beyond photon bound");
        continue;
      }
      out.amplitudes[static_cast<Eigen::Index>(*idx)] = v;
    }
  }
  return out;
}

namespace detail {

inline void validate_modes(const FockBasis& basis, std::span<const std::size_t> modes,
                           const char* where) {
  std::vector<std::size_t> sorted(modes.begin(), modes.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument(std::string(where) + ": repeated mode index");
  for (auto m : sorted)
    if (m >= basis.mode_count())
      throw std::invalid_argument(std::string(where) + ": mode index " + std::to_string(m) +
                                  " out of range");
}

}  // namespace detail

/// Traces out `traced_modes`. The remaining modes keep their relative order.
inline DensityOperator partial_trace(const DensityOperator& rho,
                                     std::span<const std::size_t> traced_modes) {
  const auto& basis = *rho.basis;
  detail::validate_modes(basis, traced_modes, "partial_trace");
  if (traced_modes.size() >= basis.mode_count())
    throw std::invalid_argument("partial_trace: traced modes must be a proper subset");
  if (traced_modes.empty()) return rho;

  std::vector<bool> traced(basis.mode_count(), false);
  for (auto m : traced_modes) traced[m] = true;
  auto out_basis =
      enumerate_basis(basis.mode_count() - traced_modes.size(), basis.max_total_photons());

  // Group full-basis indices by the occupation of the traced modes; only pairs
  // inside one group contribute.
  std::map<Occupation, std::vector<std::pair<std::size_t, std::size_t>>> groups;
  Occupation kept, env;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    kept.clear();
    env.clear();
    const auto& occ = basis.occupation(i);
    for (std::size_t m = 0; m < occ.size(); ++m) (traced[m] ? env : kept).push_back(occ[m]);
    groups[env].emplace_back(i, out_basis->index_or_throw(kept));
  }

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(out_basis->dimension()),
                                                static_cast<Eigen::Index>(out_basis->dimension()));
  for (const auto& [key, members] : groups) {
    for (const auto& [fi, ri] : members)
      for (const auto& [fj, rj] : members)
        out(static_cast<Eigen::Index>(ri), static_cast<Eigen::Index>(rj)) +=
            rho.matrix(static_cast<Eigen::Index>(fi), static_cast<Eigen::Index>(fj));
  }
  return {out_basis, std::move(out)};
}

inline DensityOperator partial_trace(const DensityOperator& rho,
                                     std::initializer_list<std::size_t> traced_modes) {
  return partial_trace(rho, std::span<const std::size_t>(traced_modes.begin(), traced_modes.size()));
}

struct Projection {
  DensityOperator state;  // unnormalized P rho P
  double probability;
};

/// P rho P with P = |n><n| on `mode`. The mode stays in the basis (it now
/// holds a definite photon number and can be traced out without loss).
inline Projection project_number(const DensityOperator& rho, std::size_t mode, int n) {
  const auto& basis = *rho.basis;
  if (mode >= basis.mode_count()) throw std::invalid_argument("project_number: invalid mode");
  if (n < 0 || n > basis.max_total_photons())
    throw std::invalid_argument("project_number: photon count outside basis bound");
  Eigen::VectorXd keep(static_cast<Eigen::Index>(basis.dimension()));
  for (std::size_t i = 0; i < basis.dimension(); ++i)
    keep[static_cast<Eigen::Index>(i)] = basis.occupation(i)[mode] == n ? 1.0 : 0.0;
  Eigen::MatrixXcd out = keep.asDiagonal() * rho.matrix * keep.asDiagonal();
  const double p = out.trace().real();
  return {{rho.basis, std::move(out)}, p};
}

/// <psi|rho|psi>; both arguments must be normalized.
inline double fidelity(const DensityOperator& rho, const PureState& psi) {
  require_same_basis(*rho.basis, *psi.basis, "fidelity");
  if (std::abs(rho.trace() - 1.0) > 1e-9) throw std::invalid_argument("fidelity: rho not normalized");
  if (std::abs(psi.norm2() - 1.0) > 1e-9) throw std::invalid_argument("fidelity: psi not normalized");
  double f = psi.amplitudes.dot(rho.matrix * psi.amplitudes).real();
  constexpr double slack = 1e-12;
  if (f < 0.0 && f > -slack) f = 0.0;
  if (f > 1.0 && f < 1.0 + slack) f = 1.0;
  return f;
}

inline constexpr double kNearZeroTrace = 1e-12;

inline DensityOperator normalize(const DensityOperator& rho, double threshold = kNearZeroTrace) {
  const double tr = rho.trace();
  if (!(tr > threshold))
    throw NearZeroTraceError("normalize: trace " + std::to_string(tr) + " below threshold", tr);
  return {rho.basis, rho.matrix / tr};
}

/// Relabels modes without any physical action: new mode i is old mode order[i].
inline Eigen::VectorXi mode_relabel_map(const FockBasis& from, const FockBasis& to,
                                        std::span<const std::size_t> order) {
  Eigen::VectorXi map(static_cast<Eigen::Index>(from.dimension()));
  Occupation occ(order.size());
  for (std::size_t i = 0; i < from.dimension(); ++i) {
    const auto& src = from.occupation(i);
    for (std::size_t k = 0; k < order.size(); ++k) occ[k] = src[order[k]];
    map[static_cast<Eigen::Index>(i)] = static_cast<int>(to.index_or_throw(occ));
  }
  return map;
}

inline DensityOperator permute_modes(const DensityOperator& rho, std::span<const std::size_t> order) {
  if (order.size() != rho.basis->mode_count())
    throw std::invalid_argument("permute_modes: order must name every mode once");
  detail::validate_modes(*rho.basis, order, "permute_modes");
  auto out_basis = enumerate_basis(order.size(), rho.basis->max_total_photons());
  const auto map = mode_relabel_map(*rho.basis, *out_basis, order);
  Eigen::MatrixXcd out(rho.matrix.rows(), rho.matrix.cols());
  for (Eigen::Index i = 0; i < rho.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.matrix.cols(); ++j) out(map[i], map[j]) = rho.matrix(i, j);
  return {out_basis, std::move(out)};
}

inline PureState permute_modes(const PureState& psi, std::span<const std::size_t> order) {
  if (order.size() != psi.basis->mode_count())
    throw std::invalid_argument("permute_modes: order must name every mode once");
  detail::validate_modes(*psi.basis, order, "permute_modes");
  auto out_basis = enumerate_basis(order.size(), psi.basis->max_total_photons());
  const auto map = mode_relabel_map(*psi.basis, *out_basis, order);
  Eigen::VectorXcd out(psi.amplitudes.size());
  for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i) out[map[i]] = psi.amplitudes[i];
  return {out_basis, std::move(out)};
}

/// Re-expresses a state on a basis with the same modes and a larger photon bound.
inline PureState widen(const PureState& psi, int max_total_photons) {
  auto out_basis = enumerate_basis(psi.basis->mode_count(), max_total_photons);
  auto out = PureState::zero(out_basis);
  for (std::size_t i = 0; i < psi.basis->dimension(); ++i) {
    const cplx v = psi.amplitudes[static_cast<Eigen::Index>(i)];
    auto idx = out_basis->index_of(psi.basis->occupation(i));
    if (!idx) {
      if (v != cplx{0.0}) throw TruncationError("widen: amplitude beyond new photon bound");
      continue;
    }
    out.amplitudes[static_cast<Eigen::Index>(*idx)] = v;
  }
  return out;
}

}  // namespace loqc
