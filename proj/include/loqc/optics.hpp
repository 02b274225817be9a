#pragma once

// Linear-optical circuit elements acting on Fock-space states.
//
// Mode matrices use the layout rows = output modes, columns = input modes,
// so a single photon entering mode j leaves in mode i with amplitude M(i, j).
// A beamsplitter of reflectivity eta keeps a reflected photon in its own mode
// with amplitude sqrt(eta) and moves a transmitted photon to the partner mode
// with amplitude sqrt(1 - eta). This matches the loss model, where the
// reflected port stays in the system.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "loqc/fock.hpp"

namespace loqc {

enum class SignConvention {
  OnReflection,    // minus sign on reflection off the marked side
  OnTransmission,  // minus sign on transmission for light entering the marked side
};

/// AB: the second mode of the pair faces the marked side. BA: the first does.
enum class Orientation { AB, BA };

struct BeamsplitterSpec {
  double eta = 0.5;
  SignConvention convention = SignConvention::OnReflection;
  Orientation orientation = Orientation::AB;
  std::size_t first = 0;
  std::size_t second = 1;
};

struct LossChannel {
  double efficiency = 1.0;
  std::size_t mode = 0;
};

/// Routes input mode i to output mode target[i].
struct ModePermutation {
  std::vector<std::size_t> target;
};

using CircuitElement = std::variant<BeamsplitterSpec, LossChannel, ModePermutation>;

inline void check_reflectivity(double eta, const char* where) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument(std::string(where) + ": reflectivity " + std::to_string(eta) +
                                " outside [0, 1]");
}

inline Eigen::Matrix2cd bs_mode_matrix(const BeamsplitterSpec& spec) {
  check_reflectivity(spec.eta, "bs_mode_matrix");
  const double r = std::sqrt(spec.eta);
  const double t = std::sqrt(1.0 - spec.eta);
  // Written for the marked side on the second mode (AB); BA mirrors it.
  Eigen::Matrix2d m;
  if (spec.convention == SignConvention::OnReflection) {
    m << r, t, t, -r;
  } else {
    m << r, -t, t, r;
  }
  if (spec.orientation == Orientation::BA) {
    Eigen::Matrix2d swapped;
    swapped << m(1, 1), m(1, 0), m(0, 1), m(0, 0);
    m = swapped;
  }
  return m.cast<cplx>();
}

namespace detail {

struct ElementMatrixVisitor {
  std::size_t mode_count;

  Eigen::MatrixXcd operator()(const BeamsplitterSpec& bs) const {
    if (bs.first >= mode_count || bs.second >= mode_count || bs.first == bs.second)
      throw std::invalid_argument("beamsplitter: invalid mode pair");
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(mode_count),
                                                    static_cast<Eigen::Index>(mode_count));
    const auto m = bs_mode_matrix(bs);
    const auto a = static_cast<Eigen::Index>(bs.first);
    const auto b = static_cast<Eigen::Index>(bs.second);
    u(a, a) = m(0, 0);
    u(a, b) = m(0, 1);
    u(b, a) = m(1, 0);
    u(b, b) = m(1, 1);
    return u;
  }

  Eigen::MatrixXcd operator()(const ModePermutation& p) const {
    if (p.target.size() != mode_count)
      throw std::invalid_argument("mode permutation: wrong length");
    std::vector<bool> seen(mode_count, false);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(mode_count),
                                                static_cast<Eigen::Index>(mode_count));
    for (std::size_t i = 0; i < mode_count; ++i) {
      if (p.target[i] >= mode_count || seen[p.target[i]])
        throw std::invalid_argument("mode permutation: not a permutation");
      seen[p.target[i]] = true;
      u(static_cast<Eigen::Index>(p.target[i]), static_cast<Eigen::Index>(i)) = 1.0;
    }
    return u;
  }

  Eigen::MatrixXcd operator()(const LossChannel&) const {
    throw std::logic_error("loss channel has no mode matrix");
  }
};

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// sqrt(prod_i n_i!)
inline double sqrt_factorial_product(const Occupation& occ) {
  double s = 0.0;
  for (int n : occ) s += log_factorial(n);
  return std::exp(0.5 * s);
}

inline std::vector<int> repeated_modes(const Occupation& occ) {
  std::vector<int> out;
  for (std::size_t m = 0; m < occ.size(); ++m)
    for (int k = 0; k < occ[m]; ++k) out.push_back(static_cast<int>(m));
  return out;
}

}  // namespace detail

/// Full M x M mode matrix of a unitary element embedded in `mode_count` modes.
inline Eigen::MatrixXcd element_mode_matrix(const CircuitElement& e, std::size_t mode_count) {
  return std::visit(detail::ElementMatrixVisitor{mode_count}, e);
}

inline bool is_unitary(const Eigen::MatrixXcd& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const auto n = u.rows();
  return ((u.adjoint() * u) - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <= tol;
}

/// Ryser's formula. The empty matrix has permanent 1.
inline cplx permanent(const Eigen::MatrixXcd& a) {
  const auto n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("permanent: matrix must be square");
  if (n == 0) return 1.0;
  if (n > 30) throw std::invalid_argument("permanent: matrix too large");
  cplx total = 0.0;
  const unsigned long long subsets = 1ULL << n;
  Eigen::VectorXcd row_sums(n);
  for (unsigned long long s = 1; s < subsets; ++s) {
    row_sums.setZero();
    int bits = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (s & (1ULL << j)) {
        row_sums += a.col(j);
        ++bits;
      }
    }
    const cplx prod = row_sums.prod();
    total += ((n - bits) % 2 == 0) ? prod : -prod;
  }
  return total;
}

/// Lifts an M-mode transformation to the Fock space of `basis`:
///   <m|U|n> = per(A(m, n)) / sqrt(prod m_i! prod n_j!)
/// where A(m, n) repeats row i of the mode matrix m_i times and column j n_j
/// times. The result is block diagonal in the total photon number.
inline Eigen::MatrixXcd lift_unitary(const Eigen::MatrixXcd& mode_matrix, const FockBasis& basis) {
  if (static_cast<std::size_t>(mode_matrix.rows()) != basis.mode_count())
    throw std::invalid_argument("lift_unitary: mode matrix size != basis mode count");
  if (!is_unitary(mode_matrix, 1e-10)) throw std::invalid_argument("lift_unitary: not unitary");

  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);

  std::vector<std::vector<std::size_t>> sectors(static_cast<std::size_t>(basis.max_total_photons()) + 1);
  std::vector<std::vector<int>> rows(basis.dimension());
  std::vector<double> norms(basis.dimension());
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const auto& occ = basis.occupation(i);
    sectors[static_cast<std::size_t>(total_photons(occ))].push_back(i);
    rows[i] = detail::repeated_modes(occ);
    norms[i] = detail::sqrt_factorial_product(occ);
  }

  for (const auto& sector : sectors) {
    for (std::size_t in : sector) {
      const auto& cols = rows[in];
      const auto n = static_cast<Eigen::Index>(cols.size());
      Eigen::MatrixXcd sub(n, n);
      for (std::size_t outi : sector) {
        const auto& r = rows[outi];
        for (Eigen::Index p = 0; p < n; ++p)
          for (Eigen::Index q = 0; q < n; ++q) sub(p, q) = mode_matrix(r[static_cast<std::size_t>(p)], cols[static_cast<std::size_t>(q)]);
        out(static_cast<Eigen::Index>(outi), static_cast<Eigen::Index>(in)) =
            permanent(sub) / (norms[outi] * norms[in]);
      }
    }
  }
  return out;
}

/// Applies a mode transformation to a pure state by expanding each input Fock
/// state as a polynomial in creation operators,
///   prod_j (a_j^dag)^{n_j} / sqrt(n_j!)  ->  prod_j (sum_i M_ij a_i^dag)^{n_j} / sqrt(n_j!),
/// and reading amplitudes back off the monomials.
inline PureState transform_pure(const PureState& psi, const Eigen::MatrixXcd& mode_matrix) {
  const auto& basis = *psi.basis;
  const auto modes = basis.mode_count();
  if (static_cast<std::size_t>(mode_matrix.rows()) != modes || mode_matrix.cols() != mode_matrix.rows())
    throw std::invalid_argument("transform_pure: mode matrix size != basis mode count");

  auto out = PureState::zero(psi.basis);
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const cplx amp = psi.amplitudes[static_cast<Eigen::Index>(i)];
    if (amp == cplx{0.0}) continue;
    const auto& occ = basis.occupation(i);
    std::map<Occupation, cplx> poly{{Occupation(modes, 0), amp / detail::sqrt_factorial_product(occ)}};
    for (std::size_t j = 0; j < modes; ++j) {
      for (int k = 0; k < occ[j]; ++k) {
        std::map<Occupation, cplx> next;
        for (const auto& [mono, c] : poly) {
          for (std::size_t r = 0; r < modes; ++r) {
            const cplx w = mode_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
            if (w == cplx{0.0}) continue;
            Occupation m = mono;
            ++m[r];
            next[m] += c * w;
          }
        }
        poly = std::move(next);
      }
    }
    for (const auto& [mono, c] : poly)
      out.amplitudes[static_cast<Eigen::Index>(basis.index_or_throw(mono))] +=
          c * detail::sqrt_factorial_product(mono);
  }
  return out;
}

/// Single-mode photon-loss Kraus operators on {|0>, ..., |max_n>}:
///   K_k |n> = sqrt(C(n, k) eta^(n-k) (1-eta)^k) |n-k>.
/// Operators that vanish identically (e.g. k >= 1 at eta = 1) are omitted.
inline std::vector<Eigen::MatrixXd> loss_kraus(double eta, int max_n) {
  check_reflectivity(eta, "loss_kraus");
  if (max_n < 0) throw std::invalid_argument("loss_kraus: max_n must be >= 0");
  std::vector<Eigen::MatrixXd> ops;
  const auto dim = static_cast<Eigen::Index>(max_n + 1);
  for (int k = 0; k <= max_n; ++k) {
    Eigen::MatrixXd kop = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = k; n <= max_n; ++n) {
      const double binom = std::exp(detail::log_factorial(n) - detail::log_factorial(k) -
                                    detail::log_factorial(n - k));
      kop(n - k, n) = std::sqrt(binom * std::pow(eta, n - k) * std::pow(1.0 - eta, k));
    }
    if (kop.cwiseAbs().maxCoeff() > 0.0) ops.push_back(std::move(kop));
  }
  return ops;
}

enum class LossMethod { Kraus, AncillaTrace };

namespace detail {

// Embeds a single-mode operator acting on `mode` into the full basis.
inline Eigen::SparseMatrix<cplx> embed_single_mode(const Eigen::MatrixXd& op, const FockBasis& basis,
                                                   std::size_t mode) {
  std::vector<Eigen::Triplet<cplx>> trips;
  Occupation occ;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    occ = basis.occupation(i);
    const int n = occ[mode];
    for (Eigen::Index np = 0; np < op.rows(); ++np) {
      const double v = op(np, n);
      if (v == 0.0) continue;
      occ[mode] = static_cast<int>(np);
      if (auto j = basis.index_of(occ))
        trips.emplace_back(static_cast<Eigen::Index>(*j), static_cast<Eigen::Index>(i), v);
      else
        throw TruncationError("single-mode operator leaves the truncated basis");
    }
  }
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  Eigen::SparseMatrix<cplx> sp(dim, dim);
  sp.setFromTriplets(trips.begin(), trips.end());
  return sp;
}

// rho (x) |0><0| on one extra, last mode.
inline DensityOperator append_vacuum_mode(const DensityOperator& rho) {
  const auto& basis = *rho.basis;
  auto ext = enumerate_basis(basis.mode_count() + 1, basis.max_total_photons());
  std::vector<Eigen::Index> map(basis.dimension());
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    Occupation occ = basis.occupation(i);
    occ.push_back(0);
    map[i] = static_cast<Eigen::Index>(ext->index_or_throw(occ));
  }
  auto out = DensityOperator::zero(ext);
  for (std::size_t i = 0; i < map.size(); ++i)
    for (std::size_t j = 0; j < map.size(); ++j)
      out.matrix(map[i], map[j]) = rho.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

}  // namespace detail

/// Photon loss on one mode: a beamsplitter of reflectivity `eta` whose
/// transmitted port is discarded.
inline DensityOperator apply_loss(const DensityOperator& rho, std::size_t mode, double eta,
                                  LossMethod method = LossMethod::Kraus,
                                  SignConvention convention = SignConvention::OnReflection) {
  check_reflectivity(eta, "apply_loss");
  const auto& basis = *rho.basis;
  if (mode >= basis.mode_count()) throw std::invalid_argument("apply_loss: invalid mode");
  if (eta == 1.0) return rho;

  if (method == LossMethod::Kraus) {
    auto out = DensityOperator::zero(rho.basis);
    for (const auto& k : loss_kraus(eta, basis.max_total_photons())) {
      const Eigen::SparseMatrix<cplx> sp = detail::embed_single_mode(k, basis, mode);
      const Eigen::SparseMatrix<cplx> spt = sp.adjoint();
      const Eigen::MatrixXcd left = sp * rho.matrix;
      out.matrix += left * spt;
    }
    return out;
  }

  auto ext = detail::append_vacuum_mode(rho);
  const std::size_t env = basis.mode_count();
  BeamsplitterSpec bs{eta, convention, Orientation::AB, mode, env};
  const Eigen::MatrixXcd u = lift_unitary(element_mode_matrix(bs, env + 1), *ext.basis);
  ext.matrix = u * ext.matrix * u.adjoint();
  const std::size_t traced[] = {env};
  return partial_trace(ext, traced);
}

/// Applies elements in list order. Runs of unitary elements are multiplied
/// at the mode level and lifted once.
inline DensityOperator apply_elements(const DensityOperator& rho,
                                      std::span<const CircuitElement> elements,
                                      LossMethod method = LossMethod::Kraus) {
  const auto modes = rho.basis->mode_count();
  DensityOperator cur = rho;
  Eigen::MatrixXcd pending = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(modes),
                                                        static_cast<Eigen::Index>(modes));
  bool have_pending = false;
  auto flush = [&] {
    if (!have_pending) return;
    const Eigen::MatrixXcd u = lift_unitary(pending, *cur.basis);
    cur.matrix = u * cur.matrix * u.adjoint();
    pending.setIdentity();
    have_pending = false;
  };
  for (const auto& e : elements) {
    if (const auto* loss = std::get_if<LossChannel>(&e)) {
      flush();
      cur = apply_loss(cur, loss->mode, loss->efficiency, method);
    } else {
      pending = element_mode_matrix(e, modes) * pending;
      have_pending = true;
    }
  }
  flush();
  return cur;
}

/// Product of all unitary elements (later elements on the left). Throws if
/// the list contains a loss channel.
inline Eigen::MatrixXcd circuit_mode_matrix(std::span<const CircuitElement> elements,
                                            std::size_t mode_count) {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(mode_count),
                                                  static_cast<Eigen::Index>(mode_count));
  for (const auto& e : elements) {
    if (std::holds_alternative<LossChannel>(e))
      throw std::invalid_argument("circuit_mode_matrix: circuit contains a loss channel");
    u = element_mode_matrix(e, mode_count) * u;
  }
  return u;
}

inline std::string describe(SignConvention c) {
  return c == SignConvention::OnReflection ? "sign-on-reflection" : "sign-on-transmission";
}

inline std::string describe(Orientation o) { return o == Orientation::AB ? "AB" : "BA"; }

}  // namespace loqc
