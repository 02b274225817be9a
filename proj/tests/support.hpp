#pragma once

#include <random>

#include "loqc/fock.hpp"

namespace loqc::test {

inline PureState random_pure(BasisPtr basis, std::mt19937& rng) {
  std::normal_distribution<double> g;
  auto s = PureState::zero(std::move(basis));
  for (Eigen::Index i = 0; i < s.amplitudes.size(); ++i) s.amplitudes[i] = {g(rng), g(rng)};
  s.amplitudes.normalize();
  return s;
}

/// Mixture of three random pure states with random weights.
inline DensityOperator random_density(BasisPtr basis, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  auto rho = DensityOperator::zero(basis);
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double w = u(rng);
    rho.matrix += w * DensityOperator::from_pure(random_pure(basis, rng)).matrix;
    total += w;
  }
  rho.matrix /= total;
  return rho;
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace loqc::test
