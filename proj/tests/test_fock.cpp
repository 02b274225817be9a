#include <catch_amalgamated.hpp>

#include <algorithm>

#include "loqc/fock.hpp"
#include "support.hpp"

using namespace loqc;
using Catch::Approx;

namespace {

// Every vector in [0, n]^modes with total <= n, sorted lexicographically.
std::vector<Occupation> brute_force_basis(std::size_t modes, int n) {
  std::vector<Occupation> all;
  Occupation occ(modes, 0);
  while (true) {
    if (total_photons(occ) <= n) all.push_back(occ);
    std::size_t m = modes;
    while (m > 0 && occ[m - 1] == n) occ[--m] = 0;
    if (m == 0) break;
    ++occ[m - 1];
  }
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

TEST_CASE("basis enumeration matches brute force in order and size") {
  for (auto [modes, n] : std::vector<std::pair<std::size_t, int>>{{1, 2}, {2, 0}, {3, 2}, {4, 3}, {6, 4}}) {
    const auto b = enumerate_basis(modes, n);
    const auto expected = brute_force_basis(modes, n);
    REQUIRE(b->states() == expected);
    REQUIRE(fock_dimension(modes, n) == expected.size());
  }
  CHECK(enumerate_basis(1, 2)->states() == std::vector<Occupation>{{0}, {1}, {2}});
  CHECK(enumerate_basis(2, 0)->dimension() == 1);
  CHECK(enumerate_basis(6, 4)->dimension() == 210);
}

TEST_CASE("index lookup round-trips and rejects states outside the truncation") {
  const auto b = enumerate_basis(4, 3);
  for (std::size_t i = 0; i < b->dimension(); ++i) CHECK(b->index_or_throw(b->occupation(i)) == i);
  CHECK_FALSE(b->index_of({2, 2, 0, 0}).has_value());
  CHECK_THROWS_AS(b->index_or_throw({2, 2, 0, 0}), TruncationError);
}

TEST_CASE("dimension cap raises before allocating") {
  CHECK_THROWS_AS(enumerate_basis(30, 30, 1000), DimensionOverflowError);
  CHECK_NOTHROW(enumerate_basis(6, 4, 210));
  CHECK_THROWS_AS(enumerate_basis(6, 4, 209), DimensionOverflowError);
}

TEST_CASE("tensor product places the first factor's modes first") {
  const auto b1 = enumerate_basis(1, 1);
  const auto s1 = PureState::basis_state(b1, {1});
  const auto s0 = PureState::basis_state(b1, {0});
  const auto t = tensor(s1, s0);
  CHECK(t.basis->mode_count() == 2);
  CHECK(std::abs(t.amplitude({1, 0}) - 1.0) < 1e-15);
  CHECK(t.norm2() == Approx(1.0));

  std::mt19937 rng(7);
  const auto a = test::random_pure(enumerate_basis(2, 2), rng);
  const auto c = test::random_pure(enumerate_basis(1, 2), rng);
  const auto ac = tensor(a, c);
  CHECK(ac.norm2() == Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ac.amplitude({1, 0, 2}) - a.amplitude({1, 0}) * c.amplitude({2})) < 1e-14);
  CHECK_THROWS_AS(tensor(a, c, 3), TruncationError);
}

TEST_CASE("partial trace of a split single photon gives the reflected-port populations") {
  const auto b = enumerate_basis(2, 1);
  auto psi = PureState::zero(b);
  psi.amplitudes[static_cast<Eigen::Index>(b->index_or_throw({1, 0}))] = std::sqrt(0.6);
  psi.amplitudes[static_cast<Eigen::Index>(b->index_or_throw({0, 1}))] = -std::sqrt(0.4);
  const auto red = partial_trace(DensityOperator::from_pure(psi), {1});
  REQUIRE(red.basis->mode_count() == 1);
  const auto i0 = static_cast<Eigen::Index>(red.basis->index_or_throw({0}));
  const auto i1 = static_cast<Eigen::Index>(red.basis->index_or_throw({1}));
  CHECK(red.matrix(i1, i1).real() == Approx(0.6));
  CHECK(red.matrix(i0, i0).real() == Approx(0.4));
  CHECK(std::abs(red.matrix(i0, i1)) < 1e-15);
}

TEST_CASE("partial trace of a product state returns the kept factor") {
  std::mt19937 rng(11);
  const auto a = test::random_pure(enumerate_basis(2, 2), rng);
  const auto c = test::random_pure(enumerate_basis(1, 2), rng);
  const auto red = partial_trace(DensityOperator::from_pure(tensor(a, c)), {2});
  // The kept register has the joint photon bound; compare amplitudes by occupation.
  const auto expected = DensityOperator::from_pure(widen(a, red.basis->max_total_photons()));
  CHECK(test::max_abs(red.matrix - expected.matrix) < 1e-12);
}

TEST_CASE("partial trace preserves trace, Hermiticity and positivity") {
  std::mt19937 rng(3);
  const auto rho = test::random_density(enumerate_basis(3, 3), rng);
  for (std::size_t m = 0; m < 3; ++m) {
    const std::vector<std::size_t> traced{m};
    const auto red = partial_trace(rho, traced);
    CHECK(red.trace() == Approx(rho.trace()).epsilon(1e-12));
    CHECK(hermiticity_error(red) < 1e-12);
    CHECK(min_eigenvalue(red) > -1e-12);
  }
  CHECK_THROWS(partial_trace(rho, {0, 0}));
  CHECK_THROWS(partial_trace(rho, {5}));
}

TEST_CASE("number projections are complete and match explicit populations") {
  std::mt19937 rng(5);
  const auto rho = test::random_density(enumerate_basis(3, 2), rng);
  double total = 0.0;
  for (int n = 0; n <= 2; ++n) {
    const auto p = project_number(rho, 1, n);
    double expect = 0.0;
    for (std::size_t i = 0; i < rho.basis->dimension(); ++i)
      if (rho.basis->occupation(i)[1] == n) expect += rho.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    CHECK(p.probability == Approx(expect).epsilon(1e-12));
    total += p.probability;
  }
  CHECK(total == Approx(1.0).epsilon(1e-12));

  const auto b = enumerate_basis(2, 1);
  const auto r10 = DensityOperator::from_pure(PureState::basis_state(b, {1, 0}));
  CHECK(project_number(r10, 0, 1).probability == Approx(1.0));
  CHECK(project_number(r10, 0, 0).probability == 0.0);
}

TEST_CASE("fidelity with pure targets") {
  const auto b = enumerate_basis(1, 1);
  const auto zero = PureState::basis_state(b, {0});
  const auto one = PureState::basis_state(b, {1});
  CHECK(fidelity(DensityOperator::from_pure(zero), zero) == Approx(1.0));
  CHECK(fidelity(DensityOperator::from_pure(zero), one) == Approx(0.0));
  auto plus = PureState::zero(b);
  plus.amplitudes << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(fidelity(DensityOperator::from_pure(zero), plus) == Approx(0.5));

  std::mt19937 rng(9);
  const auto bb = enumerate_basis(2, 2);
  const auto r1 = test::random_density(bb, rng), r2 = test::random_density(bb, rng);
  const auto psi = test::random_pure(bb, rng);
  DensityOperator mix{bb, 0.3 * r1.matrix + 0.7 * r2.matrix};
  CHECK(fidelity(mix, psi) == Approx(0.3 * fidelity(r1, psi) + 0.7 * fidelity(r2, psi)).epsilon(1e-12));
  CHECK_THROWS_AS(fidelity(r1, PureState::basis_state(enumerate_basis(2, 1), {0, 0})), BasisMismatchError);
}

TEST_CASE("normalize rescales to unit trace and refuses vanishing traces") {
  const auto b = enumerate_basis(1, 1);
  DensityOperator rho{b, Eigen::MatrixXcd::Zero(2, 2)};
  rho.matrix(0, 0) = 0.2;
  rho.matrix(1, 1) = 0.3;
  const auto n = normalize(rho);
  CHECK(n.matrix(0, 0).real() == Approx(0.4));
  CHECK(n.matrix(1, 1).real() == Approx(0.6));

  DensityOperator tiny{b, Eigen::MatrixXcd::Zero(2, 2)};
  tiny.matrix(0, 0) = 1e-15;
  CHECK_THROWS_AS(normalize(tiny), NearZeroTraceError);
  CHECK_THROWS_AS(normalize(DensityOperator::zero(b)), NearZeroTraceError);
}

TEST_CASE("mode permutation is a relabeling") {
  std::mt19937 rng(13);
  const auto psi = test::random_pure(enumerate_basis(3, 2), rng);
  const std::vector<std::size_t> order{2, 0, 1};
  const auto p = permute_modes(psi, order);
  const auto& occ = psi.basis->occupation(4);
  CHECK(std::abs(p.amplitude({occ[2], occ[0], occ[1]}) - psi.amplitude(occ)) < 1e-15);

  const std::vector<std::size_t> inverse{1, 2, 0};
  CHECK(test::max_abs(permute_modes(p, inverse).amplitudes - psi.amplitudes) < 1e-15);
  const auto rho = DensityOperator::from_pure(psi);
  CHECK(test::max_abs(permute_modes(rho, order).matrix - DensityOperator::from_pure(p).matrix) < 1e-15);
}
