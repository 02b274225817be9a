#include <catch_amalgamated.hpp>

#include <numeric>

#include <Eigen/QR>

#include "loqc/optics.hpp"
#include "support.hpp"

using namespace loqc;
using Catch::Approx;

namespace {

Eigen::MatrixXcd random_unitary(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
}

cplx permanent_by_permutations(const Eigen::MatrixXcd& a) {
  std::vector<int> p(static_cast<std::size_t>(a.rows()));
  std::iota(p.begin(), p.end(), 0);
  cplx total = 0.0;
  do {
    cplx prod = 1.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) prod *= a(i, p[static_cast<std::size_t>(i)]);
    total += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

cplx element(const Eigen::MatrixXcd& u, const FockBasis& b, const Occupation& out, const Occupation& in) {
  return u(static_cast<Eigen::Index>(b.index_or_throw(out)), static_cast<Eigen::Index>(b.index_or_throw(in)));
}

const std::array kConventions{SignConvention::OnReflection, SignConvention::OnTransmission};
const std::array kOrientations{Orientation::AB, Orientation::BA};

}  // namespace

TEST_CASE("balanced beamsplitter has the Hadamard-like form") {
  const auto m = bs_mode_matrix({0.5, SignConvention::OnReflection, Orientation::AB, 0, 1});
  Eigen::Matrix2cd h;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  CHECK(test::max_abs(m - h) < 1e-15);
}

TEST_CASE("beamsplitter matrices are unitary with reflectivity on the diagonal") {
  for (double eta : {0.0, 0.1, 1.0 / 3.0, 0.5, 0.8, 1.0})
    for (auto c : kConventions)
      for (auto o : kOrientations) {
        const auto m = bs_mode_matrix({eta, c, o, 0, 1});
        CHECK(is_unitary(m, 1e-14));
        CHECK(std::abs(m(0, 0)) == Approx(std::sqrt(eta)));
        CHECK(std::abs(m(1, 1)) == Approx(std::sqrt(eta)));
        CHECK(std::abs(m(0, 1)) == Approx(std::sqrt(1.0 - eta)));
      }
}

TEST_CASE("the minus sign sits where the convention and orientation put it") {
  const double eta = 0.3;
  // AB marks the second mode, BA the first.
  auto sor_ab = bs_mode_matrix({eta, SignConvention::OnReflection, Orientation::AB, 0, 1});
  auto sor_ba = bs_mode_matrix({eta, SignConvention::OnReflection, Orientation::BA, 0, 1});
  auto str_ab = bs_mode_matrix({eta, SignConvention::OnTransmission, Orientation::AB, 0, 1});
  auto str_ba = bs_mode_matrix({eta, SignConvention::OnTransmission, Orientation::BA, 0, 1});
  CHECK(sor_ab(1, 1).real() < 0.0);
  CHECK(sor_ab(0, 0).real() > 0.0);
  CHECK(sor_ba(0, 0).real() < 0.0);
  CHECK(sor_ba(1, 1).real() > 0.0);
  CHECK(str_ab(0, 1).real() < 0.0);  // light entering mode 1 transmits to mode 0
  CHECK(str_ab(1, 0).real() > 0.0);
  CHECK(str_ba(1, 0).real() < 0.0);
  CHECK(str_ba(0, 1).real() > 0.0);
}

TEST_CASE("limit reflectivities") {
  // eta = 1 reflects every photon back into its own mode; eta = 0 swaps the modes.
  const auto full = bs_mode_matrix({1.0, SignConvention::OnReflection, Orientation::AB, 0, 1});
  CHECK(full.real().isApprox(Eigen::Matrix2d{{1, 0}, {0, -1}}));
  const auto none = bs_mode_matrix({0.0, SignConvention::OnReflection, Orientation::AB, 0, 1});
  CHECK(none.real().isApprox(Eigen::Matrix2d{{0, 1}, {1, 0}}));
  CHECK_THROWS_AS(bs_mode_matrix({1.2, SignConvention::OnReflection, Orientation::AB, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(bs_mode_matrix({-0.1, SignConvention::OnReflection, Orientation::AB, 0, 1}), std::invalid_argument);
}

TEST_CASE("sign-on-reflection splitters are involutions") {
  const BeamsplitterSpec b{0.37, SignConvention::OnReflection, Orientation::BA, 0, 2};
  const std::vector<CircuitElement> twice{b, b};
  CHECK(circuit_mode_matrix(twice, 3).isIdentity(1e-14));
}

TEST_CASE("Ryser permanent agrees with the permutation sum") {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  for (int n = 1; n <= 5; ++n) {
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
    CHECK(std::abs(permanent(a) - permanent_by_permutations(a)) < 1e-10);
  }
  CHECK(permanent(Eigen::MatrixXcd(0, 0)) == cplx{1.0});
  CHECK(permanent(Eigen::MatrixXcd::Ones(3, 3)) == cplx{6.0});
}

TEST_CASE("Fock lift: vacuum, single-photon sector and two-photon interference") {
  std::mt19937 rng(2);
  const auto basis = enumerate_basis(3, 2);
  const auto u = random_unitary(3, rng);
  const auto lifted = lift_unitary(u, *basis);
  CHECK(element(lifted, *basis, {0, 0, 0}, {0, 0, 0}) == cplx{1.0});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      Occupation out(3, 0), in(3, 0);
      out[i] = in[j] = 1;
      CHECK(std::abs(element(lifted, *basis, out, in) - u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) < 1e-14);
    }
  CHECK(is_unitary(lifted, 1e-12));
  // No amplitude between different photon numbers.
  CHECK(element(lifted, *basis, {1, 0, 0}, {1, 1, 0}) == cplx{0.0});

  const auto b2 = enumerate_basis(2, 2);
  const auto bs = lift_unitary(bs_mode_matrix({0.5, SignConvention::OnReflection, Orientation::AB, 0, 1}), *b2);
  CHECK(std::abs(element(bs, *b2, {1, 1}, {1, 1})) < 1e-15);
  CHECK(std::abs(element(bs, *b2, {2, 0}, {1, 1})) == Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::abs(element(bs, *b2, {0, 2}, {1, 1})) == Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("Fock lift is a homomorphism") {
  std::mt19937 rng(4);
  const auto basis = enumerate_basis(3, 3);
  const auto a = random_unitary(3, rng), b = random_unitary(3, rng);
  CHECK(test::max_abs(lift_unitary(a * b, *basis) - lift_unitary(a, *basis) * lift_unitary(b, *basis)) < 1e-12);
}

TEST_CASE("creation-operator expansion agrees with the permanent lift") {
  std::mt19937 rng(6);
  const auto basis = enumerate_basis(4, 3);
  const auto u = random_unitary(4, rng);
  const auto psi = test::random_pure(basis, rng);
  const auto out = transform_pure(psi, u);
  CHECK(test::max_abs(out.amplitudes - lift_unitary(u, *basis) * psi.amplitudes) < 1e-12);
  CHECK(out.norm2() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loss Kraus operators: closed form and completeness") {
  for (double eta : {0.0, 0.25, 0.9, 1.0}) {
    const auto ks = loss_kraus(eta, 4);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(5, 5);
    for (const auto& k : ks) sum += k.transpose() * k;
    CHECK(sum.isIdentity(1e-13));
  }
  CHECK(loss_kraus(1.0, 3).size() == 1);
  CHECK(loss_kraus(1.0, 3).front().isIdentity());
  const auto ks = loss_kraus(0.6, 2);
  // K_1 |2> = sqrt(2 * 0.6 * 0.4) |1>
  CHECK(ks[1](1, 2) == Approx(std::sqrt(2 * 0.6 * 0.4)));
  CHECK(ks[2](0, 2) == Approx(0.4));  // sqrt((1 - eta)^2)
}

TEST_CASE("loss on a two-photon state and on coherences") {
  const auto b = enumerate_basis(1, 2);
  const double eta = 0.7;
  const auto rho = DensityOperator::from_pure(PureState::basis_state(b, {2}));
  const auto out = apply_loss(rho, 0, eta);
  CHECK(out.matrix(2, 2).real() == Approx(eta * eta));
  CHECK(out.matrix(1, 1).real() == Approx(2 * eta * (1 - eta)));
  CHECK(out.matrix(0, 0).real() == Approx((1 - eta) * (1 - eta)));

  auto plus = PureState::zero(b);
  plus.amplitudes << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  const auto lossy = apply_loss(DensityOperator::from_pure(plus), 0, eta);
  CHECK(std::abs(lossy.matrix(0, 1)) == Approx(0.5 * std::sqrt(eta)));
  CHECK(lossy.matrix(1, 1).real() == Approx(0.5 * eta));
}

TEST_CASE("Kraus loss matches the ancilla-splitter construction") {
  std::mt19937 rng(8);
  const auto rho = test::random_density(enumerate_basis(3, 3), rng);
  for (double eta : {0.0, 0.35, 0.92})
    for (std::size_t mode = 0; mode < 3; ++mode) {
      const auto k = apply_loss(rho, mode, eta, LossMethod::Kraus);
      const auto a = apply_loss(rho, mode, eta, LossMethod::AncillaTrace);
      CHECK(test::max_abs(k.matrix - a.matrix) < 1e-12);
      CHECK(k.trace() == Approx(1.0).epsilon(1e-12));
      CHECK(min_eigenvalue(k) > -1e-12);
    }
}

TEST_CASE("loss on different modes commutes and full efficiency is the identity") {
  std::mt19937 rng(10);
  const auto rho = test::random_density(enumerate_basis(3, 2), rng);
  const auto ab = apply_loss(apply_loss(rho, 0, 0.6), 2, 0.8);
  const auto ba = apply_loss(apply_loss(rho, 2, 0.8), 0, 0.6);
  CHECK(test::max_abs(ab.matrix - ba.matrix) < 1e-13);
  const std::vector<CircuitElement> none{LossChannel{1.0, 1}};
  CHECK(test::max_abs(apply_elements(rho, none).matrix - rho.matrix) == 0.0);
}

TEST_CASE("element lists: empty, inverse pairs and mixed loss") {
  std::mt19937 rng(12);
  const auto rho = test::random_density(enumerate_basis(3, 2), rng);
  CHECK(test::max_abs(apply_elements(rho, {}).matrix - rho.matrix) == 0.0);
  const BeamsplitterSpec b{0.2, SignConvention::OnTransmission, Orientation::AB, 1, 2};
  BeamsplitterSpec inv = b;
  inv.orientation = Orientation::BA;  // transposed, hence inverse, matrix
  const auto m = circuit_mode_matrix(std::vector<CircuitElement>{b, inv}, 3);
  CHECK(m.isIdentity(1e-14));
  const std::vector<CircuitElement> mixed{b, LossChannel{0.5, 0}, inv};
  CHECK(test::max_abs(apply_elements(rho, mixed).matrix - apply_loss(rho, 0, 0.5).matrix) < 1e-13);
  CHECK_THROWS(circuit_mode_matrix(mixed, 3));
}
