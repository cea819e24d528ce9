#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "qcompat/pooling.hpp"

using namespace qcompat;
using namespace qcompat::testing;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

void check_structure(const PoolingResult& r) {
  const Index d = r.a.dim();
  const Matrix sum = r.E00 + r.E01 + r.E10 + r.E11;
  CHECK((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-8);
  for (const Matrix* e : {&r.E00, &r.E01, &r.E10, &r.E11}) CHECK(min_eigenvalue(*e) >= -1e-9);
  const Matrix ma = r.E00 + r.E01;
  const Matrix mb = r.E00 + r.E10;
  CHECK((ma / ma.trace().real() - r.a.matrix()).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK((mb / mb.trace().real() - r.b.matrix()).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK(std::abs(r.p00 - r.c * r.k_value / static_cast<double>(d)) <= 1e-9);
  CHECK(r.p00 > 0.0);
  CHECK(r.p00 <= 1.0 + 1e-12);
  CHECK((r.joint_state.matrix() - r.R / r.R.trace().real()).norm() <= 1e-9);
}

}  // namespace

TEST_CASE("maximally mixed pair") {
  const auto m = DensityMatrix::maximally_mixed(2);
  const PoolingResult r = pool_measurement(m, m);
  check_structure(r);
  CHECK(r.c == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.k_value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(r.p00 - 1.0) <= 1e-8);
  CHECK((r.E00 - Matrix::Identity(2, 2)).norm() <= 1e-8);
  CHECK(r.E11.norm() <= 1e-8);
  CHECK((r.joint_state.matrix() - m.matrix()).norm() <= 1e-8);
}

TEST_CASE("identical pure pair") {
  const auto zero = DensityMatrix::diagonal({1, 0});
  const PoolingResult r = pool_measurement(zero, zero);
  check_structure(r);
  CHECK(std::abs(r.c - 1.0) <= 1e-8);
  CHECK(std::abs(r.p00 - 0.5) <= 1e-8);
  CHECK((r.E11 - diag2(0, 1)).norm() <= 1e-8);
  CHECK((r.joint_state.matrix() - zero.matrix()).norm() <= 1e-8);
}

TEST_CASE("commuting pair") {
  const PoolingResult r =
      pool_measurement(DensityMatrix::diagonal({1, 0}), DensityMatrix::diagonal({0.3, 0.7}));
  check_structure(r);
  CHECK(std::abs(r.c - 1.0) <= 1e-8);
  CHECK(std::abs(r.k_value - 0.3) <= 1e-8);
  CHECK(std::abs(r.p00 - 0.15) <= 1e-8);
  CHECK((r.E00 - diag2(0.3, 0)).norm() <= 1e-8);
  CHECK((r.E01 - diag2(0.7, 0)).norm() <= 1e-8);
  CHECK((r.E10 - diag2(0, 0.7)).norm() <= 1e-8);
  CHECK((r.E11 - diag2(0, 0.3)).norm() <= 1e-8);
  CHECK(r.closed_form_agrees);
  CHECK(r.e01_e10_overlap == 0);
  const MaximalityReport rep = verify_r_maximality(r, 100, 7);
  CHECK(rep.violations == 0);
  CHECK(rep.trials == 100);
}

TEST_CASE("incompatible pairs cannot be pooled") {
  CHECK_THROWS_AS(
      pool_measurement(DensityMatrix::diagonal({1, 0}), DensityMatrix::diagonal({0, 1})),
      Incompatible);
  CHECK_THROWS_AS(
      pool_measurement(DensityMatrix::diagonal({1, 0}), DensityMatrix::maximally_mixed(3)),
      DimensionMismatch);
}

TEST_CASE("random compatible pairs") {
  Rng rng(307);
  for (int t = 0; t < 60; ++t) {
    const Index d = pick(rng, 2, 4);
    const auto a = random_mixed_rank(rng, d);
    const auto b = random_state(rng, d);
    const PoolingResult r = pool_measurement(a, b);
    check_structure(r);
    // supp(rho_AB) lies inside both supports
    const Matrix pa = support_projector(a, 1e-7).op.matrix();
    const Matrix pb = support_projector(b, 1e-7).op.matrix();
    const Matrix j = r.joint_state.matrix();
    CHECK((pa * j * pa - j).norm() <= 1e-6);
    CHECK((pb * j * pb - j).norm() <= 1e-6);
    CHECK(verify_r_maximality(r, 20, 11).violations == 0);
  }
}

TEST_CASE("equal states pool to themselves") {
  Rng rng(311);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_mixed_rank(rng, pick(rng, 2, 4));
    const PoolingResult r = pool_measurement(a, a);
    CHECK((r.joint_state.matrix() - a.matrix()).norm() <= 1e-8);
  }
}

TEST_CASE("verify_r_maximality is deterministic for a seed") {
  const PoolingResult r =
      pool_measurement(DensityMatrix::bloch(0.3, 0.1, 0.2), DensityMatrix::bloch(-0.2, 0.4, 0.1));
  const auto x = verify_r_maximality(r, 50, 99);
  const auto y = verify_r_maximality(r, 50, 99);
  CHECK(x.feasible == y.feasible);
  CHECK(x.max_feasible_gain == y.max_feasible_gain);
  CHECK(x.violations == 0);
}
