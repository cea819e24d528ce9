#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "qcompat/qmat.hpp"

using namespace qcompat;
using namespace qcompat::testing;

namespace {
Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}
}  // namespace

TEST_CASE("eig_hermitian: known spectra") {
  auto check = [](const Matrix& h, double lo, double hi) {
    const Spectrum sp = eig_hermitian(HermitianOperator(h));
    CHECK(sp.values(0) == doctest::Approx(lo).epsilon(1e-12));
    CHECK(sp.values(1) == doctest::Approx(hi).epsilon(1e-12));
    const Matrix back = sp.vectors * sp.values.cast<Complex>().asDiagonal() * sp.vectors.adjoint();
    CHECK((back - h).norm() <= 1e-10 * std::max(1.0, h.norm()));
  };
  check(diag2(2, 1), 1, 2);
  check(pauli::X(), -1, 1);
  check((pauli::X() + pauli::Z()) / std::sqrt(2.0), -1, 1);
}

TEST_CASE("eig_hermitian: eigenpair residuals and deterministic phases") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const Index d = pick(rng, 2, 6);
    const Matrix h = random_hermitian(rng, d);
    const Spectrum a = eig_hermitian(h);
    const Spectrum b = eig_hermitian(h);
    CHECK(a.vectors == b.vectors);
    for (Index i = 0; i < d; ++i) {
      const Vector v = a.vectors.col(i);
      CHECK((h * v - a.values(i) * v).norm() <= 1e-10 * h.norm());
      if (i > 0) CHECK(a.values(i - 1) <= a.values(i));
    }
  }
}

TEST_CASE("HermitianOperator rejects large anti-Hermitian parts and symmetrizes small ones") {
  Matrix m = pauli::X();
  m(0, 1) += Complex(0.0, 0.5);
  CHECK_THROWS_AS(HermitianOperator{m}, NonHermitian);

  Matrix near = pauli::X();
  near(0, 1) += 1e-12;
  const HermitianOperator h(near);
  CHECK(h.matrix()(0, 1) == h.matrix()(1, 0));
}

TEST_CASE("matrix_abs") {
  CHECK((matrix_abs(HermitianOperator(pauli::Z())).matrix() - pauli::I()).norm() < 1e-12);
  const Matrix half_diff = (pauli::X() - pauli::Z()) / 2.0;
  CHECK((matrix_abs(half_diff) - pauli::I() / std::sqrt(2.0)).norm() < 1e-12);
  const Matrix psd = DensityMatrix::bloch(0.2, 0.1, -0.3).matrix();
  CHECK((matrix_abs(psd) - psd).norm() < 1e-12);

  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Matrix h = random_hermitian(rng, pick(rng, 2, 5));
    const Matrix a = matrix_abs(h);
    CHECK((a * a - h * h).norm() <= 1e-9 * std::max(1.0, (h * h).norm()));
    CHECK(min_eigenvalue(a) >= -1e-12);
  }
}

TEST_CASE("trace_distance examples") {
  const auto zero = DensityMatrix::diagonal({1, 0});
  const auto one = DensityMatrix::diagonal({0, 1});
  const auto mixed = DensityMatrix::maximally_mixed(2);
  CHECK(trace_distance(zero, one) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(trace_distance(mixed, mixed) == doctest::Approx(0.0));
  CHECK(trace_distance(zero, mixed) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(trace_distance(zero, DensityMatrix::maximally_mixed(3)), DimensionMismatch);
}

TEST_CASE("trace_distance is a unitarily invariant metric") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const Index d = pick(rng, 2, 4);
    const auto a = random_mixed_rank(rng, d);
    const auto b = random_mixed_rank(rng, d);
    const auto c = random_mixed_rank(rng, d);
    const double ab = trace_distance(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0 + 1e-12);
    CHECK(ab == doctest::Approx(trace_distance(b, a)).epsilon(1e-12));
    CHECK(ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-8);
    const Matrix u = random_unitary(rng, d);
    CHECK(std::abs(trace_distance(conjugate(a, u), conjugate(b, u)) - ab) <= 1e-9);
  }
}

TEST_CASE("DensityMatrix validation names the label and measured deviation") {
  Matrix m = 0.9 * DensityMatrix::diagonal({1, 0}).matrix();
  try {
    DensityMatrix rho(m, kDensityTol, "alice");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.label() == "alice");
    CHECK(e.measured() == doctest::Approx(0.9));
  }
  CHECK_THROWS_AS(DensityMatrix(diag2(1.5, -0.5)), ValidationError);
  CHECK_NOTHROW(DensityMatrix(diag2(1.0 + 5e-11, -5e-11)));
}

TEST_CASE("support_projector") {
  const auto p0 = support_projector(DensityMatrix::diagonal({1, 0}));
  CHECK(p0.rank == 1);
  CHECK((p0.op.matrix() - diag2(1, 0)).norm() < 1e-12);
  CHECK(support_projector(DensityMatrix::maximally_mixed(2)).rank == 2);
  CHECK(support_projector(DensityMatrix::diagonal({0.999, 0.001}), 1e-9).rank == 2);

  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const auto rho = random_mixed_rank(rng, pick(rng, 2, 5));
    const auto sp = support_projector(rho);
    const Matrix& p = sp.op.matrix();
    CHECK((p * p - p).norm() <= 1e-9);
    CHECK(std::abs(p.trace().real() - static_cast<double>(sp.rank)) <= 1e-9);
  }
}

TEST_CASE("supports_intersection_dim") {
  const auto zero = DensityMatrix::diagonal({1, 0});
  const auto one = DensityMatrix::diagonal({0, 1});
  CHECK(supports_intersection_dim(std::vector{zero, one}) == 0);
  CHECK(supports_intersection_dim(std::vector{zero, DensityMatrix::diagonal({0.01, 0.99})}) == 1);
  Vector plus(2);
  plus << 1.0, 1.0;
  CHECK(supports_intersection_dim(std::vector{zero, DensityMatrix::pure(plus)}) == 0);

  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const Index d = pick(rng, 2, 4);
    std::vector<DensityMatrix> full{random_state(rng, d), random_state(rng, d), random_state(rng, d)};
    CHECK(supports_intersection_dim(full) == d);
    std::vector<DensityMatrix> mixed{random_mixed_rank(rng, d), random_mixed_rank(rng, d),
                                     random_mixed_rank(rng, d)};
    const Index forward = supports_intersection_dim(mixed);
    std::swap(mixed[0], mixed[2]);
    CHECK(supports_intersection_dim(mixed) == forward);
  }
}

TEST_CASE("matrix_exp and matrix_log") {
  CHECK((matrix_exp(HermitianOperator::zero(2)).matrix() - pauli::I()).norm() < 1e-14);
  CHECK(matrix_log(HermitianOperator::identity(3)).matrix().norm() < 1e-14);
  const Matrix e = matrix_exp(HermitianOperator(diag2(std::log(2.0), 0))).matrix();
  CHECK((e - diag2(2, 1)).norm() < 1e-12);
  CHECK_THROWS_AS(matrix_log(HermitianOperator(diag2(1, 0))), SingularLog);

  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    const auto rho = random_state(rng, pick(rng, 2, 5));
    const Matrix back = matrix_exp(matrix_log(rho.op())).matrix();
    CHECK((back - rho.matrix()).norm() <= 1e-9);
  }
}
