#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "qcompat/compat.hpp"

using namespace qcompat;
using namespace qcompat::testing;

namespace {

const DensityMatrix kZero = DensityMatrix::diagonal({1, 0});
const DensityMatrix kOne = DensityMatrix::diagonal({0, 1});
const DensityMatrix kMixed = DensityMatrix::maximally_mixed(2);
const DensityMatrix kPlus = DensityMatrix::bloch(1, 0, 0);

StateSet pair(const DensityMatrix& a, const DensityMatrix& b) { return StateSet({a, b}); }

double all_measures_max_gap(const StateSet& s) {
  return std::max({k_bfm(s).gap, k_pp(s).gap, k_es(s).gap});
}

}  // namespace

TEST_CASE("StateSet invariants") {
  CHECK_THROWS_AS(StateSet({kZero}), DimensionMismatch);
  CHECK_THROWS_AS(StateSet({kZero, DensityMatrix::maximally_mixed(3)}), DimensionMismatch);
  const StateSet s({kZero, kOne});
  CHECK(s.labels() == std::vector<std::string>{"rho_1", "rho_2"});
}

TEST_CASE("k_bfm examples") {
  CHECK(k_bfm(pair(kMixed, kMixed)).value == doctest::Approx(1.0).epsilon(1e-6));
  const auto r = k_bfm(pair(kZero, DensityMatrix::diagonal({0.3, 0.7})));
  CHECK(r.value == doctest::Approx(0.3).epsilon(1e-6));
  REQUIRE(r.upper_bound_trace_distance.has_value());
  CHECK(*r.upper_bound_trace_distance == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r.bound_attained.value());
  CHECK(k_bfm(pair(kMixed, kPlus)).value == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(k_bfm(pair(kZero, kOne)).value <= 1e-6);
  CHECK(k_bfm(pair(kZero, kOne)).value >= 0.0);
}

TEST_CASE("k_bfm dual certificate sums to at least I") {
  Rng rng(101);
  for (int t = 0; t < 20; ++t) {
    const StateSet s = random_set(rng, pick(rng, 2, 4), 3);
    const auto r = k_bfm(s);
    Matrix sum = Matrix::Zero(s.dim(), s.dim());
    double bound = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(min_eigenvalue(r.dual_certificate[i]) >= -1e-8);
      sum += r.dual_certificate[i];
      bound += inner(s[i].matrix(), r.dual_certificate[i]);
    }
    CHECK(min_eigenvalue(sum - Matrix::Identity(s.dim(), s.dim())) >= -1e-7);
    CHECK(r.value <= bound + 1e-8);
    CHECK(r.gap <= 1e-7);
  }
}

TEST_CASE("k_pp examples and measurement certificate") {
  CHECK(k_pp(pair(kMixed, kMixed)).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(k_pp(pair(kZero, kOne)).value <= 1e-6);
  const double expected = 1.0 - 1.0 / std::sqrt(2.0);
  const auto r = k_pp(pair(kZero, kPlus));
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-6));
  Matrix sum = Matrix::Zero(2, 2);
  for (const auto& m : r.dual_certificate) {
    CHECK(min_eigenvalue(m) >= -1e-8);
    sum += m;
  }
  CHECK((sum - Matrix::Identity(2, 2)).norm() <= 1e-8);
}

TEST_CASE("k_es examples") {
  const auto same = k_es(pair(kMixed, kMixed));
  CHECK(same.value == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(k_es(pair(kZero, kMixed)).value == 0.0);
  const auto r = k_es(pair(kMixed, DensityMatrix::diagonal({0.75, 0.25})));
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  double alpha_sum = 0.0;
  for (double a : r.alphas) alpha_sum += a;
  CHECK(alpha_sum >= 1.0 - 1e-7);
}

TEST_CASE("k_es never exceeds 1/k") {
  Rng rng(103);
  for (int t = 0; t < 20; ++t) {
    const auto k = static_cast<std::size_t>(pick(rng, 2, 4));
    const StateSet s = random_set(rng, pick(rng, 2, 4), k);
    CHECK(k_es(s).value <= 1.0 / static_cast<double>(k) + 1e-7);
  }
}

TEST_CASE("k_es on singular sums: compressed and uncompressed programs agree") {
  Rng rng(107);
  for (int t = 0; t < 20; ++t) {
    const Index d = pick(rng, 3, 4);
    const Index r = pick(rng, 1, static_cast<int>(d) - 1);
    const Matrix v = random_unitary(rng, d).leftCols(r);
    std::vector<DensityMatrix> states;
    for (int i = 0; i < 3; ++i) {
      states.emplace_back(hermitian_part(v * random_state(rng, r).matrix() * v.adjoint()), 1e-9);
    }
    const StateSet s(states);
    const auto compressed = k_es(s);
    const auto full = sdp::solve(es_problem(s, Matrix::Identity(d, d)));
    REQUIRE(full.status == sdp::Status::Optimal);
    CHECK(full.gap <= 1e-7);
    CHECK(std::abs(full.primal_value - compressed.value) <= 1e-6);
    CHECK(std::abs(oracle_es(s) - compressed.value) <= 1e-6);
  }
}

TEST_CASE("Symmetrized ES program bounds K_ES from above, exactly when the sum is diagonal") {
  Rng rng(109);
  for (int t = 0; t < 15; ++t) {
    const Index d = pick(rng, 2, 3);
    const StateSet generic = random_set(rng, d, 2);
    const auto relaxed = sdp::solve(es_diagonal_problem(generic));
    REQUIRE(relaxed.status == sdp::Status::Optimal);
    CHECK(relaxed.primal_value >= k_es(generic).value - 1e-7);

    std::vector<DensityMatrix> diag;
    for (int i = 0; i < 2; ++i) {
      const auto p = random_probabilities(rng, d);
      diag.push_back(DensityMatrix::diagonal(p));
    }
    const StateSet commuting(diag);
    const auto exact = sdp::solve(es_diagonal_problem(commuting));
    REQUIRE(exact.status == sdp::Status::Optimal);
    CHECK(std::abs(exact.primal_value - k_es(commuting).value) <= 1e-6);
  }
}

TEST_CASE("bfm_pair_upper_bound examples") {
  const auto same = bfm_pair_upper_bound(kMixed, kMixed);
  CHECK(same.value == doctest::Approx(1.0));
  CHECK(same.attained);
  const auto skew = bfm_pair_upper_bound(kZero, kPlus);
  CHECK(skew.value == doctest::Approx(1.0 - std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK_FALSE(skew.attained);
  CHECK(min_eigenvalue(skew.candidate) == doctest::Approx((1.0 - std::sqrt(2.0)) / 2.0).epsilon(1e-12));
  const auto comm = bfm_pair_upper_bound(kZero, DensityMatrix::diagonal({0.3, 0.7}));
  CHECK(comm.value == doctest::Approx(0.3));
  CHECK(comm.attained);
  CHECK_THROWS_AS(bfm_pair_upper_bound(kZero, DensityMatrix::maximally_mixed(3)), DimensionMismatch);
}

TEST_CASE("oracles: examples and errors") {
  CHECK(oracle_bfm_commuting(pair(kZero, DensityMatrix::diagonal({0.3, 0.7}))) ==
        doctest::Approx(0.3).epsilon(1e-12));
  CHECK(oracle_bfm_commuting(pair(kMixed, kMixed)) == doctest::Approx(1.0));
  CHECK(oracle_bfm_commuting(StateSet({DensityMatrix::diagonal({0.5, 0.5, 0}),
                                       DensityMatrix::diagonal({0, 0.5, 0.5})})) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(oracle_bfm_commuting(pair(kZero, kPlus)), NotCommuting);
  CHECK(oracle_pp_pair(kZero, kOne) == doctest::Approx(0.0));
  CHECK(oracle_pp_pair(kZero, kPlus) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  CHECK(oracle_es(pair(kMixed, kMixed)) == doctest::Approx(0.5));
  CHECK(oracle_es(pair(kZero, kMixed)) == 0.0);
  CHECK(oracle_es(pair(kMixed, DensityMatrix::diagonal({0.75, 0.25}))) ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("is_compatible") {
  CHECK(is_compatible(pair(kZero, DensityMatrix::diagonal({1e-6, 1 - 1e-6}))));
  CHECK_FALSE(is_compatible(pair(kZero, kOne)));
  Rng rng(113);
  CHECK(is_compatible(pair(random_state(rng, 3), random_state(rng, 3))));
}

TEST_CASE("measures: orderings, monotonicity, covariance, permutation") {
  Rng rng(127);
  for (int t = 0; t < 40; ++t) {
    const Index d = pick(rng, 2, 4);
    const auto k = static_cast<std::size_t>(pick(rng, 2, 3));
    const StateSet s = random_set(rng, d, k);
    const double bfm = k_bfm(s).value;
    const double pp = k_pp(s).value;
    const double es = k_es(s).value;
    CHECK(pp >= bfm - 1e-7);
    CHECK(bfm >= es - 1e-7);

    std::vector<DensityMatrix> more = s.states();
    more.push_back(random_mixed_rank(rng, d));
    const StateSet bigger(more);
    CHECK(k_bfm(bigger).value <= bfm + 1e-8);
    CHECK(k_pp(bigger).value <= pp + 1e-8);
    CHECK(k_es(bigger).value <= es + 1e-8);

    const Matrix u = random_unitary(rng, d);
    std::vector<DensityMatrix> rotated;
    for (const auto& rho : s.states()) rotated.push_back(conjugate(rho, u));
    const StateSet rs(rotated);
    CHECK(std::abs(k_bfm(rs).value - bfm) <= 1e-7);
    CHECK(std::abs(k_pp(rs).value - pp) <= 1e-7);
    CHECK(std::abs(k_es(rs).value - es) <= 1e-7);

    std::vector<DensityMatrix> reversed(s.states().rbegin(), s.states().rend());
    const StateSet ps(reversed);
    CHECK(std::abs(k_bfm(ps).value - bfm) <= 1e-7);
    CHECK(std::abs(k_pp(ps).value - pp) <= 1e-7);
    CHECK(std::abs(k_es(ps).value - es) <= 1e-7);

    if (!is_compatible(s)) CHECK(bfm <= 1e-6);
    CHECK(all_measures_max_gap(s) <= 1e-7);
  }
}

TEST_CASE("measures on rank-deficient sets with differing supports") {
  Rng rng(131);
  for (int t = 0; t < 20; ++t) {
    const Index d = pick(rng, 2, 4);
    const StateSet s({random_state(rng, d, 1), random_state(rng, d, d)});
    CHECK(k_es(s).value == 0.0);
    CHECK(k_es(s).dual_value >= -1e-12);
  }
}
