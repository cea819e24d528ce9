#include "qcompat/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qcompat {

namespace {

Index support_overlap(const Matrix& x, const Matrix& y, double rank_tol) {
  const Matrix vx = support_of(x, rank_tol).basis;
  const Matrix vy = support_of(y, rank_tol).basis;
  if (vx.cols() == 0 || vy.cols() == 0) return 0;
  Matrix both(x.rows(), vx.cols() + vy.cols());
  both << vx, vy;
  Eigen::JacobiSVD<Matrix> svd(both);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-7 ? 1 : 0;
  return vx.cols() + vy.cols() - rank;
}

}  // namespace

PoolingResult pool_measurement(const DensityMatrix& a, const DensityMatrix& b, double tol,
                               double rank_tol) {
  if (a.dim() != b.dim()) throw DimensionMismatch("pool_measurement: dimensions differ");
  const StateSet pair({a, b}, {"rho_A", "rho_B"});
  if (!is_compatible(pair, rank_tol)) {
    throw Incompatible("pooling requires intersecting supports; K(rho_A, rho_B) = 0");
  }
  const CompatibilityReport k = k_bfm(pair, tol);
  const Index d = a.dim();

  PoolingResult r;
  r.a = a;
  r.b = b;
  r.tol = tol;
  r.rank_tol = rank_tol;
  r.gap = k.gap;
  r.R = psd_part(k.primal_witness);
  r.k_value = r.R.trace().real();
  if (r.k_value <= tol) {
    throw Incompatible("pooling requires K(rho_A, rho_B) > 0, got " + std::to_string(r.k_value));
  }

  const Matrix id = Matrix::Identity(d, d);
  r.c = 1.0 / max_eigenvalue(hermitian_part(a.matrix() + b.matrix() - r.R));
  const Matrix spread = a.matrix() + b.matrix() + matrix_abs(Matrix(a.matrix() - b.matrix()));
  r.c_closed_form = 2.0 / max_eigenvalue(hermitian_part(spread));
  r.closed_form_agrees = std::abs(r.c - r.c_closed_form) <= 1e-6 * std::max(1.0, r.c);

  r.E00 = r.c * r.R;
  r.E01 = hermitian_part(r.c * a.matrix() - r.E00);
  r.E10 = hermitian_part(r.c * b.matrix() - r.E00);
  r.E11 = hermitian_part(id - r.c * (a.matrix() + b.matrix() - r.R));
  r.p00 = r.E00.trace().real() / static_cast<double>(d);
  r.joint_state = DensityMatrix(HermitianOperator(Matrix(r.R / r.k_value)));
  r.e01_e10_overlap = support_overlap(r.E01, r.E10, 1e-6);
  return r;
}

MaximalityReport verify_r_maximality(const PoolingResult& result, int trials,
                                     std::uint64_t seed) {
  MaximalityReport rep;
  rep.trials = trials;
  rep.seed = seed;
  const Index d = result.R.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> log_scale(-6.0, -2.0);
  const double base = result.R.trace().real();
  for (int t = 0; t < trials; ++t) {
    // alternate rank-one and full-rank perturbations
    const Index cols = (t % 2 == 0) ? 1 : d;
    Matrix g(d, cols);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < cols; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
    }
    Matrix p = g * g.adjoint();
    p *= std::pow(10.0, log_scale(rng)) / p.trace().real();
    const Matrix rp = result.R + p;
    const bool below_a = min_eigenvalue(hermitian_part(result.a.matrix() - rp)) >= 0.0;
    const bool below_b = min_eigenvalue(hermitian_part(result.b.matrix() - rp)) >= 0.0;
    if (!below_a || !below_b) continue;
    ++rep.feasible;
    const double gain = rp.trace().real() - base;
    rep.max_feasible_gain = std::max(rep.max_feasible_gain, gain);
    if (gain > 1e-7) ++rep.violations;
  }
  return rep;
}

}  // namespace qcompat
