#include "qcompat/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qcompat/sdp.hpp"

namespace qcompat {

BoundaryState::BoundaryState(MaxEntResult near_boundary)
    : Error("maximum-entropy state lies on the boundary of the state space; "
            "multipliers diverge"),
      result_(std::move(near_boundary)) {}

double von_neumann_entropy(const DensityMatrix& rho) {
  const Spectrum sp = eig_hermitian(rho.op());
  double s = 0.0;
  for (Index i = 0; i < sp.values.size(); ++i) {
    const double p = sp.values(i);
    if (p > 0.0) s -= p * std::log(p);
  }
  return std::max(0.0, s);
}

namespace {

void check_dims(std::span<const ExpectationConstraint> constraints, Index dim) {
  for (const auto& c : constraints) {
    if (c.observable.dim() != dim) {
      throw DimensionMismatch("observable of dimension " + std::to_string(c.observable.dim()) +
                              " used with dimension " + std::to_string(dim));
    }
  }
}

// Gibbs state of H = sum_i l_i O_i, with log Z, in a shifted eigenbasis.
struct GibbsPoint {
  RealVector h;    // eigenvalues of H
  Matrix v;        // eigenvectors of H
  RealVector w;    // exp(h - h_max)
  double z = 0.0;  // sum of w
  double log_z = 0.0;
  Matrix rho;
};

GibbsPoint gibbs(std::span<const ExpectationConstraint> cs, const RealVector& lambda, Index dim) {
  Matrix h = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    h += lambda(static_cast<Index>(i)) * cs[i].observable.matrix();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
  GibbsPoint g;
  g.h = es.eigenvalues();
  g.v = es.eigenvectors();
  const double hmax = g.h.maxCoeff();
  g.w = (g.h.array() - hmax).exp();
  g.z = g.w.sum();
  g.log_z = hmax + std::log(g.z);
  g.rho = g.v * (g.w / g.z).asDiagonal() * g.v.adjoint();
  return g;
}

double dual_objective(std::span<const ExpectationConstraint> cs, const RealVector& lambda,
                      const RealVector& targets, Index dim) {
  return gibbs(cs, lambda, dim).log_z - lambda.dot(targets);
}

}  // namespace

double constraint_violation(std::span<const ExpectationConstraint> constraints, Index dim) {
  check_dims(constraints, dim);
  const std::size_t n = constraints.size();
  const auto d = static_cast<std::size_t>(dim);
  // variables: rho, s_1..s_n;  constraints: Tr rho = 1, +-(Tr[O_i rho] - o_i) <= s_i
  std::vector<std::size_t> ins{d};
  ins.insert(ins.end(), n, 1);
  sdp::Problem p;
  p.name = "maxent_violation";
  p.map = sdp::LinearMap(ins, std::vector<std::size_t>(1 + 2 * n, 1));
  p.objective.push_back(Matrix::Zero(dim, dim));
  p.variable_kinds.push_back(sdp::VariableKind::Psd);
  for (std::size_t i = 0; i < n; ++i) {
    p.objective.push_back(Matrix::Constant(1, 1, -1.0));
    p.variable_kinds.push_back(sdp::VariableKind::Psd);
  }
  const Matrix one = Matrix::Identity(1, 1);
  p.map.add_trace_pairing(0, 0, Matrix::Identity(dim, dim), one);
  p.bound.push_back(one);
  p.constraint_kinds.push_back(sdp::ConstraintKind::Equal);
  for (std::size_t i = 0; i < n; ++i) {
    for (int sign : {1, -1}) {
      const std::size_t c = p.bound.size();
      p.map.add_trace_pairing(0, c, constraints[i].observable.matrix(), sign * one);
      p.map.add_trace_pairing(1 + i, c, one, -one);
      p.bound.push_back(sign * constraints[i].value * one);
      p.constraint_kinds.push_back(sdp::ConstraintKind::LessEqual);
    }
  }
  const sdp::Solution sol = sdp::solve(p, {1e-9, 200});
  if (sol.status != sdp::Status::Optimal && sol.status != sdp::Status::NumericalLimit) {
    throw SolverError("constraint_violation: unexpected solver status " +
                      std::string(sdp::to_string(sol.status)));
  }
  return std::max(0.0, -sol.primal_value);
}

double max_min_eigenvalue(std::span<const ExpectationConstraint> constraints, Index dim) {
  check_dims(constraints, dim);
  const std::size_t n = constraints.size();
  const auto d = static_cast<std::size_t>(dim);
  // variables: rho (PSD), t (free);  t I - rho <= 0, Tr rho = 1, Tr[O_i rho] = o_i
  std::vector<std::size_t> outs{d, 1};
  outs.insert(outs.end(), n, 1);
  sdp::Problem p;
  p.name = "maxent_interior";
  p.map = sdp::LinearMap({d, 1}, outs);
  p.objective = {Matrix::Zero(dim, dim), Matrix::Identity(1, 1)};
  p.variable_kinds = {sdp::VariableKind::Psd, sdp::VariableKind::Free};
  const Matrix one = Matrix::Identity(1, 1);
  const Matrix id = Matrix::Identity(dim, dim);
  p.map.add(sdp::Congruence{0, 0, -id, id});
  p.map.add_trace_pairing(1, 0, one, id);
  p.bound.push_back(Matrix::Zero(dim, dim));
  p.constraint_kinds.push_back(sdp::ConstraintKind::LessEqual);
  p.map.add_trace_pairing(0, 1, id, one);
  p.bound.push_back(one);
  p.constraint_kinds.push_back(sdp::ConstraintKind::Equal);
  for (std::size_t i = 0; i < n; ++i) {
    p.map.add_trace_pairing(0, 2 + i, constraints[i].observable.matrix(), one);
    p.bound.push_back(constraints[i].value * one);
    p.constraint_kinds.push_back(sdp::ConstraintKind::Equal);
  }
  const sdp::Solution sol = sdp::solve(p, {1e-9, 200});
  return sol.primal_value;
}

double gibbs_residual(const DensityMatrix& state,
                      std::span<const ExpectationConstraint> constraints) {
  const Matrix log_rho = matrix_log(state.op()).matrix();
  const Index d = state.dim();
  const auto n = static_cast<Index>(constraints.size());
  // least squares in the real Frobenius geometry
  Eigen::MatrixXd basis(2 * d * d, n + 1);
  auto flatten = [d](const Matrix& m) {
    Eigen::VectorXd out(2 * d * d);
    for (Index k = 0; k < d * d; ++k) {
      out(2 * k) = m.data()[k].real();
      out(2 * k + 1) = m.data()[k].imag();
    }
    return out;
  };
  basis.col(0) = flatten(Matrix::Identity(d, d));
  for (Index i = 0; i < n; ++i) {
    basis.col(i + 1) = flatten(constraints[static_cast<std::size_t>(i)].observable.matrix());
  }
  const Eigen::VectorXd target = flatten(log_rho);
  const Eigen::VectorXd coef = basis.completeOrthogonalDecomposition().solve(target);
  return (basis * coef - target).norm();
}

MaxEntResult maxent_estimate(std::span<const ExpectationConstraint> constraints, Index dim,
                             const MaxEntOptions& options) {
  if (dim <= 0) throw DimensionMismatch("maxent_estimate: dimension must be positive");
  check_dims(constraints, dim);
  const auto n = static_cast<Index>(constraints.size());

  if (n > 0) {
    const double violation = constraint_violation(constraints, dim);
    if (violation > options.feasibility_tol) {
      throw Infeasible("no density matrix satisfies the expectation constraints", violation);
    }
  }

  RealVector targets(n);
  for (Index i = 0; i < n; ++i) targets(i) = constraints[static_cast<std::size_t>(i)].value;
  RealVector lambda = RealVector::Zero(n);

  auto finish = [&](const GibbsPoint& g, int iterations, bool boundary) {
    MaxEntResult r;
    // the Gibbs state is PSD and unit trace by construction
    r.state = DensityMatrix(HermitianOperator(g.rho), 1e-9);
    r.multipliers.assign(lambda.data(), lambda.data() + n);
    r.identity_multiplier = 1.0 - g.log_z;
    r.entropy = von_neumann_entropy(r.state);
    for (Index i = 0; i < n; ++i) {
      r.residuals.push_back(
          inner(constraints[static_cast<std::size_t>(i)].observable.matrix(), g.rho) - targets(i));
    }
    r.iterations = iterations;
    r.boundary = boundary;
    return r;
  };

  for (int it = 0;; ++it) {
    const GibbsPoint g = gibbs(constraints, lambda, dim);
    RealVector grad(n);
    std::vector<Matrix> rotated;
    rotated.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      const Matrix& o = constraints[static_cast<std::size_t>(i)].observable.matrix();
      grad(i) = inner(o, g.rho) - targets(i);
      rotated.push_back(g.v.adjoint() * o * g.v);
    }
    const double gnorm = n > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;

    auto accept = [&] {
      MaxEntResult r = finish(g, it, false);
      if (n > 0 && min_eigenvalue(r.state.matrix()) < 1e-6 &&
          max_min_eigenvalue(constraints, dim) <= options.interior_tol) {
        r.boundary = true;
        throw BoundaryState(std::move(r));
      }
      return r;
    };
    if (gnorm <= options.residual_tol) return accept();
    if (lambda.norm() > options.divergence_norm) throw BoundaryState(finish(g, it, true));
    if (it >= options.max_iter) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "(residual %.3e after %d iterations)", gnorm, it);
      throw SolverError(std::string("maxent_estimate: Newton iteration did not converge ") + buf);
    }

    // Hessian of log Z: divided differences of exp in the eigenbasis of H
    // (Kubo-Mori covariance), minus the outer product of expectations.
    const Index d = dim;
    Eigen::MatrixXd kernel(d, d);
    for (Index k = 0; k < d; ++k) {
      for (Index l = 0; l < d; ++l) {
        const double delta = g.h(k) - g.h(l);
        kernel(k, l) = std::abs(delta) < 1e-300 ? g.w(l) : g.w(l) * std::expm1(delta) / delta;
      }
    }
    kernel /= g.z;
    Eigen::MatrixXd hess(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = i; j < n; ++j) {
        const Matrix& a = rotated[static_cast<std::size_t>(i)];
        const Matrix& b = rotated[static_cast<std::size_t>(j)];
        double acc = 0.0;
        for (Index k = 0; k < d; ++k) {
          for (Index l = 0; l < d; ++l) acc += (a(k, l) * b(l, k)).real() * kernel(k, l);
        }
        const double ei = grad(i) + targets(i);
        const double ej = grad(j) + targets(j);
        hess(i, j) = hess(j, i) = acc - ei * ej;
      }
    }
    // Pseudo-inverse step: redundant constraints leave flat directions.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hes(hess);
    const double hmax = std::max(hes.eigenvalues().maxCoeff(), 0.0);
    RealVector step = RealVector::Zero(n);
    RealVector reachable = RealVector::Zero(n);
    const RealVector proj = hes.eigenvectors().transpose() * grad;
    for (Index k = 0; k < n; ++k) {
      const double ev = hes.eigenvalues()(k);
      if (ev > 1e-13 * hmax && ev > 0.0) {
        step -= hes.eigenvectors().col(k) * (proj(k) / ev);
        reachable += hes.eigenvectors().col(k) * proj(k);
      }
    }
    // Along flat directions the residual is rounding in the targets of
    // redundant constraints, which no step can remove.
    if (reachable.cwiseAbs().maxCoeff() <= options.residual_tol &&
        (grad - reachable).cwiseAbs().maxCoeff() <= options.feasibility_tol) {
      return accept();
    }
    const double f0 = g.log_z - lambda.dot(targets);
    const double slope = grad.dot(step);
    double t = 1.0;
    // Once the predicted decrease is at rounding level the objective can no
    // longer rank trial points; the full Newton step is taken.
    const bool local = -slope <= 1e-13 * (1.0 + std::abs(f0));
    for (int ls = 0; ls < 60 && !local; ++ls) {
      if (dual_objective(constraints, lambda + t * step, targets, dim) <= f0 + 1e-4 * t * slope) {
        break;
      }
      t *= 0.5;
    }
    lambda += t * step;
  }
}

MaxEntResult pool_classical(std::span<const ExpectationConstraint> a,
                            std::span<const ExpectationConstraint> b, Index dim,
                            const MaxEntOptions& options) {
  std::vector<ExpectationConstraint> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return maxent_estimate(all, dim, options);
}

}  // namespace qcompat
