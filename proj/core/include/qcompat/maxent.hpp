#pragma once

// Maximum-entropy state assignment from expectation-value constraints.

#include <span>
#include <vector>

#include "qcompat/qmat.hpp"

namespace qcompat {

struct ExpectationConstraint {
  HermitianOperator observable;
  double value = 0.0;
};

struct MaxEntResult {
  DensityMatrix state;
  /// One multiplier per constraint: state = exp(sum_i l_i O_i + (l_0 - 1) I).
  std::vector<double> multipliers;
  double identity_multiplier = 0.0;  // l_0
  double entropy = 0.0;              // nats
  std::vector<double> residuals;     // Tr[O_i state] - o_i
  int iterations = 0;
  bool boundary = false;
};

/// The constraints admit only rank-deficient states, so the Gibbs-form
/// multipliers diverge. Carries the last near-boundary iterate.
class BoundaryState : public Error {
 public:
  explicit BoundaryState(MaxEntResult near_boundary);
  const MaxEntResult& result() const noexcept { return result_; }

 private:
  MaxEntResult result_;
};

struct MaxEntOptions {
  double residual_tol = 1e-11;
  int max_iter = 500;
  double divergence_norm = 1e3;
  double feasibility_tol = 1e-7;  // total constraint violation that counts as Infeasible
  double interior_tol = 1e-8;     // largest feasible min-eigenvalue that counts as boundary
};

double von_neumann_entropy(const DensityMatrix& rho);

/// Throws Infeasible when no density matrix satisfies the constraints,
/// BoundaryState when every satisfying state is rank deficient.
MaxEntResult maxent_estimate(std::span<const ExpectationConstraint> constraints, Index dim,
                             const MaxEntOptions& options = {});

/// maxent_estimate over the union of both parties' constraints.
MaxEntResult pool_classical(std::span<const ExpectationConstraint> a,
                            std::span<const ExpectationConstraint> b, Index dim,
                            const MaxEntOptions& options = {});

/// min sum_i |Tr[O_i rho] - o_i| over density matrices (an SDP).
double constraint_violation(std::span<const ExpectationConstraint> constraints, Index dim);

/// max t such that some feasible rho has rho >= t I (an SDP).
double max_min_eigenvalue(std::span<const ExpectationConstraint> constraints, Index dim);

/// Frobenius distance from log(state) to span{I, O_1, ..., O_n}.
double gibbs_residual(const DensityMatrix& state,
                      std::span<const ExpectationConstraint> constraints);

}  // namespace qcompat
