#pragma once

// Pooling two state assignments through the joint measurement
// {E00, E01, E10, E11} whose (0,0) outcome is as likely as possible.
//
//   E00 = cR,  E01 = c a - E00,  E10 = c b - E00,  E11 = I - c(a + b - R)
//
// R is the BFM maximizer for (a, b) and rho_AB = R / Tr R.

#include <cstdint>

#include "qcompat/compat.hpp"
#include "qcompat/qmat.hpp"

namespace qcompat {

struct PoolingResult {
  DensityMatrix a;
  DensityMatrix b;
  DensityMatrix joint_state;
  /// Largest c with E11 >= 0, i.e. 1 / lambda_max(a + b - R).
  double c = 0.0;
  /// 2 / lambda_max(a + b + |a - b|); equals c whenever R attains 1 - D(a, b).
  double c_closed_form = 0.0;
  bool closed_form_agrees = false;
  Matrix R;
  Matrix E00, E01, E10, E11;
  double p00 = 0.0;      // Tr E00 / D
  double k_value = 0.0;  // Tr R
  /// dim(supp E01 intersect supp E10); the construction expects 0.
  Index e01_e10_overlap = 0;
  double gap = 0.0;
  double tol = 0.0;
  double rank_tol = 0.0;
};

/// Throws Incompatible when K(a, b) vanishes.
PoolingResult pool_measurement(const DensityMatrix& a, const DensityMatrix& b,
                               double tol = kDefaultSdpTol, double rank_tol = kDefaultRankTol);

struct MaximalityReport {
  int trials = 0;
  int feasible = 0;    // perturbed R' = R + P still below a and b
  int violations = 0;  // feasible and Tr R' > Tr R + 1e-7
  double max_feasible_gain = 0.0;
  std::uint64_t seed = 0;
};

/// Probes R with random PSD perturbations P (Tr P in [1e-6, 1e-2]).
MaximalityReport verify_r_maximality(const PoolingResult& result, int trials,
                                     std::uint64_t seed);

}  // namespace qcompat
