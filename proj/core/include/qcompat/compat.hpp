#pragma once

// Compatibility measures for a set of state assignments.
//
//   K_BFM = max Tr R   s.t. 0 <= R <= rho_i
//   K_PP  = max Tr N   s.t. N <= rho_i, N Hermitian
//   K_ES  = max lambda s.t. lambda * sum_j rho_j <= rho_i, lambda >= 0
//
// Each measure is solved as an SDP and reported together with its dual
// certificate, which upper-bounds the value by weak duality.

#include <optional>
#include <string>
#include <vector>

#include "qcompat/qmat.hpp"
#include "qcompat/sdp.hpp"

namespace qcompat {

class StateSet {
 public:
  StateSet() = default;
  /// Requires at least two states of equal dimension; labels default to rho_1..rho_k.
  explicit StateSet(std::vector<DensityMatrix> states, std::vector<std::string> labels = {});

  std::size_t size() const noexcept { return states_.size(); }
  Index dim() const noexcept { return states_.front().dim(); }
  const std::vector<DensityMatrix>& states() const noexcept { return states_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const DensityMatrix& operator[](std::size_t i) const { return states_[i]; }
  /// Sum of all states.
  Matrix total() const;

 private:
  std::vector<DensityMatrix> states_;
  std::vector<std::string> labels_;
};

enum class Criterion { BFM, PP, ES };
const char* to_string(Criterion c);

struct CompatibilityReport {
  Criterion criterion = Criterion::BFM;
  double value = 0.0;      // clamped to [0, inf)
  double raw_value = 0.0;  // solver primal value before clamping
  double dual_value = 0.0;
  double gap = 0.0;
  Matrix primal_witness;                // R, N, or lambda as 1x1
  std::vector<Matrix> dual_certificate;  // M_i
  std::vector<double> alphas;           // ES only, see k_es
  std::optional<double> upper_bound_trace_distance;  // pairs only (BFM, PP)
  std::optional<bool> bound_attained;
  sdp::Status status = sdp::Status::Optimal;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double tol = 1e-8;
};

inline constexpr double kDefaultSdpTol = 1e-8;

/// Normal-form SDPs behind each measure, exposed for dualization checks.
/// R is restricted to the common support and each constraint to supp(rho_i);
/// with every state full rank this is the plain D x D program, and with
/// disjoint supports it falls back to that too.
sdp::Problem bfm_problem(const StateSet& s, double rank_tol = kDefaultRankTol);
sdp::Problem pp_problem(const StateSet& s);
/// Direct scalar form on the support of sum_j rho_j (`support` is the D x r
/// isometry used for compression; identity when the sum is full rank).
sdp::Problem es_problem(const StateSet& s, const Matrix& support);
/// The (D+1)-variable normal form with per-coordinate multipliers
/// lambda_1..lambda_D tied to lambda by lambda <= lambda_i. Its map uses the
/// Hermitian part of diag(lambda_i) * S. This program relaxes the direct
/// form: its optimum is >= K_ES, with equality when sum_j rho_j is diagonal.
sdp::Problem es_diagonal_problem(const StateSet& s);

/// The certificate satisfies sum_i M_i >= I on the whole space. When some
/// state is rank deficient it is lifted from the reduced program, adding at
/// most 5e-8 to the dual value; its norm then scales like 1/5e-8 whenever the
/// unreduced dual has no optimal point.
CompatibilityReport k_bfm(const StateSet& s, double tol = kDefaultSdpTol,
                          double rank_tol = kDefaultRankTol);
CompatibilityReport k_pp(const StateSet& s, double tol = kDefaultSdpTol);
/// Returns exactly 0 with a closed-form certificate when supports differ.
/// alphas holds Re diag(S * sum_i M_i), whose sum is Tr[S sum_i M_i] >= 1.
CompatibilityReport k_es(const StateSet& s, double tol = kDefaultSdpTol,
                         double rank_tol = kDefaultRankTol);

struct PairBound {
  double value = 0.0;       // 1 - D(a, b)
  bool attained = false;    // (a + b - |a - b|)/2 is PSD
  Matrix candidate;         // (a + b - |a - b|)/2
};

PairBound bfm_pair_upper_bound(const DensityMatrix& a, const DensityMatrix& b);

/// Sum over a joint eigenbasis of min_i p_i(d). Throws NotCommuting unless
/// every pair satisfies ||[rho_i, rho_j]|| <= 1e-9.
double oracle_bfm_commuting(const StateSet& s);
/// 1 - D(a, b).
double oracle_pp_pair(const DensityMatrix& a, const DensityMatrix& b);
/// 0 if supports differ, else min_i lambda_min(S^-1/2 rho_i S^-1/2) on supp(S).
double oracle_es(const StateSet& s, double rank_tol = kDefaultRankTol);

bool is_compatible(const StateSet& s, double rank_tol = kDefaultRankTol);

}  // namespace qcompat
