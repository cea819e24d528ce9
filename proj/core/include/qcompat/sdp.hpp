#pragma once

// Block-structured semidefinite programs in the normal form
//
//   maximize   Tr[A X]
//   subject to Phi(X) <= B   (or = B, per constraint block)
//              X >= 0        (or X free Hermitian, per variable block)
//
// with dual
//
//   minimize   Tr[B Y]
//   subject to Phi*(Y) >= A  (= A on free variable blocks)
//              Y >= 0        (Y free on equality blocks)
//
// X, Y, A and B are block diagonal; every block is a complex Hermitian
// matrix (1x1 blocks are real scalars).

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "qcompat/qmat.hpp"

namespace qcompat::sdp {

using BlockMatrix = std::vector<Matrix>;

/// out += (L X R^dagger + R X L^dagger) / 2
struct Congruence {
  std::size_t input_block = 0;
  std::size_t output_block = 0;
  Matrix left;   // out_dim x in_dim
  Matrix right;  // out_dim x in_dim
};

/// out += Tr[G X] H. With G = E_jj this is a diagonal selector.
struct TracePairing {
  std::size_t input_block = 0;
  std::size_t output_block = 0;
  Matrix input_weight;   // G, in_dim x in_dim Hermitian
  Matrix output_weight;  // H, out_dim x out_dim Hermitian
};

using Term = std::variant<Congruence, TracePairing>;

/// Hermiticity-preserving linear map between block-diagonal spaces, given as
/// a finite sum of terms.
class LinearMap {
 public:
  LinearMap() = default;
  LinearMap(std::vector<std::size_t> input_dims, std::vector<std::size_t> output_dims);

  void add(Term term);
  /// Shorthand for Congruence with L = R = K, i.e. K X K^dagger.
  void add_conjugation(std::size_t in, std::size_t out, Matrix k);
  void add_trace_pairing(std::size_t in, std::size_t out, Matrix g, Matrix h);

  const std::vector<std::size_t>& input_dims() const noexcept { return in_dims_; }
  const std::vector<std::size_t>& output_dims() const noexcept { return out_dims_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }

  BlockMatrix apply(const BlockMatrix& x) const;
  /// The map Phi* with Tr[Y Phi(X)] = Tr[X Phi*(Y)].
  LinearMap adjoint() const;
  LinearMap negated() const;

 private:
  std::vector<std::size_t> in_dims_;
  std::vector<std::size_t> out_dims_;
  std::vector<Term> terms_;
};

enum class VariableKind { Psd, Free };
enum class ConstraintKind { LessEqual, Equal };

struct Problem {
  std::string name;
  BlockMatrix objective;  // A, per variable block
  BlockMatrix bound;      // B, per constraint block
  LinearMap map;          // Phi
  std::vector<VariableKind> variable_kinds;
  std::vector<ConstraintKind> constraint_kinds;
  /// True when this normal form is the negation of a minimization; the
  /// original-sense optimum is then minus the normal-form optimum.
  bool negated = false;

  std::size_t num_variable_blocks() const { return variable_kinds.size(); }
  std::size_t num_constraint_blocks() const { return constraint_kinds.size(); }

  /// Throws DimensionMismatch / NonHermitian on inconsistent data.
  void validate() const;
  /// Objective value in the original sense (undoes the dualization sign).
  double original_sense(double normal_form_value) const {
    return negated ? -normal_form_value : normal_form_value;
  }
};

/// The dual problem expressed in the same normal form:
/// maximize Tr[-B Y] s.t. -Phi*(Y) <= -A (Psd X blocks) or = -A (free X
/// blocks), Y >= 0 on inequality blocks and free on equality blocks.
Problem dualize(const Problem& p);

enum class Status { Optimal, Infeasible, Unbounded, NumericalLimit };
const char* to_string(Status s);

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

struct Solution {
  Status status = Status::NumericalLimit;
  BlockMatrix primal;  // X
  BlockMatrix dual;    // Y
  double primal_value = 0.0;  // Tr[A X]
  double dual_value = 0.0;    // Tr[B Y]
  double gap = 0.0;           // dual_value - primal_value
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  std::string initialization;
  /// Farkas-type evidence when status is Infeasible (a Y ray) or Unbounded
  /// (an X ray); empty otherwise.
  BlockMatrix ray;
};

Solution solve(const Problem& p, const SolverOptions& options = {});

struct Residuals {
  double primal = 0.0;  // max violation of Phi(X) <= B (or =) and X >= 0
  double dual = 0.0;    // max violation of Phi*(Y) >= A (or =) and Y >= 0
};

/// Recomputes feasibility residuals of a candidate pair from scratch.
Residuals feasibility_residuals(const Problem& p, const BlockMatrix& x, const BlockMatrix& y);

double block_inner(const BlockMatrix& a, const BlockMatrix& b);

/// Orthonormal (real Frobenius) basis of n x n Hermitian matrices; there are n^2 elements.
Matrix hermitian_basis_element(Index n, Index k);
RealVector hermitian_coords(const Matrix& h);
Matrix from_hermitian_coords(const RealVector& c, Index n);

}  // namespace qcompat::sdp
