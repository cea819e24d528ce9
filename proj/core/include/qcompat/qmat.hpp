#pragma once

// Dense complex Hermitian linear algebra used throughout qcompat.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qcompat/errors.hpp"

namespace qcompat {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-8;
inline constexpr double kDefaultRankTol = 1e-9;
inline constexpr double kDensityTol = 1e-10;

/// Complex square matrix known to be Hermitian.
///
/// Construction symmetrizes the input as (H + H^dagger)/2 when the
/// anti-Hermitian part is within kHermitianTol of the norm, and throws
/// NonHermitian otherwise.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(const Matrix& m);

  static HermitianOperator identity(Index dim);
  static HermitianOperator zero(Index dim);

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b);
  friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b);
  friend HermitianOperator operator*(double s, const HermitianOperator& a);

 private:
  struct Trusted {};
  HermitianOperator(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

/// Unit-trace positive semidefinite operator.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  /// Validates trace and positivity against `tol`; throws ValidationError
  /// naming `label` with the measured deviation.
  explicit DensityMatrix(const HermitianOperator& op, double tol = kDensityTol,
                         const std::string& label = "state");
  explicit DensityMatrix(const Matrix& m, double tol = kDensityTol,
                         const std::string& label = "state");

  static DensityMatrix pure(const Vector& ket);
  static DensityMatrix diagonal(std::span<const double> probabilities);
  static DensityMatrix diagonal(std::initializer_list<double> probabilities);
  static DensityMatrix maximally_mixed(Index dim);
  /// (I + r.sigma)/2 for a Bloch vector with |r| <= 1.
  static DensityMatrix bloch(double rx, double ry, double rz);

  Index dim() const noexcept { return op_.dim(); }
  const HermitianOperator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }

 private:
  HermitianOperator op_;
};

struct Spectrum {
  RealVector values;  // ascending
  Matrix vectors;     // columns are orthonormal eigenvectors
};

struct SupportProjector {
  HermitianOperator op;
  Matrix basis;  // D x rank isometry spanning the support
  Index rank = 0;
};

/// Eigendecomposition with ascending eigenvalues. Eigenvector phases are fixed
/// so the largest-magnitude component is real positive; ties are ordered
/// lexicographically by eigenvector components.
Spectrum eig_hermitian(const HermitianOperator& h);
Spectrum eig_hermitian(const Matrix& h);

/// Max-abs anti-Hermitian deviation check used by the hermitization rule.
double anti_hermitian_deviation(const Matrix& m);
Matrix hermitian_part(const Matrix& m);

/// V f(Lambda) V^dagger.
Matrix apply_spectral(const Matrix& h, const std::function<double(double)>& f);

HermitianOperator matrix_abs(const HermitianOperator& h);
Matrix matrix_abs(const Matrix& h);

HermitianOperator matrix_exp(const HermitianOperator& h);
/// Throws SingularLog if any eigenvalue is <= 0.
HermitianOperator matrix_log(const HermitianOperator& p);

/// Pseudo-inverse square root on the support (eigenvalues above
/// rank_tol * lambda_max); zero on the null space.
Matrix pinv_sqrt(const Matrix& p, double rank_tol = kDefaultRankTol);
Matrix psd_sqrt(const Matrix& p);
/// Clips negative eigenvalues to zero.
Matrix psd_part(const Matrix& h);

double min_eigenvalue(const Matrix& h);
double max_eigenvalue(const Matrix& h);

/// Half the trace norm of a - b.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

SupportProjector support_projector(const DensityMatrix& rho, double rank_tol = kDefaultRankTol);
/// Support of a PSD operator that is not necessarily normalized.
SupportProjector support_of(const Matrix& psd, double rank_tol = kDefaultRankTol);
/// Orthonormal basis of the null space (complement of the support).
Matrix null_basis(const Matrix& psd, double rank_tol = kDefaultRankTol);

/// Dimension of the common support: D minus the rank of the stacked null-space bases.
Index supports_intersection_dim(std::span<const DensityMatrix> states,
                                double rank_tol = kDefaultRankTol);
/// Orthonormal basis (D x dim) of the common support.
Matrix supports_intersection_basis(std::span<const DensityMatrix> states,
                                   double rank_tol = kDefaultRankTol);

namespace pauli {
Matrix I();
Matrix X();
Matrix Y();
Matrix Z();
}  // namespace pauli

/// Re Tr[a b] for Hermitian a, b (the real Frobenius inner product).
double inner(const Matrix& a, const Matrix& b);

}  // namespace qcompat
