#include "qcompat/qmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace qcompat {

// ---------------------------------------------------------------------------
// errors

namespace {
std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}
}  // namespace

NonHermitian::NonHermitian(double deviation, double norm)
    : Error("operator is not Hermitian: anti-Hermitian deviation " + format_double(deviation) +
            " exceeds tolerance relative to norm " + format_double(norm)),
      deviation_(deviation) {}

SingularLog::SingularLog(double min_eigenvalue)
    : Error("matrix logarithm of a non positive-definite operator (min eigenvalue " +
            format_double(min_eigenvalue) + ")"),
      min_eigenvalue_(min_eigenvalue) {}

ValidationError::ValidationError(std::string label, std::string invariant, double measured)
    : Error("validation failed for '" + label + "': " + invariant + " (measured " +
            format_double(measured) + ")"),
      label_(std::move(label)),
      invariant_(std::move(invariant)),
      measured_(measured) {}

// ---------------------------------------------------------------------------
// HermitianOperator

double anti_hermitian_deviation(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (0.5 * (m - m.adjoint())).cwiseAbs().maxCoeff();
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

HermitianOperator::HermitianOperator(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("Hermitian operator must be square, got " + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()));
  }
  const double dev = anti_hermitian_deviation(m);
  const double norm = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  if (dev > kHermitianTol * std::max(norm, 1e-300) && dev > 0.0) {
    throw NonHermitian(dev, norm);
  }
  m_ = hermitian_part(m);
}

HermitianOperator HermitianOperator::identity(Index dim) {
  return HermitianOperator(Matrix::Identity(dim, dim), Trusted{});
}

HermitianOperator HermitianOperator::zero(Index dim) {
  return HermitianOperator(Matrix::Zero(dim, dim), Trusted{});
}

HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("operator dimensions differ");
  return HermitianOperator(a.m_ + b.m_, HermitianOperator::Trusted{});
}

HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("operator dimensions differ");
  return HermitianOperator(a.m_ - b.m_, HermitianOperator::Trusted{});
}

HermitianOperator operator*(double s, const HermitianOperator& a) {
  return HermitianOperator(s * a.m_, HermitianOperator::Trusted{});
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(const HermitianOperator& op, double tol, const std::string& label)
    : op_(op) {
  if (op.dim() == 0) throw ValidationError(label, "dimension must be positive", 0.0);
  const double tr = op.trace();
  if (std::abs(tr - 1.0) > tol) throw ValidationError(label, "trace must equal 1", tr);
  const double lmin = min_eigenvalue(op.matrix());
  if (lmin < -tol) throw ValidationError(label, "matrix must be positive semidefinite", lmin);
}

DensityMatrix::DensityMatrix(const Matrix& m, double tol, const std::string& label)
    : DensityMatrix(HermitianOperator(m), tol, label) {}

DensityMatrix DensityMatrix::pure(const Vector& ket) {
  const Vector v = ket / ket.norm();
  return DensityMatrix(Matrix(v * v.adjoint()));
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> probabilities) {
  Matrix m = Matrix::Zero(static_cast<Index>(probabilities.size()),
                          static_cast<Index>(probabilities.size()));
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    m(static_cast<Index>(i), static_cast<Index>(i)) = probabilities[i];
  }
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::diagonal(std::initializer_list<double> probabilities) {
  return diagonal(std::span<const double>(probabilities.begin(), probabilities.size()));
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  return DensityMatrix(Matrix(Matrix::Identity(dim, dim) / static_cast<double>(dim)));
}

DensityMatrix DensityMatrix::bloch(double rx, double ry, double rz) {
  return DensityMatrix(
      Matrix(0.5 * (pauli::I() + rx * pauli::X() + ry * pauli::Y() + rz * pauli::Z())));
}

// ---------------------------------------------------------------------------
// spectra

namespace {

bool lex_less(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

void fix_phase(Eigen::Ref<Vector> v) {
  Index best = 0;
  double best_abs = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    // strict comparison with a small margin keeps the earliest near-maximal entry
    const double a = std::abs(v(i));
    if (a > best_abs * (1.0 + 1e-12)) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs > 0.0) v *= std::conj(v(best)) / best_abs;
}

}  // namespace

Spectrum eig_hermitian(const Matrix& h) {
  const Index n = h.rows();
  Spectrum out;
  if (n == 0) return out;
  if (n == 1) {
    out.values = RealVector::Constant(1, h(0, 0).real());
    out.vectors = Matrix::Identity(1, 1);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
  RealVector vals = es.eigenvalues();
  Matrix vecs = es.eigenvectors();
  for (Index j = 0; j < n; ++j) fix_phase(vecs.col(j));

  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (std::abs(vals(a) - vals(b)) > 1e-12 * scale) return vals(a) < vals(b);
    return lex_less(vecs.col(a), vecs.col(b));
  });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    out.values(j) = vals(order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = vecs.col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

Spectrum eig_hermitian(const HermitianOperator& h) { return eig_hermitian(h.matrix()); }

Matrix apply_spectral(const Matrix& h, const std::function<double(double)>& f) {
  if (h.rows() == 0) return h;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
  RealVector fv = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix matrix_abs(const Matrix& h) {
  return apply_spectral(h, [](double x) { return std::abs(x); });
}

HermitianOperator matrix_abs(const HermitianOperator& h) {
  return HermitianOperator(matrix_abs(h.matrix()));
}

HermitianOperator matrix_exp(const HermitianOperator& h) {
  return HermitianOperator(apply_spectral(h.matrix(), [](double x) { return std::exp(x); }));
}

HermitianOperator matrix_log(const HermitianOperator& p) {
  const double lmin = min_eigenvalue(p.matrix());
  if (!(lmin > 0.0)) throw SingularLog(lmin);
  return HermitianOperator(apply_spectral(p.matrix(), [](double x) { return std::log(x); }));
}

Matrix pinv_sqrt(const Matrix& p, double rank_tol) {
  if (p.rows() == 0) return p;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(p));
  const double cut = rank_tol * std::max(es.eigenvalues().maxCoeff(), 0.0);
  RealVector fv = es.eigenvalues().unaryExpr(
      [cut](double x) { return x > cut && x > 0.0 ? 1.0 / std::sqrt(x) : 0.0; });
  return es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix psd_sqrt(const Matrix& p) {
  return apply_spectral(p, [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

Matrix psd_part(const Matrix& h) {
  return apply_spectral(h, [](double x) { return x > 0.0 ? x : 0.0; });
}

namespace {

// Eigenvalues of the Hermitian part of a 2x2 matrix, ascending.
std::pair<double, double> eigenvalues_2x2(const Matrix& h) {
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  const Complex b = 0.5 * (h(0, 1) + std::conj(h(1, 0)));
  const double mean = 0.5 * (a + d);
  const double r = std::hypot(0.5 * (a - d), std::abs(b));
  return {mean - r, mean + r};
}

}  // namespace

double min_eigenvalue(const Matrix& h) {
  if (h.rows() == 0) return 0.0;
  if (h.rows() == 1) return h(0, 0).real();
  if (h.rows() == 2) return eigenvalues_2x2(h).first;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Matrix& h) {
  if (h.rows() == 0) return 0.0;
  if (h.rows() == 1) return h(0, 0).real();
  if (h.rows() == 2) return eigenvalues_2x2(h).second;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(h.rows() - 1);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("trace_distance: dimensions differ");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a.matrix() - b.matrix()),
                                           Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// supports

SupportProjector support_of(const Matrix& psd, double rank_tol) {
  const Spectrum sp = eig_hermitian(psd);
  const Index n = psd.rows();
  const double cut = rank_tol * std::max(sp.values.maxCoeff(), 0.0);
  std::vector<Index> keep;
  for (Index j = 0; j < n; ++j) {
    if (sp.values(j) > cut && sp.values(j) > 0.0) keep.push_back(j);
  }
  SupportProjector out;
  out.rank = static_cast<Index>(keep.size());
  out.basis.resize(n, out.rank);
  for (Index j = 0; j < out.rank; ++j) out.basis.col(j) = sp.vectors.col(keep[static_cast<std::size_t>(j)]);
  out.op = HermitianOperator(Matrix(out.basis * out.basis.adjoint()));
  return out;
}

SupportProjector support_projector(const DensityMatrix& rho, double rank_tol) {
  return support_of(rho.matrix(), rank_tol);
}

Matrix null_basis(const Matrix& psd, double rank_tol) {
  const Spectrum sp = eig_hermitian(psd);
  const Index n = psd.rows();
  const double cut = rank_tol * std::max(sp.values.maxCoeff(), 0.0);
  std::vector<Index> keep;
  for (Index j = 0; j < n; ++j) {
    if (!(sp.values(j) > cut && sp.values(j) > 0.0)) keep.push_back(j);
  }
  Matrix out(n, static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Index>(j)) = sp.vectors.col(keep[j]);
  return out;
}

namespace {

Matrix stacked_null_space(std::span<const DensityMatrix> states, double rank_tol) {
  if (states.empty()) throw DimensionMismatch("supports_intersection: empty state list");
  const Index d = states.front().dim();
  std::vector<Matrix> parts;
  Index cols = 0;
  for (const auto& s : states) {
    if (s.dim() != d) throw DimensionMismatch("supports_intersection: dimensions differ");
    parts.push_back(null_basis(s.matrix(), rank_tol));
    cols += parts.back().cols();
  }
  Matrix stacked(d, cols);
  Index at = 0;
  for (const auto& p : parts) {
    stacked.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return stacked;
}

// Columns of an orthonormal basis of span(stacked).
Matrix span_basis(const Matrix& stacked) {
  const Index d = stacked.rows();
  if (stacked.cols() == 0) return Matrix(d, 0);
  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  // null-space columns are orthonormal, so singular values are O(1) or O(eps)
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-7) ++r;
  }
  return svd.matrixU().leftCols(r);
}

}  // namespace

Index supports_intersection_dim(std::span<const DensityMatrix> states, double rank_tol) {
  const Matrix stacked = stacked_null_space(states, rank_tol);
  return states.front().dim() - span_basis(stacked).cols();
}

Matrix supports_intersection_basis(std::span<const DensityMatrix> states, double rank_tol) {
  const Index d = states.front().dim();
  const Matrix nulls = span_basis(stacked_null_space(states, rank_tol));
  if (nulls.cols() == 0) return Matrix::Identity(d, d);
  Eigen::JacobiSVD<Matrix> svd(nulls, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(d - nulls.cols());
}

// ---------------------------------------------------------------------------

namespace pauli {
Matrix I() { return Matrix::Identity(2, 2); }
Matrix X() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Matrix Y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
Matrix Z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

double inner(const Matrix& a, const Matrix& b) {
  // Re Tr[a b] = Re sum_ij a_ij b_ji
  return (a.array() * b.transpose().array()).sum().real();
}

}  // namespace qcompat
