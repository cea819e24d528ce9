#include "qcompat/compat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qcompat {

StateSet::StateSet(std::vector<DensityMatrix> states, std::vector<std::string> labels)
    : states_(std::move(states)), labels_(std::move(labels)) {
  if (states_.size() < 2) {
    throw DimensionMismatch("a state set needs at least two states, got " +
                            std::to_string(states_.size()));
  }
  for (const auto& s : states_) {
    if (s.dim() != states_.front().dim()) {
      throw DimensionMismatch("all states in a set must share one dimension");
    }
  }
  if (labels_.empty()) {
    for (std::size_t i = 0; i < states_.size(); ++i) labels_.push_back("rho_" + std::to_string(i + 1));
  }
  if (labels_.size() != states_.size()) {
    throw DimensionMismatch("label count does not match state count");
  }
}

Matrix StateSet::total() const {
  Matrix sum = Matrix::Zero(dim(), dim());
  for (const auto& s : states_) sum += s.matrix();
  return sum;
}

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::BFM:
      return "BFM";
    case Criterion::PP:
      return "PP";
    case Criterion::ES:
      return "ES";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// problem builders

namespace {

sdp::Problem below_all_states(const StateSet& s, sdp::VariableKind kind, std::string name) {
  const auto d = static_cast<std::size_t>(s.dim());
  sdp::Problem p;
  p.name = std::move(name);
  p.map = sdp::LinearMap({d}, std::vector<std::size_t>(s.size(), d));
  p.objective = {Matrix::Identity(s.dim(), s.dim())};
  p.variable_kinds = {kind};
  for (std::size_t i = 0; i < s.size(); ++i) {
    p.map.add_conjugation(0, i, Matrix::Identity(s.dim(), s.dim()));
    p.bound.push_back(s[i].matrix());
    p.constraint_kinds.push_back(sdp::ConstraintKind::LessEqual);
  }
  return p;
}

CompatibilityReport report_from(Criterion criterion, const sdp::Solution& sol, double tol) {
  CompatibilityReport r;
  r.criterion = criterion;
  r.raw_value = sol.primal_value;
  r.value = std::max(0.0, sol.primal_value);
  r.dual_value = sol.dual_value;
  r.gap = sol.gap;
  r.status = sol.status;
  r.primal_residual = sol.primal_residual;
  r.dual_residual = sol.dual_residual;
  r.iterations = sol.iterations;
  r.tol = tol;
  return r;
}

void require_optimal(const sdp::Solution& sol, const std::string& what) {
  if (sol.status != sdp::Status::Optimal) {
    throw SolverError(what + ": solver stopped with status " + sdp::to_string(sol.status) +
                      " after " + std::to_string(sol.iterations) + " iterations (gap " +
                      std::to_string(sol.gap) + ")");
  }
}

void attach_pair_bound(const StateSet& s, CompatibilityReport& r) {
  if (s.size() != 2) return;
  const PairBound b = bfm_pair_upper_bound(s[0], s[1]);
  r.upper_bound_trace_distance = b.value;
  r.bound_attained = b.attained;
}

}  // namespace

namespace {

// Feasible R live on the common support V, and R <= rho_i only constrains
// the support U_i of rho_i. Restricting to those faces gives both the
// program and its dual strictly feasible points whenever V is nontrivial.
struct BfmFace {
  Matrix v;               // D x r, common support
  std::vector<Matrix> u;  // D x r_i, support of rho_i
  std::vector<Matrix> z;  // D x (D - r_i), null space of rho_i; filled when reduced
  bool reduced = false;   // some rho_i is rank deficient
};

BfmFace bfm_face(const StateSet& s, double rank_tol) {
  BfmFace f;
  for (const auto& rho : s.states()) {
    f.u.push_back(support_projector(rho, rank_tol).basis);
    f.reduced = f.reduced || f.u.back().cols() < s.dim();
  }
  if (f.reduced) {
    for (const auto& rho : s.states()) f.z.push_back(null_basis(rho.matrix(), rank_tol));
    f.v = supports_intersection_basis(s.states(), rank_tol);
  } else {
    f.v = Matrix::Identity(s.dim(), s.dim());
  }
  return f;
}

sdp::Problem bfm_on_face(const StateSet& s, const BfmFace& f) {
  if (!f.reduced || f.v.cols() == 0) return below_all_states(s, sdp::VariableKind::Psd, "k_bfm");
  const auto r = static_cast<std::size_t>(f.v.cols());
  std::vector<std::size_t> outs;
  for (const auto& u : f.u) outs.push_back(static_cast<std::size_t>(u.cols()));
  sdp::Problem p;
  p.name = "k_bfm";
  p.map = sdp::LinearMap({r}, outs);
  p.objective = {Matrix::Identity(f.v.cols(), f.v.cols())};
  p.variable_kinds = {sdp::VariableKind::Psd};
  for (std::size_t i = 0; i < s.size(); ++i) {
    p.map.add_conjugation(0, i, f.u[i].adjoint() * f.v);
    p.bound.push_back(hermitian_part(f.u[i].adjoint() * s[i].matrix() * f.u[i]));
    p.constraint_kinds.push_back(sdp::ConstraintKind::LessEqual);
  }
  return p;
}

struct LiftedCertificate {
  std::vector<Matrix> m;
  double value = 0.0;  // sum_i Tr[rho_i M_i]
};

// Absolute dual-value budget spent on making the reduced certificate
// strictly feasible on V before lifting.
constexpr double kLiftBudget = 5e-8;

// M_i = s U_i M'_i U_i^dagger + t Z_i Z_i^dagger. The null-space term costs
// nothing against rho_i, and with s chosen so that sum M_i > I strictly on V a
// finite t gives sum M_i >= I on the whole space. When the unreduced dual is
// not attained, t grows like 1 / kLiftBudget.
LiftedCertificate lift_bfm_certificate(const StateSet& st, const BfmFace& f,
                                       const std::vector<Matrix>& compressed) {
  const Index d = f.v.rows();
  const std::size_t k = f.u.size();
  const Matrix id = Matrix::Identity(d, d);
  Matrix lifted_sum = Matrix::Zero(d, d);
  Matrix null_sum = Matrix::Zero(d, d);
  double reduced_value = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    lifted_sum += f.u[i] * compressed[i] * f.u[i].adjoint();
    null_sum += f.z[i] * f.z[i].adjoint();
    reduced_value += inner(Matrix(f.u[i].adjoint() * st[i].matrix() * f.u[i]), compressed[i]);
  }
  double scale = 1.0;
  if (f.v.cols() > 0) {
    const double floor = min_eigenvalue(hermitian_part(f.v.adjoint() * lifted_sum * f.v));
    const double slack = std::min(1e-3, kLiftBudget / std::max(reduced_value, 1e-3));
    scale = (1.0 + slack) / std::max(floor, 1e-300);
  }
  const Matrix z = f.v.cols() == 0 ? id : null_basis(Matrix(f.v * f.v.adjoint()), 0.5);
  const Matrix e = hermitian_part(scale * lifted_sum - id);
  Matrix need = -hermitian_part(z.adjoint() * e * z);
  if (f.v.cols() > 0) {
    const Matrix evv = hermitian_part(f.v.adjoint() * e * f.v);
    const Matrix ewv = z.adjoint() * e * f.v;
    need += hermitian_part(ewv * evv.llt().solve(Matrix(ewv.adjoint())));
  }
  const Matrix pw_isqrt = pinv_sqrt(hermitian_part(z.adjoint() * null_sum * z), 0.0);
  const double t =
      std::max(0.0, max_eigenvalue(hermitian_part(pw_isqrt * need * pw_isqrt))) * (1.0 + 1e-6);

  LiftedCertificate out;
  out.value = scale * reduced_value;
  for (std::size_t i = 0; i < k; ++i) {
    out.m.push_back(hermitian_part(scale * f.u[i] * compressed[i] * f.u[i].adjoint() +
                                   t * f.z[i] * f.z[i].adjoint()));
    out.value += t * (f.z[i].adjoint() * st[i].matrix() * f.z[i]).trace().real();
  }
  return out;
}

}  // namespace

sdp::Problem bfm_problem(const StateSet& s, double rank_tol) {
  return bfm_on_face(s, bfm_face(s, rank_tol));
}

sdp::Problem pp_problem(const StateSet& s) {
  return below_all_states(s, sdp::VariableKind::Free, "k_pp");
}

sdp::Problem es_problem(const StateSet& s, const Matrix& support) {
  const Matrix total = support.adjoint() * s.total() * support;
  const auto r = static_cast<std::size_t>(support.cols());
  sdp::Problem p;
  p.name = "k_es";
  p.map = sdp::LinearMap({1}, std::vector<std::size_t>(s.size(), r));
  p.objective = {Matrix::Identity(1, 1)};
  p.variable_kinds = {sdp::VariableKind::Psd};
  for (std::size_t i = 0; i < s.size(); ++i) {
    p.map.add_trace_pairing(0, i, Matrix::Identity(1, 1), hermitian_part(total));
    p.bound.push_back(hermitian_part(support.adjoint() * s[i].matrix() * support));
    p.constraint_kinds.push_back(sdp::ConstraintKind::LessEqual);
  }
  return p;
}

sdp::Problem es_diagonal_problem(const StateSet& s) {
  const Index d = s.dim();
  const auto du = static_cast<std::size_t>(d);
  const Matrix total = s.total();
  // Variable: one (D+1) block diag(lambda, lambda_1..lambda_D); only its
  // diagonal enters the objective and constraints.
  std::vector<std::size_t> outs(du, 1);
  outs.insert(outs.end(), s.size(), du);
  sdp::Problem p;
  p.name = "k_es_diagonal";
  p.map = sdp::LinearMap({du + 1}, outs);
  Matrix a = Matrix::Zero(d + 1, d + 1);
  a(0, 0) = 1.0;
  p.objective = {a};
  p.variable_kinds = {sdp::VariableKind::Psd};
  for (Index i = 0; i < d; ++i) {
    // lambda - lambda_i <= 0
    Matrix g = Matrix::Zero(d + 1, d + 1);
    g(0, 0) = 1.0;
    g(i + 1, i + 1) = -1.0;
    p.map.add_trace_pairing(0, static_cast<std::size_t>(i), g, Matrix::Identity(1, 1));
    p.bound.push_back(Matrix::Zero(1, 1));
    p.constraint_kinds.push_back(sdp::ConstraintKind::LessEqual);
  }
  for (std::size_t m = 0; m < s.size(); ++m) {
    for (Index i = 0; i < d; ++i) {
      Matrix g = Matrix::Zero(d + 1, d + 1);
      g(i + 1, i + 1) = 1.0;
      Matrix e = Matrix::Zero(d, d);
      e(i, i) = 1.0;
      p.map.add_trace_pairing(0, du + m, g, hermitian_part(e * total));
    }
    p.bound.push_back(s[m].matrix());
    p.constraint_kinds.push_back(sdp::ConstraintKind::LessEqual);
  }
  return p;
}

// ---------------------------------------------------------------------------
// measures

CompatibilityReport k_bfm(const StateSet& s, double tol, double rank_tol) {
  const BfmFace face = bfm_face(s, rank_tol);
  if (face.v.cols() == 0) {
    // Disjoint supports: R = 0, certified by the null-space projectors alone.
    CompatibilityReport r;
    r.criterion = Criterion::BFM;
    r.tol = tol;
    r.primal_witness = Matrix::Zero(s.dim(), s.dim());
    std::vector<Matrix> zeros;
    for (const auto& u : face.u) zeros.push_back(Matrix::Zero(u.cols(), u.cols()));
    LiftedCertificate cert = lift_bfm_certificate(s, face, zeros);
    r.dual_certificate = std::move(cert.m);
    r.dual_value = cert.value;
    r.gap = r.dual_value;
    attach_pair_bound(s, r);
    return r;
  }
  const sdp::Problem p = bfm_on_face(s, face);
  const sdp::Solution sol = sdp::solve(p, {tol, 200});
  require_optimal(sol, "k_bfm");
  CompatibilityReport r = report_from(Criterion::BFM, sol, tol);
  if (!face.reduced) {
    r.primal_witness = sol.primal[0];
    r.dual_certificate = sol.dual;
  } else {
    r.primal_witness = hermitian_part(face.v * sol.primal[0] * face.v.adjoint());
    LiftedCertificate cert = lift_bfm_certificate(s, face, sol.dual);
    r.dual_certificate = std::move(cert.m);
    r.dual_value = cert.value;
    r.gap = r.dual_value - sol.primal_value;
  }
  attach_pair_bound(s, r);
  return r;
}

CompatibilityReport k_pp(const StateSet& s, double tol) {
  const sdp::Problem p = pp_problem(s);
  const sdp::Solution sol = sdp::solve(p, {tol, 200});
  require_optimal(sol, "k_pp");
  CompatibilityReport r = report_from(Criterion::PP, sol, tol);
  r.primal_witness = sol.primal[0];
  r.dual_certificate = sol.dual;
  attach_pair_bound(s, r);
  return r;
}

CompatibilityReport k_es(const StateSet& s, double tol, double rank_tol) {
  const Matrix total = s.total();
  const SupportProjector supp = support_of(total, rank_tol);
  const Matrix& v = supp.basis;

  // A state whose support is strictly smaller than supp(S) forces lambda = 0.
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Matrix compressed = hermitian_part(v.adjoint() * s[i].matrix() * v);
    const Matrix nulls = null_basis(compressed, rank_tol);
    if (nulls.cols() == 0) continue;
    CompatibilityReport r;
    r.criterion = Criterion::ES;
    r.tol = tol;
    r.primal_witness = Matrix::Zero(1, 1);
    const Matrix lifted = v * nulls * nulls.adjoint() * v.adjoint();
    const double scale = inner(total, lifted);
    for (std::size_t j = 0; j < s.size(); ++j) {
      r.dual_certificate.push_back(j == i ? Matrix(lifted / scale)
                                          : Matrix(Matrix::Zero(s.dim(), s.dim())));
    }
    r.dual_value = inner(s[i].matrix(), r.dual_certificate[i]);
    r.gap = r.dual_value;
    const Matrix sm = total * r.dual_certificate[i];
    for (Index k = 0; k < s.dim(); ++k) r.alphas.push_back(sm(k, k).real());
    return r;
  }

  const sdp::Problem p = es_problem(s, v);
  const sdp::Solution sol = sdp::solve(p, {tol, 200});
  require_optimal(sol, "k_es");
  CompatibilityReport r = report_from(Criterion::ES, sol, tol);
  r.primal_witness = sol.primal[0];
  Matrix msum = Matrix::Zero(s.dim(), s.dim());
  for (const auto& m : sol.dual) {
    r.dual_certificate.push_back(v * m * v.adjoint());
    msum += r.dual_certificate.back();
  }
  const Matrix sm = total * msum;
  for (Index k = 0; k < s.dim(); ++k) r.alphas.push_back(sm(k, k).real());
  return r;
}

// ---------------------------------------------------------------------------
// closed forms and oracles

PairBound bfm_pair_upper_bound(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("bfm_pair_upper_bound: dimensions differ");
  PairBound out;
  const Matrix diff = a.matrix() - b.matrix();
  out.value = 1.0 - trace_distance(a, b);
  out.candidate = hermitian_part(0.5 * (a.matrix() + b.matrix() - matrix_abs(diff)));
  out.attained = min_eigenvalue(out.candidate) >= -1e-10;
  return out;
}

double oracle_bfm_commuting(const StateSet& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const Matrix c = s[i].matrix() * s[j].matrix() - s[j].matrix() * s[i].matrix();
      const double norm = c.norm();
      if (norm > 1e-9) {
        throw NotCommuting("states " + s.labels()[i] + " and " + s.labels()[j] +
                           " do not commute (||[a,b]|| = " + std::to_string(norm) + ")");
      }
    }
  }
  // A generic combination has a simple spectrum on every joint eigenspace
  // where the states differ, so its eigenbasis diagonalizes them all.
  Matrix combo = Matrix::Zero(s.dim(), s.dim());
  for (std::size_t i = 0; i < s.size(); ++i) {
    combo += std::sqrt(2.0 + static_cast<double>(i)) * s[i].matrix();
  }
  const Spectrum sp = eig_hermitian(combo);
  double total = 0.0;
  for (Index d = 0; d < s.dim(); ++d) {
    const Vector v = sp.vectors.col(d);
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& rho : s.states()) lo = std::min(lo, (v.adjoint() * rho.matrix() * v)(0).real());
    total += lo;
  }
  return total;
}

double oracle_pp_pair(const DensityMatrix& a, const DensityMatrix& b) {
  return 1.0 - trace_distance(a, b);
}

double oracle_es(const StateSet& s, double rank_tol) {
  const Matrix total = s.total();
  const SupportProjector supp = support_of(total, rank_tol);
  const Matrix& v = supp.basis;
  const Matrix st = hermitian_part(v.adjoint() * total * v);
  const Matrix inv_sqrt = pinv_sqrt(st, 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rho : s.states()) {
    const Matrix compressed = hermitian_part(v.adjoint() * rho.matrix() * v);
    if (support_of(compressed, rank_tol).rank != supp.rank) return 0.0;
    best = std::min(best, min_eigenvalue(inv_sqrt * compressed * inv_sqrt));
  }
  return std::max(0.0, best);
}

bool is_compatible(const StateSet& s, double rank_tol) {
  return supports_intersection_dim(s.states(), rank_tol) > 0;
}

}  // namespace qcompat
