#include <cmath>

#include "qcompat/sdp.hpp"

namespace qcompat::sdp {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Off-diagonal pair (j, l), j < l, for the k-th off-diagonal slot.
std::pair<Index, Index> pair_of(Index n, Index slot) {
  for (Index j = 0; j < n; ++j) {
    const Index row = n - 1 - j;
    if (slot < row) return {j, j + 1 + slot};
    slot -= row;
  }
  return {0, 0};
}

}  // namespace

Matrix hermitian_basis_element(Index n, Index k) {
  Matrix e = Matrix::Zero(n, n);
  if (k < n) {
    e(k, k) = 1.0;
    return e;
  }
  const Index off = k - n;
  const Index npairs = n * (n - 1) / 2;
  const auto [j, l] = pair_of(n, off % npairs);
  if (off < npairs) {
    e(j, l) = kInvSqrt2;
    e(l, j) = kInvSqrt2;
  } else {
    e(j, l) = Complex(0.0, kInvSqrt2);
    e(l, j) = Complex(0.0, -kInvSqrt2);
  }
  return e;
}

RealVector hermitian_coords(const Matrix& h) {
  const Index n = h.rows();
  RealVector c(n * n);
  for (Index j = 0; j < n; ++j) c(j) = h(j, j).real();
  const Index npairs = n * (n - 1) / 2;
  Index slot = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index l = j + 1; l < n; ++l, ++slot) {
      const Complex v = 0.5 * (h(j, l) + std::conj(h(l, j)));
      c(n + slot) = std::sqrt(2.0) * v.real();
      c(n + npairs + slot) = std::sqrt(2.0) * v.imag();
    }
  }
  return c;
}

Matrix from_hermitian_coords(const RealVector& c, Index n) {
  Matrix h = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) h(j, j) = c(j);
  const Index npairs = n * (n - 1) / 2;
  Index slot = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index l = j + 1; l < n; ++l, ++slot) {
      const Complex v(c(n + slot) * kInvSqrt2, c(n + npairs + slot) * kInvSqrt2);
      h(j, l) = v;
      h(l, j) = std::conj(v);
    }
  }
  return h;
}

double block_inner(const BlockMatrix& a, const BlockMatrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]);
  return s;
}

// ---------------------------------------------------------------------------
// LinearMap

LinearMap::LinearMap(std::vector<std::size_t> input_dims, std::vector<std::size_t> output_dims)
    : in_dims_(std::move(input_dims)), out_dims_(std::move(output_dims)) {}

void LinearMap::add(Term term) {
  std::visit(
      [this](const auto& t) {
        if (t.input_block >= in_dims_.size() || t.output_block >= out_dims_.size()) {
          throw DimensionMismatch("linear map term references a missing block");
        }
        const auto n = static_cast<Index>(in_dims_[t.input_block]);
        const auto m = static_cast<Index>(out_dims_[t.output_block]);
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Congruence>) {
          if (t.left.rows() != m || t.left.cols() != n || t.right.rows() != m ||
              t.right.cols() != n) {
            throw DimensionMismatch("congruence term has wrong coefficient shape");
          }
        } else {
          if (t.input_weight.rows() != n || t.input_weight.cols() != n ||
              t.output_weight.rows() != m || t.output_weight.cols() != m) {
            throw DimensionMismatch("trace-pairing term has wrong weight shape");
          }
          if (anti_hermitian_deviation(t.input_weight) > 1e-12 ||
              anti_hermitian_deviation(t.output_weight) > 1e-12) {
            throw NonHermitian(std::max(anti_hermitian_deviation(t.input_weight),
                                        anti_hermitian_deviation(t.output_weight)),
                               1.0);
          }
        }
      },
      term);
  terms_.push_back(std::move(term));
}

void LinearMap::add_conjugation(std::size_t in, std::size_t out, Matrix k) {
  Matrix r = k;
  add(Congruence{in, out, std::move(k), std::move(r)});
}

void LinearMap::add_trace_pairing(std::size_t in, std::size_t out, Matrix g, Matrix h) {
  add(TracePairing{in, out, std::move(g), std::move(h)});
}

BlockMatrix LinearMap::apply(const BlockMatrix& x) const {
  if (x.size() != in_dims_.size()) throw DimensionMismatch("linear map: wrong number of blocks");
  BlockMatrix out;
  out.reserve(out_dims_.size());
  for (auto d : out_dims_) {
    out.push_back(Matrix::Zero(static_cast<Index>(d), static_cast<Index>(d)));
  }
  for (const auto& term : terms_) {
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          const Matrix& xin = x[t.input_block];
          Matrix& o = out[t.output_block];
          if constexpr (std::is_same_v<T, Congruence>) {
            const Matrix lxr = t.left * xin * t.right.adjoint();
            o += 0.5 * (lxr + lxr.adjoint());
          } else {
            o += inner(t.input_weight, xin) * t.output_weight;
          }
        },
        term);
  }
  return out;
}

LinearMap LinearMap::adjoint() const {
  LinearMap adj(out_dims_, in_dims_);
  for (const auto& term : terms_) {
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, Congruence>) {
            // Tr[Y (L X R' + R X L')/2] = Tr[X (L' Y R + R' Y L)/2]
            adj.terms_.push_back(Congruence{t.output_block, t.input_block, t.left.adjoint(),
                                            t.right.adjoint()});
          } else {
            adj.terms_.push_back(
                TracePairing{t.output_block, t.input_block, t.output_weight, t.input_weight});
          }
        },
        term);
  }
  return adj;
}

LinearMap LinearMap::negated() const {
  LinearMap neg(in_dims_, out_dims_);
  for (const auto& term : terms_) {
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, Congruence>) {
            neg.terms_.push_back(Congruence{t.input_block, t.output_block, -t.left, t.right});
          } else {
            neg.terms_.push_back(
                TracePairing{t.input_block, t.output_block, t.input_weight, -t.output_weight});
          }
        },
        term);
  }
  return neg;
}

// ---------------------------------------------------------------------------
// Problem

void Problem::validate() const {
  if (objective.size() != variable_kinds.size() ||
      map.input_dims().size() != variable_kinds.size()) {
    throw DimensionMismatch(name + ": variable block count mismatch");
  }
  if (bound.size() != constraint_kinds.size() ||
      map.output_dims().size() != constraint_kinds.size()) {
    throw DimensionMismatch(name + ": constraint block count mismatch");
  }
  for (std::size_t i = 0; i < objective.size(); ++i) {
    const auto d = static_cast<Index>(map.input_dims()[i]);
    if (objective[i].rows() != d || objective[i].cols() != d) {
      throw DimensionMismatch(name + ": objective block " + std::to_string(i) + " has wrong size");
    }
    HermitianOperator check(objective[i]);
  }
  for (std::size_t i = 0; i < bound.size(); ++i) {
    const auto d = static_cast<Index>(map.output_dims()[i]);
    if (bound[i].rows() != d || bound[i].cols() != d) {
      throw DimensionMismatch(name + ": bound block " + std::to_string(i) + " has wrong size");
    }
    HermitianOperator check(bound[i]);
  }
}

Problem dualize(const Problem& p) {
  p.validate();
  Problem d;
  d.name = "dual(" + p.name + ")";
  d.negated = !p.negated;
  d.map = p.map.adjoint().negated();
  for (const auto& b : p.bound) d.objective.push_back(-b);
  for (const auto& a : p.objective) d.bound.push_back(-a);
  for (auto k : p.constraint_kinds) {
    d.variable_kinds.push_back(k == ConstraintKind::LessEqual ? VariableKind::Psd
                                                              : VariableKind::Free);
  }
  for (auto k : p.variable_kinds) {
    d.constraint_kinds.push_back(k == VariableKind::Psd ? ConstraintKind::LessEqual
                                                        : ConstraintKind::Equal);
  }
  return d;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal:
      return "Optimal";
    case Status::Infeasible:
      return "Infeasible";
    case Status::Unbounded:
      return "Unbounded";
    case Status::NumericalLimit:
      return "NumericalLimit";
  }
  return "?";
}

Residuals feasibility_residuals(const Problem& p, const BlockMatrix& x, const BlockMatrix& y) {
  Residuals r;
  const BlockMatrix phix = p.map.apply(x);
  for (std::size_t c = 0; c < p.bound.size(); ++c) {
    const Matrix diff = phix[c] - p.bound[c];
    const double v = p.constraint_kinds[c] == ConstraintKind::LessEqual
                         ? std::max(0.0, max_eigenvalue(diff))
                         : diff.cwiseAbs().maxCoeff();
    r.primal = std::max(r.primal, v);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (p.variable_kinds[i] == VariableKind::Psd) {
      r.primal = std::max(r.primal, std::max(0.0, -min_eigenvalue(x[i])));
    }
  }
  const BlockMatrix phiy = p.map.adjoint().apply(y);
  for (std::size_t i = 0; i < p.objective.size(); ++i) {
    const Matrix diff = p.objective[i] - phiy[i];
    const double v = p.variable_kinds[i] == VariableKind::Psd
                         ? std::max(0.0, max_eigenvalue(diff))
                         : diff.cwiseAbs().maxCoeff();
    r.dual = std::max(r.dual, v);
  }
  for (std::size_t c = 0; c < y.size(); ++c) {
    if (p.constraint_kinds[c] == ConstraintKind::LessEqual) {
      r.dual = std::max(r.dual, std::max(0.0, -min_eigenvalue(y[c])));
    }
  }
  return r;
}

}  // namespace qcompat::sdp
