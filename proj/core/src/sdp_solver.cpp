// Primal-dual interior-point solver for the normal form in sdp.hpp.
//
// The normal-form problem is rewritten as the standard conic pair
//
//   (P)  min <C,W> + cu.u   s.t.  Acal(W) + F u = b,   W >= 0, u free
//   (D)  max b.y            s.t.  Acal*(y) + S = C,    F' y = cu, S >= 0
//
// where y holds the real coordinates of X, the cone blocks of S are the
// linear matrix inequalities {X_b >= 0} and {B_c - Phi_c(X) >= 0}, and the
// equality constraint blocks become the rows of F' y = cu. Then (D) is the
// normal-form primal and (P) its dual: W on an inequality block is Y_c, u on
// an equality block holds the coordinates of Y_c.
//
// Iterations follow the infeasible-start HKM direction with a Mehrotra
// predictor-corrector step.

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>

#include <json.hpp>

#include "qcompat/sdp.hpp"

namespace qcompat::sdp {

namespace {

struct Contribution {
  std::size_t cone;
  Matrix g;
};

struct StandardForm {
  struct Cone {
    Index n = 0;
    Matrix c;
  };
  std::vector<Cone> cones;
  std::vector<std::vector<Contribution>> g;  // per y coordinate
  RealVector b;
  Eigen::MatrixXd f;  // m x p
  RealVector cu;

  std::vector<Index> var_offset;
  std::vector<Index> var_dim;
  std::vector<std::ptrdiff_t> constraint_cone;
  std::vector<std::ptrdiff_t> constraint_eq_offset;
  Index total_cone_dim = 0;
};

BlockMatrix apply_single(const LinearMap& map, std::size_t in_block, const Matrix& x) {
  BlockMatrix out;
  for (auto d : map.output_dims()) {
    out.push_back(Matrix::Zero(static_cast<Index>(d), static_cast<Index>(d)));
  }
  for (const auto& term : map.terms()) {
    std::visit(
        [&](const auto& t) {
          if (t.input_block != in_block) return;
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, Congruence>) {
            const Matrix lxr = t.left * x * t.right.adjoint();
            out[t.output_block] += 0.5 * (lxr + lxr.adjoint());
          } else {
            out[t.output_block] += inner(t.input_weight, x) * t.output_weight;
          }
        },
        term);
  }
  return out;
}

StandardForm to_standard(const Problem& p) {
  StandardForm sf;
  const std::size_t nv = p.num_variable_blocks();
  const std::size_t nc = p.num_constraint_blocks();

  Index m = 0;
  for (std::size_t b = 0; b < nv; ++b) {
    const auto n = static_cast<Index>(p.map.input_dims()[b]);
    sf.var_offset.push_back(m);
    sf.var_dim.push_back(n);
    m += n * n;
  }

  std::vector<std::ptrdiff_t> var_cone(nv, -1);
  for (std::size_t b = 0; b < nv; ++b) {
    if (p.variable_kinds[b] == VariableKind::Psd) {
      var_cone[b] = static_cast<std::ptrdiff_t>(sf.cones.size());
      sf.cones.push_back({sf.var_dim[b], Matrix::Zero(sf.var_dim[b], sf.var_dim[b])});
    }
  }
  Index peq = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    const auto n = static_cast<Index>(p.map.output_dims()[c]);
    if (p.constraint_kinds[c] == ConstraintKind::LessEqual) {
      sf.constraint_cone.push_back(static_cast<std::ptrdiff_t>(sf.cones.size()));
      sf.constraint_eq_offset.push_back(-1);
      sf.cones.push_back({n, hermitian_part(p.bound[c])});
    } else {
      sf.constraint_cone.push_back(-1);
      sf.constraint_eq_offset.push_back(peq);
      peq += n * n;
    }
  }
  for (const auto& cone : sf.cones) sf.total_cone_dim += cone.n;

  sf.g.resize(static_cast<std::size_t>(m));
  sf.b.resize(m);
  sf.f = Eigen::MatrixXd::Zero(m, peq);
  sf.cu.resize(peq);
  for (std::size_t c = 0; c < nc; ++c) {
    if (sf.constraint_eq_offset[c] >= 0) {
      const RealVector coords = hermitian_coords(p.bound[c]);
      sf.cu.segment(sf.constraint_eq_offset[c], coords.size()) = coords;
    }
  }

  for (std::size_t b = 0; b < nv; ++b) {
    const Index n = sf.var_dim[b];
    for (Index k = 0; k < n * n; ++k) {
      const Index j = sf.var_offset[b] + k;
      const Matrix e = hermitian_basis_element(n, k);
      sf.b(j) = inner(p.objective[b], e);
      auto& contribs = sf.g[static_cast<std::size_t>(j)];
      if (var_cone[b] >= 0) contribs.push_back({static_cast<std::size_t>(var_cone[b]), -e});
      const BlockMatrix phi = apply_single(p.map, b, e);
      for (std::size_t c = 0; c < nc; ++c) {
        if (phi[c].cwiseAbs().maxCoeff() == 0.0) continue;
        if (sf.constraint_cone[c] >= 0) {
          contribs.push_back({static_cast<std::size_t>(sf.constraint_cone[c]), phi[c]});
        } else {
          const RealVector coords = hermitian_coords(phi[c]);
          sf.f.row(j).segment(sf.constraint_eq_offset[c], coords.size()) = coords.transpose();
        }
      }
    }
  }
  return sf;
}

// Largest alpha with x + alpha dx >= 0 (infinity if unbounded).
double max_step(const Matrix& x, const Matrix& dx) {
  if (x.rows() == 1) {
    const double d = dx(0, 0).real();
    return d < 0.0 ? -x(0, 0).real() / d : std::numeric_limits<double>::infinity();
  }
  if (x.rows() == 2) {
    // smallest root of det(dx - mu x) = a mu^2 - b mu + c
    const double x00 = x(0, 0).real(), x11 = x(1, 1).real();
    const double d00 = dx(0, 0).real(), d11 = dx(1, 1).real();
    const double a = x00 * x11 - std::norm(x(0, 1));
    if (!(a > 0.0) || !(x00 > 0.0)) return 0.0;
    const double b = x00 * d11 + x11 * d00 - 2.0 * (dx(0, 1) * std::conj(x(0, 1))).real();
    const double c = d00 * d11 - std::norm(dx(0, 1));
    const double root = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
    const double q = 0.5 * (b + std::copysign(root, b));
    double lmin = std::numeric_limits<double>::infinity();
    if (q != 0.0) lmin = std::min(q / a, c / q);
    else lmin = 0.0;
    return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
  }
  Eigen::LLT<Matrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix linv_dx = llt.matrixL().solve(dx);
  const Matrix t = llt.matrixL().solve(linv_dx.adjoint()).adjoint();
  const double lmin = min_eigenvalue(hermitian_part(t));
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

Matrix hpd_inverse(const Matrix& s) {
  if (s.rows() == 1) return Matrix::Constant(1, 1, 1.0 / s(0, 0).real());
  if (s.rows() == 2) {
    const double det = s(0, 0).real() * s(1, 1).real() - std::norm(s(0, 1));
    Matrix inv(2, 2);
    inv(0, 0) = s(1, 1).real() / det;
    inv(1, 1) = s(0, 0).real() / det;
    inv(0, 1) = -s(0, 1) / det;
    inv(1, 0) = std::conj(inv(0, 1));
    return inv;
  }
  Eigen::LLT<Matrix> llt(s);
  Matrix inv = llt.solve(Matrix::Identity(s.rows(), s.cols()));
  return hermitian_part(inv);
}

double max_abs(const RealVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

class Tracer {
 public:
  Tracer() {
    if (const char* path = std::getenv("QCOMPAT_SDP_TRACE"); path != nullptr && *path != '\0') {
      out_.emplace(path, std::ios::app);
    }
  }
  bool enabled() const { return out_.has_value() && out_->good(); }
  void write(const nlohmann::json& line) {
    if (enabled()) *out_ << line.dump() << '\n';
  }

 private:
  std::optional<std::ofstream> out_;
};

}  // namespace

Solution solve(const Problem& p, const SolverOptions& options) {
  p.validate();
  const StandardForm sf = to_standard(p);
  const auto m = static_cast<Index>(sf.g.size());
  const Index np = sf.cu.size();
  const std::size_t ncones = sf.cones.size();
  const double n_total = std::max<double>(1.0, static_cast<double>(sf.total_cone_dim));

  // Starting point scaled from the data, in the style of SDPT3.
  double norm_c = 0.0;
  for (const auto& cone : sf.cones) norm_c = std::max(norm_c, cone.c.norm());
  double xi = std::max(10.0, std::sqrt(n_total));
  double eta = std::max({10.0, std::sqrt(n_total), norm_c});
  for (Index j = 0; j < m; ++j) {
    double gnorm = 0.0;
    for (const auto& ct : sf.g[static_cast<std::size_t>(j)]) gnorm += ct.g.squaredNorm();
    gnorm = std::sqrt(gnorm);
    xi = std::max(xi, n_total * (1.0 + std::abs(sf.b(j))) / (1.0 + gnorm));
    eta = std::max(eta, gnorm);
  }
  if (np > 0) eta = std::max(eta, max_abs(sf.cu));

  BlockMatrix w(ncones), s(ncones);
  for (std::size_t k = 0; k < ncones; ++k) {
    w[k] = xi * Matrix::Identity(sf.cones[k].n, sf.cones[k].n);
    s[k] = eta * Matrix::Identity(sf.cones[k].n, sf.cones[k].n);
  }
  RealVector y = RealVector::Zero(m);
  RealVector u = RealVector::Zero(np);

  Solution sol;
  sol.initialization = "infeasible-start primal-dual; W0 = " + std::to_string(xi) +
                       " I, S0 = " + std::to_string(eta) + " I";

  Tracer tracer;
  const double norm_b = max_abs(sf.b);
  const double norm_cu = max_abs(sf.cu);

  auto acal_adj = [&](const RealVector& v) {
    BlockMatrix out(ncones);
    for (std::size_t k = 0; k < ncones; ++k) out[k] = Matrix::Zero(sf.cones[k].n, sf.cones[k].n);
    for (Index j = 0; j < m; ++j) {
      if (v(j) == 0.0) continue;
      for (const auto& ct : sf.g[static_cast<std::size_t>(j)]) out[ct.cone] += v(j) * ct.g;
    }
    return out;
  };
  auto acal = [&](const BlockMatrix& z) {
    RealVector out = RealVector::Zero(m);
    for (Index j = 0; j < m; ++j) {
      for (const auto& ct : sf.g[static_cast<std::size_t>(j)]) out(j) += inner(ct.g, z[ct.cone]);
    }
    return out;
  };

  bool finished = false;
  double last_ap = 0.0, last_ad = 0.0, last_sigma = 0.0;
  for (int it = 0; it <= options.max_iter; ++it) {
    const BlockMatrix aty = acal_adj(y);
    BlockMatrix rd(ncones);
    double rd_norm = 0.0;
    double pobj = np > 0 ? sf.cu.dot(u) : 0.0;
    double mu = 0.0;
    for (std::size_t k = 0; k < ncones; ++k) {
      rd[k] = sf.cones[k].c - aty[k] - s[k];
      rd_norm = std::max(rd_norm, rd[k].cwiseAbs().maxCoeff());
      pobj += inner(sf.cones[k].c, w[k]);
      mu += inner(w[k], s[k]);
    }
    mu /= n_total;
    const RealVector aw_fu = acal(w) + (np > 0 ? RealVector(sf.f * u) : RealVector::Zero(m));
    const RealVector rp = sf.b - aw_fu;
    const RealVector rf = np > 0 ? RealVector(sf.cu - sf.f.transpose() * y) : RealVector();
    const double dobj = sf.b.dot(y);

    const double pinf = max_abs(rp) / (1.0 + norm_b);
    const double dinf = std::max(rd_norm / (1.0 + norm_c), max_abs(rf) / (1.0 + norm_cu));
    const double gap = pobj - dobj;
    sol.iterations = it;

    if (tracer.enabled()) {
      tracer.write({{"problem", p.name}, {"iter", it}, {"mu", mu}, {"primal_obj", dobj},
                    {"dual_obj", pobj}, {"primal_inf", dinf}, {"dual_inf", pinf},
                    {"step_primal", last_ad}, {"step_dual", last_ap}, {"sigma", last_sigma}});
    }

    if (std::abs(gap) <= options.tol * std::max(1.0, std::abs(dobj)) && pinf <= options.tol &&
        dinf <= options.tol) {
      sol.status = Status::Optimal;
      finished = true;
      break;
    }
    // Normal-form primal infeasible: (P) unbounded along a W ray.
    if (pobj < 0.0 && max_abs(aw_fu) <= 1e-8 * -pobj && -pobj > 1e6) {
      sol.status = Status::Infeasible;
      BlockMatrix ray(p.num_constraint_blocks());
      for (std::size_t c = 0; c < p.num_constraint_blocks(); ++c) {
        const auto n = static_cast<Index>(p.map.output_dims()[c]);
        if (sf.constraint_cone[c] >= 0) {
          ray[c] = w[static_cast<std::size_t>(sf.constraint_cone[c])] / -pobj;
        } else {
          ray[c] = from_hermitian_coords(u.segment(sf.constraint_eq_offset[c], n * n), n) / -pobj;
        }
      }
      sol.ray = std::move(ray);
      finished = true;
      break;
    }
    // Normal-form primal unbounded: (D) improving ray in y.
    if (dobj > 1e6) {
      double cr = 0.0;
      for (std::size_t k = 0; k < ncones; ++k) {
        cr = std::max(cr, (sf.cones[k].c - rd[k]).cwiseAbs().maxCoeff());
      }
      if (np > 0) cr = std::max(cr, max_abs(sf.cu - rf));
      if (cr <= 1e-8 * dobj) {
        sol.status = Status::Unbounded;
        for (std::size_t b = 0; b < p.num_variable_blocks(); ++b) {
          const Index n = sf.var_dim[b];
          sol.ray.push_back(from_hermitian_coords(y.segment(sf.var_offset[b], n * n), n) / dobj);
        }
        finished = true;
        break;
      }
    }
    if (it == options.max_iter) break;

    // Schur complement M_ij = sum_k Re Tr[G_i W G_j S^-1].
    BlockMatrix sinv(ncones);
    for (std::size_t k = 0; k < ncones; ++k) sinv[k] = hpd_inverse(s[k]);
    std::vector<std::vector<Matrix>> wgs(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
      for (const auto& ct : sf.g[static_cast<std::size_t>(j)]) {
        wgs[static_cast<std::size_t>(j)].push_back(w[ct.cone] * ct.g * sinv[ct.cone]);
      }
    }
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
      const auto& gi = sf.g[static_cast<std::size_t>(i)];
      for (Index j = i; j < m; ++j) {
        const auto& gj = sf.g[static_cast<std::size_t>(j)];
        double acc = 0.0;
        for (const auto& a : gi) {
          for (std::size_t q = 0; q < gj.size(); ++q) {
            if (gj[q].cone == a.cone) acc += inner(a.g, wgs[static_cast<std::size_t>(j)][q]);
          }
        }
        schur(i, j) = acc;
        schur(j, i) = acc;
      }
    }

    std::function<RealVector(const RealVector&)> solve_kkt;
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
    if (np == 0) {
      llt.compute(schur);
      if (llt.info() == Eigen::Success) {
        solve_kkt = [&](const RealVector& r) { return RealVector(llt.solve(r)); };
      } else {
        lu.compute(schur);
        solve_kkt = [&](const RealVector& r) { return RealVector(lu.solve(r)); };
      }
    } else {
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + np, m + np);
      kkt.topLeftCorner(m, m) = schur;
      kkt.topRightCorner(m, np) = sf.f;
      kkt.bottomLeftCorner(np, m) = sf.f.transpose();
      lu.compute(kkt);
      solve_kkt = [&](const RealVector& r) { return RealVector(lu.solve(r)); };
    }

    struct Direction {
      RealVector dy, du;
      BlockMatrix dw, ds;
    };
    auto direction = [&](double target, const BlockMatrix* corr) {
      BlockMatrix base(ncones);  // target S^-1 - W - (W Rd + corr) S^-1
      for (std::size_t k = 0; k < ncones; ++k) {
        Matrix t = w[k] * rd[k];
        if (corr != nullptr) t += (*corr)[k];
        base[k] = target * sinv[k] - w[k] - t * sinv[k];
      }
      RealVector rhs(m + np);
      rhs.head(m) = rp - acal(base);
      if (np > 0) rhs.tail(np) = rf;
      const RealVector sol_kkt = solve_kkt(rhs);
      Direction d;
      d.dy = sol_kkt.head(m);
      d.du = np > 0 ? RealVector(sol_kkt.tail(np)) : RealVector();
      const BlockMatrix ady = acal_adj(d.dy);
      d.ds.resize(ncones);
      d.dw.resize(ncones);
      for (std::size_t k = 0; k < ncones; ++k) {
        d.ds[k] = rd[k] - ady[k];
        d.dw[k] = hermitian_part(base[k] + w[k] * ady[k] * sinv[k]);
      }
      return d;
    };
    auto step_lengths = [&](const Direction& d) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = ap;
      for (std::size_t k = 0; k < ncones; ++k) {
        ap = std::min(ap, max_step(w[k], d.dw[k]));
        ad = std::min(ad, max_step(s[k], d.ds[k]));
      }
      return std::pair{ap, ad};
    };

    const Direction pred = direction(0.0, nullptr);
    auto [ap_aff, ad_aff] = step_lengths(pred);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < ncones; ++k) {
      mu_aff += inner(w[k] + ap_aff * pred.dw[k], s[k] + ad_aff * pred.ds[k]);
    }
    mu_aff /= n_total;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    BlockMatrix corr(ncones);
    for (std::size_t k = 0; k < ncones; ++k) corr[k] = pred.dw[k] * pred.ds[k];
    const Direction d = direction(sigma * mu, &corr);
    auto [ap, ad] = step_lengths(d);
    const double gamma = 0.9 + 0.09 * std::min({1.0, ap_aff, ad_aff});
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    last_ap = ap;
    last_ad = ad;
    last_sigma = sigma;
    for (std::size_t k = 0; k < ncones; ++k) {
      w[k] += ap * d.dw[k];
      s[k] += ad * d.ds[k];
    }
    if (np > 0) u += ap * d.du;
    y += ad * d.dy;
  }
  (void)finished;

  // Map back to the normal form.
  for (std::size_t b = 0; b < p.num_variable_blocks(); ++b) {
    const Index n = sf.var_dim[b];
    sol.primal.push_back(from_hermitian_coords(y.segment(sf.var_offset[b], n * n), n));
  }
  for (std::size_t c = 0; c < p.num_constraint_blocks(); ++c) {
    const auto n = static_cast<Index>(p.map.output_dims()[c]);
    if (sf.constraint_cone[c] >= 0) {
      sol.dual.push_back(w[static_cast<std::size_t>(sf.constraint_cone[c])]);
    } else {
      sol.dual.push_back(from_hermitian_coords(u.segment(sf.constraint_eq_offset[c], n * n), n));
    }
  }
  sol.primal_value = block_inner(p.objective, sol.primal);
  sol.dual_value = block_inner(p.bound, sol.dual);
  sol.gap = sol.dual_value - sol.primal_value;
  const Residuals r = feasibility_residuals(p, sol.primal, sol.dual);
  sol.primal_residual = r.primal;
  sol.dual_residual = r.dual;
  return sol;
}

}  // namespace qcompat::sdp
