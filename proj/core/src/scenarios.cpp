#include "qcompat/scenarios.hpp"

#include <cmath>
#include <numbers>

#include "qcompat/compat.hpp"

namespace qcompat::scenarios {

std::vector<double> theta_grid(int steps) {
  if (steps < 2) {
    throw ValidationError("theta_steps", "at least two grid points", static_cast<double>(steps));
  }
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    grid[static_cast<std::size_t>(i)] = std::numbers::pi * i / (steps - 1);
  }
  grid.back() = std::numbers::pi;
  return grid;
}

SphereSampler::SphereSampler(std::uint64_t seed) : engine_(seed) {}

double SphereSampler::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

Bloch SphereSampler::next() {
  const double phi = 2.0 * std::numbers::pi * uniform();
  const double z = 2.0 * uniform() - 1.0;
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {rho * std::cos(phi), rho * std::sin(phi), z};
}

Fig1Point fig1_point(double theta, const Bloch& r, double tol) {
  const double s = std::sin(theta / 2.0);
  const double c = std::cos(theta / 2.0);
  const double o = r[0] * s + r[2] * c;
  Fig1Point p;
  p.theta = theta;
  p.bloch_r = r;
  p.rho_a = DensityMatrix::bloch(o * s, 0.0, o * c);
  p.rho_b = DensityMatrix::bloch(r[0], 0.0, 0.0);
  const CompatibilityReport k = k_bfm(StateSet({p.rho_a, p.rho_b}), tol);
  p.k_value = k.value;
  p.gap = k.gap;
  p.upper_bound = k.upper_bound_trace_distance.value_or(1.0);
  p.formula_value = 1.0 - 0.5 * c * std::sqrt(r[0] * r[0] + r[2] * r[2]);
  p.bound_attained = k.bound_attained.value_or(false);
  return p;
}

Fig1Average fig1_average(double theta, int samples, std::uint64_t seed, double tol) {
  if (samples < 1000) {
    throw ValidationError("samples", "at least 1000 Monte Carlo samples",
                          static_cast<double>(samples));
  }
  Fig1Average out;
  out.theta = theta;
  out.samples = samples;
  SphereSampler sampler(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Fig1Point p = fig1_point(theta, sampler.next(), tol);
    sum += p.k_value;
    sum_sq += p.k_value * p.k_value;
    if (p.bound_attained) {
      ++out.attained;
      out.max_attained_error = std::max(out.max_attained_error, std::abs(p.k_value - p.formula_value));
    } else {
      ++out.discrepant;
    }
    out.max_bound_excess = std::max(out.max_bound_excess, p.k_value - p.upper_bound);
    out.max_gap = std::max(out.max_gap, p.gap);
  }
  const double n = static_cast<double>(samples);
  out.mc_mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * out.mc_mean * out.mc_mean) / (n - 1.0));
  out.mc_stderr = std::sqrt(var / n);
  const double c = std::cos(theta / 2.0);
  out.third_formula = 1.0 - kThirdCoefficient * c;
  out.sphere_formula = 1.0 - kSphereMeanCoefficient * c;
  return out;
}

std::vector<Fig1Average> fig1_curve(int theta_steps, int samples, std::uint64_t seed,
                                    double tol) {
  std::vector<Fig1Average> curve;
  for (double theta : theta_grid(theta_steps)) {
    curve.push_back(fig1_average(theta, samples, seed, tol));
  }
  return curve;
}

Fig2Point fig2_point(double theta, double tol) {
  Vector psi0(2), psi1(2), plus(2), minus(2);
  psi0 << std::cos(theta / 2.0), std::sin(theta / 2.0);
  psi1 << -std::sin(theta / 2.0), std::cos(theta / 2.0);
  const double h = std::sqrt(0.5);
  plus << h, h;
  minus << h, -h;
  const std::array<Matrix, 2> a{psi0 * psi0.adjoint(), psi1 * psi1.adjoint()};
  const std::array<Matrix, 2> b{plus * plus.adjoint(), minus * minus.adjoint()};

  Fig2Point p;
  p.theta = theta;
  for (int i = 0; i < 2; ++i) {
    Matrix ra = Matrix::Zero(2, 2);
    Matrix rb = Matrix::Zero(2, 2);
    for (int j = 0; j < 2; ++j) {
      // either order with equal weight
      ra += 0.5 * (b[j] * a[i] * b[j] + a[i] * b[j] * a[i]);
      rb += 0.5 * (a[j] * b[i] * a[j] + b[i] * a[j] * b[i]);
    }
    p.rho_a[i] = DensityMatrix(hermitian_part(ra), kDensityTol, "rho_A^" + std::to_string(i));
    p.rho_b[i] = DensityMatrix(hermitian_part(rb), kDensityTol, "rho_B^" + std::to_string(i));
  }
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const Matrix ab = a[i] * b[j];
      p.probs[i][j] = 2.0 * ab.trace().real();
      total += p.probs[i][j];
    }
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      p.probs[i][j] /= total;
      const CompatibilityReport k = k_bfm(StateSet({p.rho_a[i], p.rho_b[j]}), tol);
      p.k_pairs[i][j] = k.value;
      p.max_gap = std::max(p.max_gap, k.gap);
      p.k_avg += p.probs[i][j] * k.value;
    }
  }
  return p;
}

std::vector<Fig2Point> fig2_curve(int theta_steps, double tol) {
  std::vector<Fig2Point> curve;
  for (double theta : theta_grid(theta_steps)) curve.push_back(fig2_point(theta, tol));
  return curve;
}

}  // namespace qcompat::scenarios
