#pragma once

// The two qubit experiments as theta-parameterized curves.
//
// fig1: rho_A = (I + o O)/2 with O = cos(theta/2) Z + sin(theta/2) X and
// o = r_x sin(theta/2) + r_z cos(theta/2); rho_B = (I + r_x X)/2, for a pure
// state with Bloch vector r.
//
// fig2: projective A-measurement on cos(theta/2)|0> + sin(theta/2)|1>,
// B-measurement on |+>, |->, performed in an unknown order.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "qcompat/qmat.hpp"

namespace qcompat::scenarios {

using Bloch = std::array<double, 3>;

/// E[sqrt(r_x^2 + r_z^2)] over the uniform sphere is pi/4.
inline constexpr double kSphereMeanCoefficient = 0.39269908169872414;  // pi/8
inline constexpr double kThirdCoefficient = 1.0 / 3.0;

/// `steps` evenly spaced points on [0, pi], endpoints included.
std::vector<double> theta_grid(int steps);

/// Deterministic across platforms: uniform phi and uniform cos(polar angle)
/// from 53-bit mantissas of a mt19937_64 stream.
class SphereSampler {
 public:
  explicit SphereSampler(std::uint64_t seed);
  Bloch next();

 private:
  double uniform();
  std::mt19937_64 engine_;
};

struct Fig1Point {
  double theta = 0.0;
  Bloch bloch_r{};
  DensityMatrix rho_a;
  DensityMatrix rho_b;
  double k_value = 0.0;        // BFM SDP
  double formula_value = 0.0;  // 1 - cos(theta/2) sqrt(r_x^2 + r_z^2) / 2
  double upper_bound = 0.0;    // 1 - D(rho_A, rho_B)
  double gap = 0.0;
  bool bound_attained = false;  // (rho_A + rho_B - |rho_A - rho_B|)/2 is PSD
};

Fig1Point fig1_point(double theta, const Bloch& r, double tol = 1e-8);

struct Fig1Average {
  double theta = 0.0;
  int samples = 0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double third_formula = 0.0;    // 1 - cos(theta/2)/3
  double sphere_formula = 0.0;   // 1 - (pi/8) cos(theta/2), the mean of formula_value
  int attained = 0;
  int discrepant = 0;            // samples whose candidate R is not PSD
  double max_attained_error = 0.0;  // max |k_value - formula_value| over attained samples
  double max_bound_excess = 0.0;  // max(k_value - upper_bound)
  double max_gap = 0.0;
};

/// samples >= 1000. Sums per-sample values in draw order.
Fig1Average fig1_average(double theta, int samples, std::uint64_t seed, double tol = 1e-8);

/// One Fig1Average per grid point, each drawn from the same seed.
std::vector<Fig1Average> fig1_curve(int theta_steps, int samples, std::uint64_t seed,
                                    double tol = 1e-8);

struct Fig2Point {
  double theta = 0.0;
  std::array<DensityMatrix, 2> rho_a;  // conditional on A outcome i
  std::array<DensityMatrix, 2> rho_b;  // conditional on B outcome j
  std::array<std::array<double, 2>, 2> k_pairs{};
  std::array<std::array<double, 2>, 2> probs{};  // normalized to sum 1
  double k_avg = 0.0;
  double max_gap = 0.0;
};

Fig2Point fig2_point(double theta, double tol = 1e-8);
std::vector<Fig2Point> fig2_curve(int theta_steps, double tol = 1e-8);

}  // namespace qcompat::scenarios
