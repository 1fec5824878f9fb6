#pragma once

#include <functional>
#include <vector>

#include "heights/pathops.hpp"
#include "heights/reflected_bm.hpp"
#include "heights/stats.hpp"

// The level-indexed local-time field Z_r = L_r(T_x) of a stopped path, the
// occupation-time functional, and the change-of-drift reweighting identity
// that links the theta = 0 field to the drifted one.
namespace heights::field {

struct LocalTimeField {
  double x = 0.0;               // initial mass (local-time stopping level)
  std::vector<double> levels;   // increasing levels in [0, a]
  std::vector<double> z;        // estimated Z at each level
  double epsilon = 0.0;         // band width used (reported for bias audits)
};

// z[i] = band_local_time(stopped, levels[i], eps, end); level 0 uses the
// exact lower-boundary regulator instead of a band.
LocalTimeField ray_knight_field(const rbm::GridPath& stopped, double x,
                                std::vector<double> levels, double eps);

// dt * sum g(value(s)) over the stopped path: the functional
// int_0^{T_x} g(H_s) ds. g == 1 recovers T_x exactly.
double occupation_integral(const rbm::GridPath& stopped,
                           const std::function<double(double)>& g);

struct GirsanovResult {
  harness::TestResult direct;      // E[e^{-lambda Z_a}] simulated at theta
  harness::TestResult reweighted;  // theta=0 fields, importance weights
  double n_effective_weights = 0.0;
  bool weight_collapse = false;    // effective sample size < 1% of n_paths
};

// Estimates E[e^{-lambda Z_a^theta}] two ways: (i) direct simulation at
// theta, using the exact upper regulator for Z_a; (ii) reweighting theta=0
// fields by exp(theta x - (theta+lambda) Z_a - 2 theta^2 T), with
// T = int_0^a Z_r dr the stopped duration. Both are compared against
// e^{-x u^theta(lambda, a)}.
GirsanovResult girsanov_check(const rbm::ReflectedBmConfig& cfg,
                              double target_theta, double lambda, double x,
                              std::size_t n_paths, std::uint64_t seed);

}  // namespace heights::field
