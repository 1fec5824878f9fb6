#pragma once

#include <cstdint>
#include <vector>

#include "heights/rng.hpp"

// Simulation kernel for Brownian motion with drift -2*theta reflected in
// [0, a], via per-step two-sided Skorokhod projection, and occupation-density
// estimators of its local times. The clip amounts accumulated at the
// boundaries are the Skorokhod regulators; local times are twice the
// regulators (the SDE carries the regulators with a 1/2 factor).
namespace heights::rbm {

struct ReflectedBmConfig {
  double theta = 0.0;
  double a = 1.0;                        // upper barrier
  double dt = 1e-4;                      // grid step
  std::uint64_t max_steps = 1'000'000'000;  // safety bound

  // Throws std::domain_error on invalid fields; warns (stderr) when the
  // barrier is narrower than one step's standard deviation.
  void validate() const;
};

// A height-process sample path on a uniform grid, values in [0, barrier],
// with cumulative boundary-regulator accumulators.
struct GridPath {
  double dt = 0.0;
  double barrier = 0.0;
  std::vector<double> values;
  std::vector<double> reg0;  // cumulative lower regulator, nondecreasing from 0
  std::vector<double> regA;  // cumulative upper regulator

  std::size_t size() const { return values.size(); }
  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  double horizon() const { return dt * static_cast<double>(steps()); }
};

// One-step kernel. Kept separate from path recording so that long runs can
// stream per-step results into accumulators with O(1) memory.
class ReflectedStepper {
 public:
  explicit ReflectedStepper(const ReflectedBmConfig& cfg);

  struct Step {
    double value;  // position after projection
    double clip0;  // amount clipped at the lower boundary this step
    double clipA;  // amount clipped at the upper boundary
    double raw;    // raw Gaussian increment (before drift and projection)
  };

  Step advance(Rng& rng);

  double value() const { return y_; }
  double reg0() const { return reg0_; }
  double regA() const { return regA_; }
  double raw_sum() const { return raw_sum_; }
  std::uint64_t steps() const { return n_; }
  double elapsed() const { return dt_ * static_cast<double>(n_); }
  const ReflectedBmConfig& config() const { return cfg_; }

 private:
  ReflectedBmConfig cfg_;
  double dt_;
  double drift_;  // -2 theta dt
  double sd_;     // sqrt(dt)
  double y_ = 0.0;
  double reg0_ = 0.0;
  double regA_ = 0.0;
  double raw_sum_ = 0.0;
  std::uint64_t n_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Y_0 = 0; n_steps projected Euler steps. Throws std::invalid_argument if
// n_steps exceeds cfg.max_steps.
GridPath simulate_reflected(const ReflectedBmConfig& cfg, std::uint64_t n_steps,
                            Rng& rng);

// Occupation-density estimator of the local time at `level` up to time t:
// (1/w) * dt * #{steps s <= t with value in the band}, where the band is
// [level - eps/2, level + eps/2] intersected with [0, barrier] and w is its
// width (half band at the boundaries, symmetric local-time convention).
// Step endpoints are counted, not the initial point. Throws std::domain_error
// when the band misses [0, barrier].
double band_local_time(const GridPath& p, double level, double eps, double t);

enum class Boundary { lower, upper };

// Boundary local time L_0(t) or L_a(t) = 2 * accumulated regulator at t.
double boundary_local_time(const GridPath& p, Boundary which, double t);

// Stationary density of the reflected drifted BM on [0, a]:
// 1/a at theta = 0, else 4 theta e^{-4 theta x} / (1 - e^{-4 theta a}).
double stationary_density(double theta, double a, double x);
double stationary_cdf(double theta, double a, double x);

}  // namespace heights::rbm
