#pragma once

#include <vector>

#include "heights/rng.hpp"

// Closed-form quantities of the quadratic branching mechanism
// psi_theta(u) = 2u^2 + 4*theta*u, and an exact-transition sampler for the
// associated continuous-state branching process (CSBP). The exact sampler is
// the independent oracle for the statistical tests in the rest of the
// library.
namespace heights::csbp {

struct BranchingParams {
  double theta = 0.0;   // drift / branching parameter, any sign
  double gamma = 0.0;   // pruning intensity, >= 0

  void validate() const;  // throws std::domain_error on bad fields
};

// |theta| below this uses the critical-case formulas, avoiding the 0/0 in
// (1 - e^{-4 theta t}) / (2 theta). The relative error of the limit branch is
// below 1e-6 there.
inline constexpr double kThetaZeroSwitch = 1e-8;

// psi_theta(u) = 2u^2 + 4*theta*u, u >= 0.
double psi(const BranchingParams& p, double u);

// u^theta(lambda, t): the nonnegative solution of u' = -psi_theta(u),
// u(0) = lambda. Closed form:
//   theta == 0:  lambda / (1 + 2 lambda t)
//   theta != 0:  lambda e^{-4 theta t} / (1 + lambda (2 theta)^{-1} (1 - e^{-4 theta t}))
double u_closed(const BranchingParams& p, double lambda, double t);

// RK4 integration of u' = -psi_theta(u) with step dt_ode; oracle for
// u_closed. Throws std::runtime_error if the step produces a negative
// iterate (step size too large).
double u_ode(const BranchingParams& p, double lambda, double t,
             double dt_ode = 1e-5);

// lim_{lambda->inf} u^theta(lambda, t) = 2 theta / (e^{4 theta t} - 1) for
// theta != 0, 1/(2t) for theta == 0.
double u_large_lambda_limit(const BranchingParams& p, double t);

// E[Z_{t+s} | Z_t = z] = z e^{-4 theta s}.
double transition_mean(const BranchingParams& p, double z, double s);

// Exact sample of Z_{t+s} given Z_t = z. Writes u^theta(lambda, s) as
// q*lambda / (1 + c*lambda) with q = e^{-4 theta s},
// c = (1 - e^{-4 theta s}) / (2 theta) (c = 2s at theta = 0), draws
// N ~ Poisson(z q / c) and returns a Gamma(N, c) sum, so that
// E[e^{-lambda Z_{t+s}}] = e^{-z u^theta(lambda, s)} exactly.
double transition_sample(const BranchingParams& p, double z, double s, Rng& rng);

struct CsbpPath {
  double t0 = 0.0;
  double step = 0.0;
  std::vector<double> values;  // Z at t0, t0+step, ...
};

// Markov chain of exact transitions on a uniform grid; absorbed at 0.
CsbpPath sample_path(const BranchingParams& p, double z0, double horizon,
                     double step, Rng& rng);

// Probability that the CSBP started from x dies out: 1 if theta >= 0,
// e^{2 x theta} if theta < 0.
double extinction_probability(const BranchingParams& p, double x);

}  // namespace heights::csbp
