#include "heights/csbp.hpp"

#include <cmath>
#include <stdexcept>

namespace heights::csbp {

void BranchingParams::validate() const {
  if (!std::isfinite(theta)) throw std::domain_error("theta must be finite");
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw std::domain_error("gamma must be a nonnegative finite real");
}

double psi(const BranchingParams& p, double u) {
  p.validate();
  if (u < 0.0) throw std::domain_error("psi: u must be >= 0");
  return 2.0 * u * u + 4.0 * p.theta * u;
}

double u_closed(const BranchingParams& p, double lambda, double t) {
  p.validate();
  if (lambda < 0.0) throw std::domain_error("u_closed: lambda must be >= 0");
  if (t < 0.0) throw std::domain_error("u_closed: t must be >= 0");
  if (std::abs(p.theta) < kThetaZeroSwitch) {
    return lambda / (1.0 + 2.0 * lambda * t);
  }
  const double q = std::exp(-4.0 * p.theta * t);
  const double c = (1.0 - q) / (2.0 * p.theta);  // > 0 for all theta != 0, t > 0
  return lambda * q / (1.0 + lambda * c);
}

double u_ode(const BranchingParams& p, double lambda, double t, double dt_ode) {
  p.validate();
  if (lambda < 0.0) throw std::domain_error("u_ode: lambda must be >= 0");
  if (t < 0.0) throw std::domain_error("u_ode: t must be >= 0");
  if (!(dt_ode > 0.0)) throw std::domain_error("u_ode: dt_ode must be > 0");

  const auto f = [&p](double u) { return -(2.0 * u * u + 4.0 * p.theta * u); };
  double u = lambda;
  double remaining = t;
  while (remaining > 0.0) {
    const double h = std::min(dt_ode, remaining);
    const double k1 = f(u);
    const double k2 = f(u + 0.5 * h * k1);
    const double k3 = f(u + 0.5 * h * k2);
    const double k4 = f(u + h * k3);
    u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (u < 0.0)
      throw std::runtime_error("u_ode: negative iterate, step size too large");
    remaining -= h;
  }
  return u;
}

double u_large_lambda_limit(const BranchingParams& p, double t) {
  p.validate();
  if (!(t > 0.0)) throw std::domain_error("u_large_lambda_limit: t must be > 0");
  if (std::abs(p.theta) < kThetaZeroSwitch) return 1.0 / (2.0 * t);
  return 2.0 * p.theta / std::expm1(4.0 * p.theta * t);
}

double transition_mean(const BranchingParams& p, double z, double s) {
  return z * std::exp(-4.0 * p.theta * s);
}

double transition_sample(const BranchingParams& p, double z, double s, Rng& rng) {
  p.validate();
  if (z < 0.0) throw std::domain_error("transition_sample: z must be >= 0");
  if (!(s > 0.0)) throw std::domain_error("transition_sample: s must be > 0");
  if (z == 0.0) return 0.0;  // absorbed

  double q, c;
  if (std::abs(p.theta) < kThetaZeroSwitch) {
    q = 1.0;
    c = 2.0 * s;
  } else {
    q = std::exp(-4.0 * p.theta * s);
    c = (1.0 - q) / (2.0 * p.theta);
  }
  const double mean_n = z * q / c;
  if (mean_n > 1e9) {
    // Supercritical populations grow without bound, and a Poisson draw with
    // an astronomical mean both overflows the integer sampler and carries a
    // relative fluctuation below 1e-4. The compound Poisson-Gamma transition
    // has mean z*q and variance 2*z*q*c; use its Gaussian limit instead.
    std::normal_distribution<double> approx(z * q, std::sqrt(2.0 * z * q * c));
    return std::max(0.0, approx(rng));
  }
  std::poisson_distribution<long> pois(mean_n);
  const long n = pois(rng);
  if (n == 0) return 0.0;
  std::gamma_distribution<double> gamma(static_cast<double>(n), c);
  return gamma(rng);
}

CsbpPath sample_path(const BranchingParams& p, double z0, double horizon,
                     double step, Rng& rng) {
  p.validate();
  if (z0 < 0.0) throw std::domain_error("sample_path: z0 must be >= 0");
  if (!(horizon > 0.0)) throw std::domain_error("sample_path: horizon must be > 0");
  if (!(step > 0.0)) throw std::domain_error("sample_path: step must be > 0");

  CsbpPath path;
  path.t0 = 0.0;
  path.step = step;
  const auto n = static_cast<std::size_t>(std::ceil(horizon / step));
  path.values.reserve(n + 1);
  double z = z0;
  path.values.push_back(z);
  for (std::size_t i = 0; i < n; ++i) {
    z = (z == 0.0) ? 0.0 : transition_sample(p, z, step, rng);
    path.values.push_back(z);
  }
  return path;
}

double extinction_probability(const BranchingParams& p, double x) {
  p.validate();
  if (!(x > 0.0)) throw std::domain_error("extinction_probability: x must be > 0");
  if (p.theta >= 0.0) return 1.0;
  return std::exp(2.0 * x * p.theta);
}

}  // namespace heights::csbp
