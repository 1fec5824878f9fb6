#include "heights/reflected_bm.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace heights::rbm {

void ReflectedBmConfig::validate() const {
  if (!std::isfinite(theta)) throw std::domain_error("theta must be finite");
  if (!(a > 0.0)) throw std::domain_error("barrier a must be > 0");
  if (!(dt > 0.0)) throw std::domain_error("dt must be > 0");
  if (max_steps == 0) throw std::domain_error("max_steps must be > 0");
  if (dt > a * a / 4.0)
    throw std::domain_error("dt must satisfy dt <= a^2/4 (stability guideline)");
  if (a <= std::sqrt(dt))
    std::fprintf(stderr,
                 "warning: barrier a=%g narrower than one step's standard "
                 "deviation sqrt(dt)=%g\n",
                 a, std::sqrt(dt));
}

ReflectedStepper::ReflectedStepper(const ReflectedBmConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  dt_ = cfg_.dt;
  drift_ = -2.0 * cfg_.theta * cfg_.dt;
  sd_ = std::sqrt(cfg_.dt);
}

ReflectedStepper::Step ReflectedStepper::advance(Rng& rng) {
  const double g = sd_ * normal_(rng);
  raw_sum_ += g;
  double y = y_ + g + drift_;
  double clip0 = 0.0, clipA = 0.0;
  if (y < 0.0) {
    clip0 = -y;
    y = 0.0;
    reg0_ += clip0;
  } else if (y > cfg_.a) {
    clipA = y - cfg_.a;
    y = cfg_.a;
    regA_ += clipA;
  }
  y_ = y;
  ++n_;
  return Step{y, clip0, clipA, g};
}

GridPath simulate_reflected(const ReflectedBmConfig& cfg, std::uint64_t n_steps,
                            Rng& rng) {
  if (n_steps > cfg.max_steps)
    throw std::invalid_argument("simulate_reflected: n_steps exceeds max_steps");
  ReflectedStepper stepper(cfg);
  GridPath path;
  path.dt = cfg.dt;
  path.barrier = cfg.a;
  path.values.reserve(n_steps + 1);
  path.reg0.reserve(n_steps + 1);
  path.regA.reserve(n_steps + 1);
  path.values.push_back(0.0);
  path.reg0.push_back(0.0);
  path.regA.push_back(0.0);
  for (std::uint64_t i = 0; i < n_steps; ++i) {
    stepper.advance(rng);
    path.values.push_back(stepper.value());
    path.reg0.push_back(stepper.reg0());
    path.regA.push_back(stepper.regA());
  }
  return path;
}

double band_local_time(const GridPath& p, double level, double eps, double t) {
  if (!(eps > 0.0)) throw std::domain_error("band_local_time: eps must be > 0");
  if (t < 0.0 || t > p.horizon() + 1e-12)
    throw std::domain_error("band_local_time: t outside path horizon");
  const double lo = std::max(0.0, level - eps / 2.0);
  const double hi = std::min(p.barrier, level + eps / 2.0);
  if (!(hi > lo))
    throw std::domain_error("band_local_time: band does not intersect [0, a]");
  const auto last = static_cast<std::size_t>(std::floor(t / p.dt + 1e-9));
  std::size_t count = 0;
  for (std::size_t i = 1; i <= last && i < p.values.size(); ++i) {
    const double v = p.values[i];
    // Samples pinned exactly to a boundary are regulator atoms (the process
    // spends zero Lebesgue time there); counting them would double-charge
    // the boundary local time against the occupation density.
    if (v >= lo && v <= hi && v > 0.0 && v < p.barrier) ++count;
  }
  return p.dt * static_cast<double>(count) / (hi - lo);
}

double boundary_local_time(const GridPath& p, Boundary which, double t) {
  if (t < 0.0 || t > p.horizon() + 1e-12)
    throw std::domain_error("boundary_local_time: t outside path horizon");
  const auto i = static_cast<std::size_t>(std::floor(t / p.dt + 1e-9));
  const auto& reg = (which == Boundary::lower) ? p.reg0 : p.regA;
  return 2.0 * reg[std::min(i, reg.size() - 1)];
}

double stationary_density(double theta, double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("stationary_density: a must be > 0");
  if (x < 0.0 || x > a) return 0.0;
  if (std::abs(theta) < 1e-12) return 1.0 / a;
  const double k = 4.0 * theta;
  return k * std::exp(-k * x) / -std::expm1(-k * a);
}

double stationary_cdf(double theta, double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("stationary_cdf: a must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= a) return 1.0;
  if (std::abs(theta) < 1e-12) return x / a;
  const double k = 4.0 * theta;
  return std::expm1(-k * x) / std::expm1(-k * a);
}

}  // namespace heights::rbm
