#include "heights/pathops.hpp"

#include <cmath>

namespace heights::pathops {

double time_below(const rbm::GridPath& p, double b, double t) {
  if (t < 0.0 || t > p.horizon() + 1e-12)
    throw std::domain_error("time_below: t outside path horizon");
  const auto last = static_cast<std::size_t>(std::floor(t / p.dt + 1e-9));
  std::size_t count = 0;
  for (std::size_t i = 0; i <= last && i < p.values.size(); ++i)
    if (p.values[i] <= b) ++count;
  return p.dt * static_cast<double>(count);
}

rbm::GridPath project(const rbm::GridPath& p, double b) {
  if (!(b > 0.0 && b <= p.barrier))
    throw std::domain_error("project: b must lie in (0, a]");

  rbm::GridPath out;
  out.dt = p.dt;
  out.barrier = b;
  out.values.reserve(p.values.size());
  out.reg0.reserve(p.values.size());
  out.regA.reserve(p.values.size());

  double regA = 0.0;
  bool in_excursion = false;  // currently above b
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const double v = p.values[i];
    if (v <= b) {
      out.values.push_back(v);
      out.reg0.push_back(p.reg0[i]);
      out.regA.push_back(regA);
      in_excursion = false;
    } else {
      if (!in_excursion) {
        // Overshoot of the first sample above b; credited to the next kept
        // sample, where the spliced path lands back in [0, b].
        regA += v - b;
        in_excursion = true;
      }
    }
  }
  if (out.values.empty())
    throw std::domain_error("project: no sample at or below b");
  return out;
}

MaxStepsExceeded::MaxStepsExceeded(rbm::GridPath partial_path, double local_time)
    : std::runtime_error("stop_at_local_time: max_steps exceeded"),
      partial(std::move(partial_path)),
      achieved_local_time(local_time) {}

rbm::GridPath stop_at_local_time(const rbm::ReflectedBmConfig& cfg, double x,
                                 Rng& rng) {
  if (!(x > 0.0)) throw std::domain_error("stop_at_local_time: x must be > 0");
  rbm::ReflectedStepper stepper(cfg);
  rbm::GridPath path;
  path.dt = cfg.dt;
  path.barrier = cfg.a;
  path.values.push_back(0.0);
  path.reg0.push_back(0.0);
  path.regA.push_back(0.0);
  while (2.0 * stepper.reg0() <= x) {
    if (stepper.steps() >= cfg.max_steps)
      throw MaxStepsExceeded(std::move(path), 2.0 * stepper.reg0());
    stepper.advance(rng);
    path.values.push_back(stepper.value());
    path.reg0.push_back(stepper.reg0());
    path.regA.push_back(stepper.regA());
  }
  return path;
}

}  // namespace heights::pathops
