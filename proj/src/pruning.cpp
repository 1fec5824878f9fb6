#include "heights/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "heights/pathops.hpp"

namespace heights::pruning {

void MarkStack::step(double from, double to, double gamma, Rng& rng,
                     std::vector<Mark>* out) {
  if (to > from) {
    const double delta = to - from;
    std::poisson_distribution<int> pois(4.0 * gamma * delta);
    const int k = gamma > 0.0 ? pois(rng) : 0;
    if (k > 0) {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      std::vector<Mark> fresh(static_cast<std::size_t>(k));
      for (auto& m : fresh) {
        m.height = from + delta * (1.0 - unif(rng));  // uniform on (from, to]
        m.u = unif(rng);
      }
      std::sort(fresh.begin(), fresh.end(),
                [](const Mark& a, const Mark& b) { return a.height < b.height; });
      for (const auto& m : fresh) heights_.push_back(m.height);
      if (out) out->insert(out->end(), fresh.begin(), fresh.end());
    }
  } else {
    while (!heights_.empty() && heights_.back() > to) heights_.pop_back();
  }
}

MarkedPath mark_replay(const rbm::GridPath& path, double gamma, Rng& rng) {
  if (gamma < 0.0) throw std::domain_error("mark_replay: gamma must be >= 0");
  MarkedPath m;
  m.base = path;
  m.gamma = gamma;
  m.created.resize(path.values.size());
  m.keep.resize(path.values.size());
  MarkStack stack;
  m.keep[0] = 1;
  for (std::size_t i = 1; i < path.values.size(); ++i) {
    stack.step(path.values[i - 1], path.values[i], gamma, rng, &m.created[i]);
    m.keep[i] = stack.empty() ? 1 : 0;
  }
  return m;
}

std::vector<std::uint8_t> thinned_keep(const MarkedPath& m, double gamma_sub) {
  if (gamma_sub < 0.0 || gamma_sub > m.gamma)
    throw std::domain_error("thinned_keep: need 0 <= gamma_sub <= gamma");
  const double accept = m.gamma > 0.0 ? gamma_sub / m.gamma : 0.0;
  std::vector<std::uint8_t> keep(m.base.values.size());
  std::vector<double> stack;
  keep[0] = 1;
  for (std::size_t i = 1; i < m.base.values.size(); ++i) {
    const double v = m.base.values[i];
    if (v > m.base.values[i - 1]) {
      for (const auto& mk : m.created[i])
        if (mk.u < accept) stack.push_back(mk.height);
    } else {
      while (!stack.empty() && stack.back() > v) stack.pop_back();
    }
    keep[i] = stack.empty() ? 1 : 0;
  }
  return keep;
}

namespace {

rbm::GridPath keep_subsequence(const rbm::GridPath& base,
                               const std::vector<std::uint8_t>& keep) {
  rbm::GridPath out;
  out.dt = base.dt;
  out.barrier = base.barrier;
  double regA = 0.0;
  for (std::size_t i = 0; i < base.values.size(); ++i) {
    if (!keep[i]) continue;
    if (i > 0) regA += base.regA[i] - base.regA[i - 1];
    out.values.push_back(base.values[i]);
    out.reg0.push_back(base.reg0[i]);
    out.regA.push_back(regA);
  }
  return out;
}

}  // namespace

rbm::GridPath prune(const MarkedPath& m) {
  return keep_subsequence(m.base, m.keep);
}

std::pair<rbm::GridPath, rbm::GridPath> prune_stopped(
    const rbm::ReflectedBmConfig& cfg, double gamma, double x, Rng& rng) {
  if (gamma < 0.0) throw std::domain_error("prune_stopped: gamma must be >= 0");
  if (!(x > 0.0)) throw std::domain_error("prune_stopped: x must be > 0");

  rbm::ReflectedStepper stepper(cfg);
  MarkStack stack;
  rbm::GridPath base;
  base.dt = cfg.dt;
  base.barrier = cfg.a;
  base.values.push_back(0.0);
  base.reg0.push_back(0.0);
  base.regA.push_back(0.0);
  std::vector<std::uint8_t> keep{1};
  while (2.0 * stepper.reg0() <= x) {
    if (stepper.steps() >= cfg.max_steps)
      throw pathops::MaxStepsExceeded(std::move(base), 2.0 * stepper.reg0());
    const double from = stepper.value();
    stepper.advance(rng);
    stack.step(from, stepper.value(), gamma, rng);
    base.values.push_back(stepper.value());
    base.reg0.push_back(stepper.reg0());
    base.regA.push_back(stepper.regA());
    keep.push_back(stack.empty() ? 1 : 0);
  }
  rbm::GridPath pruned = keep_subsequence(base, keep);
  return {std::move(base), std::move(pruned)};
}

double kept_time(const MarkedPath& m) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < m.keep.size(); ++i) n += m.keep[i];
  return m.base.dt * static_cast<double>(n);
}

double exit_local_time_estimate(const MarkedPath& m, double eps) {
  if (!(eps > 0.0))
    throw std::domain_error("exit_local_time_estimate: eps must be > 0");
  // Replay the stack to know the first (lowest) mark at every step.
  std::vector<double> stack;
  std::size_t count = 0;
  for (std::size_t i = 1; i < m.base.values.size(); ++i) {
    const double v = m.base.values[i];
    if (v > m.base.values[i - 1]) {
      for (const auto& mk : m.created[i]) stack.push_back(mk.height);
    } else {
      while (!stack.empty() && stack.back() > v) stack.pop_back();
    }
    if (!stack.empty() && v > stack.front() && v < stack.front() + eps) ++count;
  }
  return m.base.dt * static_cast<double>(count) / eps;
}

}  // namespace heights::pruning
