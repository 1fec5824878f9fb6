#include "heights/heightfield.hpp"

#include <cmath>
#include <stdexcept>

#include "heights/csbp.hpp"

namespace heights::field {

LocalTimeField ray_knight_field(const rbm::GridPath& stopped, double x,
                                std::vector<double> levels, double eps) {
  LocalTimeField f;
  f.x = x;
  f.epsilon = eps;
  f.levels = std::move(levels);
  f.z.reserve(f.levels.size());
  const double end = stopped.horizon();
  for (double r : f.levels) {
    if (r == 0.0)
      f.z.push_back(rbm::boundary_local_time(stopped, rbm::Boundary::lower, end));
    else
      f.z.push_back(rbm::band_local_time(stopped, r, eps, end));
  }
  return f;
}

double occupation_integral(const rbm::GridPath& stopped,
                           const std::function<double(double)>& g) {
  double s = 0.0;
  for (std::size_t i = 1; i < stopped.values.size(); ++i) s += g(stopped.values[i]);
  return stopped.dt * s;
}

GirsanovResult girsanov_check(const rbm::ReflectedBmConfig& cfg,
                              double target_theta, double lambda, double x,
                              std::size_t n_paths, std::uint64_t seed) {
  if (!(x > 0.0)) throw std::domain_error("girsanov_check: x must be > 0");
  if (lambda < 0.0) throw std::domain_error("girsanov_check: lambda >= 0");
  const double a = cfg.a;
  const double th = target_theta;
  const csbp::BranchingParams params{th, 0.0};
  const double target = std::exp(-x * csbp::u_closed(params, lambda, a));
  // Discretization allowance on the exact-regulator functionals Z_a and T.
  const double bias = (std::abs(th) + lambda) * 2.0 * std::sqrt(cfg.dt);

  // (i) direct simulation at theta.
  rbm::ReflectedBmConfig cfg_theta = cfg;
  cfg_theta.theta = th;
  harness::MeanAcc direct;
  for (std::size_t i = 0; i < n_paths; ++i) {
    Rng rng = make_stream(seed, n_paths + i);
    rbm::ReflectedStepper st(cfg_theta);
    while (2.0 * st.reg0() <= x) {
      if (st.steps() >= cfg.max_steps)
        throw pathops::MaxStepsExceeded({}, 2.0 * st.reg0());
      st.advance(rng);
    }
    direct.add(std::exp(-lambda * 2.0 * st.regA()));
  }

  // (ii) theta = 0 fields reweighted by exp(theta x - (theta+lambda) Z_a
  //      - 2 theta^2 T).
  rbm::ReflectedBmConfig cfg0 = cfg;
  cfg0.theta = 0.0;
  harness::MeanAcc weighted;
  double wsum = 0.0, wsumsq = 0.0;
  for (std::size_t i = 0; i < n_paths; ++i) {
    Rng rng = make_stream(seed, i);
    rbm::ReflectedStepper st(cfg0);
    while (2.0 * st.reg0() <= x) {
      if (st.steps() >= cfg.max_steps)
        throw pathops::MaxStepsExceeded({}, 2.0 * st.reg0());
      st.advance(rng);
    }
    const double z_a = 2.0 * st.regA();
    const double t_total = st.elapsed();
    const double w = std::exp(th * x - (th + lambda) * z_a - 2.0 * th * th * t_total);
    weighted.add(w);
    wsum += w;
    wsumsq += w * w;
  }

  GirsanovResult out;
  out.direct = harness::mean_compare(direct, target, bias, "girsanov_direct");
  out.reweighted = harness::mean_compare(weighted, target, bias, "girsanov_reweighted");
  out.n_effective_weights = wsumsq > 0.0 ? wsum * wsum / wsumsq : 0.0;
  out.weight_collapse =
      out.n_effective_weights < 0.01 * static_cast<double>(n_paths);
  return out;
}

}  // namespace heights::field
