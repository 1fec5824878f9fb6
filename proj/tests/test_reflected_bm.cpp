#include <stdexcept>
#include <cmath>

#include "doctest.h"

#include "heights/reflected_bm.hpp"
#include "heights/stats.hpp"

using namespace heights;
using rbm::GridPath;
using rbm::ReflectedBmConfig;

namespace {

GridPath constant_path(double value, std::size_t steps, double dt, double a) {
  GridPath p;
  p.dt = dt;
  p.barrier = a;
  p.values.assign(steps + 1, value);
  p.reg0.assign(steps + 1, 0.0);
  p.regA.assign(steps + 1, 0.0);
  return p;
}

}  // namespace

TEST_CASE("config validation") {
  ReflectedBmConfig bad;
  bad.a = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = ReflectedBmConfig{};
  bad.dt = 1.0;  // violates dt <= a^2/4 with a = 1
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("zero steps gives the trivial path") {
  ReflectedBmConfig cfg;
  Rng rng = make_stream(1, 0);
  auto p = rbm::simulate_reflected(cfg, 0, rng);
  CHECK(p.values == std::vector<double>{0.0});
  CHECK(p.reg0 == std::vector<double>{0.0});
  CHECK(p.regA == std::vector<double>{0.0});
}

TEST_CASE("confinement, regulator exclusivity and Tanaka bookkeeping") {
  for (double theta : {-0.5, 0.0, 0.5}) {
    ReflectedBmConfig cfg;
    cfg.theta = theta;
    cfg.a = 1.0;
    cfg.dt = 1e-3;
    Rng rng = make_stream(2, static_cast<std::uint64_t>(theta * 2 + 2));
    rbm::ReflectedStepper st(cfg);
    double prev_reg0 = 0.0, prev_regA = 0.0;
    for (int i = 0; i < 20000; ++i) {
      auto step = st.advance(rng);
      CHECK(step.value >= 0.0);
      CHECK(step.value <= cfg.a);
      // at most one regulator moves per step
      CHECK((step.clip0 == 0.0 || step.clipA == 0.0));
      CHECK(st.reg0() >= prev_reg0);
      CHECK(st.regA() >= prev_regA);
      prev_reg0 = st.reg0();
      prev_regA = st.regA();
    }
    // Y_n = raw_sum - 2 theta n dt + reg0 - regA
    const double reconstructed = st.raw_sum() -
                                 2.0 * theta * st.elapsed() + st.reg0() -
                                 st.regA();
    CHECK(st.value() == doctest::Approx(reconstructed).epsilon(1e-9));
  }
}

TEST_CASE("band local time hand traces") {
  // constant path at 0.5 for 100 steps of dt = 0.01, band 0.1 around 0.5:
  // occupation 1.0 over width 0.1 -> 10
  auto p = constant_path(0.5, 100, 0.01, 2.0);
  CHECK(rbm::band_local_time(p, 0.5, 0.1, 1.0) == doctest::Approx(10.0));

  // path identically 0 never visits a band around 1
  auto z = constant_path(0.0, 50, 0.01, 2.0);
  CHECK(rbm::band_local_time(z, 1.0, 0.1, 0.5) == doctest::Approx(0.0));

  // band entirely outside [0, a] is a domain error
  CHECK_THROWS_AS(rbm::band_local_time(p, 3.0, 0.1, 1.0), std::domain_error);

  // half band at the lower boundary; samples exactly at 0 are regulator
  // atoms and are not occupation time
  auto b = constant_path(0.02, 100, 0.01, 2.0);
  CHECK(rbm::band_local_time(b, 0.0, 0.1, 1.0) == doctest::Approx(1.0 / 0.05));
  auto atom = constant_path(0.0, 100, 0.01, 2.0);
  CHECK(rbm::band_local_time(atom, 0.0, 0.1, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("boundary local time is twice the regulator") {
  GridPath p;
  p.dt = 0.5;
  p.barrier = 1.0;
  p.values = {0.0, 0.0, 1.0};
  p.reg0 = {0.0, 0.3, 0.3};
  p.regA = {0.0, 0.0, 0.2};
  CHECK(rbm::boundary_local_time(p, rbm::Boundary::lower, 1.0) == doctest::Approx(0.6));
  CHECK(rbm::boundary_local_time(p, rbm::Boundary::upper, 1.0) == doctest::Approx(0.4));
  CHECK(rbm::boundary_local_time(p, rbm::Boundary::upper, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("band and regulator estimators of L_0 agree in expectation") {
  ReflectedBmConfig cfg;
  cfg.theta = 0.0;
  cfg.a = 2.0;
  cfg.dt = 2e-4;
  const double t = 2.0;
  const double eps = 0.04;
  harness::MeanAcc diff;
  for (std::size_t i = 0; i < 400; ++i) {
    Rng rng = make_stream(3, i);
    auto p = rbm::simulate_reflected(cfg, static_cast<std::uint64_t>(t / cfg.dt), rng);
    diff.add(rbm::band_local_time(p, 0.0, eps, t) -
             rbm::boundary_local_time(p, rbm::Boundary::lower, t));
  }
  const double tol = 3.0 * diff.se() + std::sqrt(eps) + std::sqrt(cfg.dt);
  CHECK(std::abs(diff.mean()) <= tol);
}

TEST_CASE("stationary density closed form") {
  CHECK(rbm::stationary_density(0.0, 2.0, 1.0) == doctest::Approx(0.5));
  for (double theta : {-0.5, 0.0, 0.7}) {
    const double mass = harness::simpson(
        [theta](double v) { return rbm::stationary_density(theta, 1.5, v); },
        0.0, 1.5, 2000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
  // theta < 0: density increases in x
  CHECK(rbm::stationary_density(-0.5, 1.0, 0.9) > rbm::stationary_density(-0.5, 1.0, 0.1));
  CHECK(rbm::stationary_cdf(0.0, 2.0, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("long-run marginal matches the stationary density (smoke)") {
  for (double theta : {-0.5, 0.5}) {
    ReflectedBmConfig cfg;
    cfg.theta = theta;
    cfg.a = 1.0;
    cfg.dt = 2.5e-4;
    const auto steps = static_cast<std::uint64_t>(4.0 / cfg.dt);
    std::vector<double> samples;
    for (std::size_t i = 0; i < 2000; ++i) {
      Rng rng = make_stream(5 + static_cast<std::uint64_t>(10 * theta + 10), i);
      rbm::ReflectedStepper st(cfg);
      for (std::uint64_t s = 0; s < steps; ++s) st.advance(rng);
      samples.push_back(st.value());
    }
    auto ks = harness::ks_test(
        samples, [&](double v) { return rbm::stationary_cdf(theta, cfg.a, v); });
    CHECK(ks.p_value > 0.01);
  }
}

TEST_CASE("dt refinement leaves E[L_0(t)] inside the Monte-Carlo band") {
  auto mean_l0 = [](double dt, std::uint64_t seed) {
    ReflectedBmConfig cfg;
    cfg.theta = 0.0;
    cfg.a = 1.0;
    cfg.dt = dt;
    harness::MeanAcc acc;
    for (std::size_t i = 0; i < 500; ++i) {
      Rng rng = make_stream(seed, i);
      rbm::ReflectedStepper st(cfg);
      const auto steps = static_cast<std::uint64_t>(2.0 / dt);
      for (std::uint64_t s = 0; s < steps; ++s) st.advance(rng);
      acc.add(2.0 * st.reg0());
    }
    return acc;
  };
  auto coarse = mean_l0(2e-4, 31);
  auto fine = mean_l0(1e-4, 37);
  const double band = 3.0 * std::sqrt(coarse.se() * coarse.se() + fine.se() * fine.se());
  CHECK(std::abs(coarse.mean() - fine.mean()) <= band);
}
