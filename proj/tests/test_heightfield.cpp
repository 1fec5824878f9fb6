#include <stdexcept>
#include <cmath>

#include "doctest.h"

#include "heights/csbp.hpp"
#include "heights/heightfield.hpp"
#include "heights/pathops.hpp"
#include "heights/stats.hpp"

using namespace heights;
using rbm::ReflectedBmConfig;

TEST_CASE("field is zero above the path maximum and anchored at x below") {
  ReflectedBmConfig cfg;
  cfg.theta = 0.5;  // strong downward drift keeps the path low
  cfg.a = 5.0;
  cfg.dt = 1e-4;
  Rng rng = make_stream(71, 0);
  auto p = pathops::stop_at_local_time(cfg, 0.5, rng);
  double peak = 0.0;
  for (double v : p.values) peak = std::max(peak, v);
  REQUIRE(peak < 4.0);
  auto f = field::ray_knight_field(p, 0.5, {0.0, 4.5}, 0.05);
  CHECK(f.z[1] == 0.0);
  // level 0 uses the exact regulator; overshoot is at most one clip
  CHECK(f.z[0] >= 0.5);
  CHECK(f.z[0] <= 0.5 + 2.0 * 0.05);
  CHECK(f.levels.size() == f.z.size());
}

TEST_CASE("occupation integral with g = 1 is exactly the duration") {
  ReflectedBmConfig cfg;
  cfg.theta = 0.0;
  cfg.a = 1.0;
  cfg.dt = 1e-3;
  Rng rng = make_stream(73, 0);
  auto p = pathops::stop_at_local_time(cfg, 0.5, rng);
  CHECK(field::occupation_integral(p, [](double) { return 1.0; }) ==
        doctest::Approx(p.horizon()).epsilon(1e-12));
}

TEST_CASE("T_x is reconstructed from the field by level quadrature") {
  ReflectedBmConfig cfg;
  cfg.theta = 0.0;
  cfg.a = 1.0;
  cfg.dt = 1e-4;
  const double eps = 0.05;
  std::vector<double> levels;
  for (double r = 0.025; r < 1.0; r += 0.05) levels.push_back(r);
  harness::MeanAcc rel_err;
  for (std::size_t i = 0; i < 50; ++i) {
    Rng rng = make_stream(79, i);
    auto p = pathops::stop_at_local_time(cfg, 1.0, rng);
    auto f = field::ray_knight_field(p, 1.0, levels, eps);
    double quad = 0.0;
    for (double z : f.z) quad += z * 0.05;
    rel_err.add((quad - p.horizon()) / std::max(p.horizon(), 1e-9));
  }
  CHECK(std::abs(rel_err.mean()) < eps + std::sqrt(cfg.dt) + 3.0 * rel_err.se());
}

TEST_CASE("field Laplace transform matches the CSBP prediction (smoke)") {
  // theta = 0, a = 2, x = 1: E[e^{-lambda Z_r}] = e^{-lambda/(1+2 lambda r)}.
  ReflectedBmConfig cfg;
  cfg.theta = 0.0;
  cfg.a = 2.0;
  cfg.dt = 2e-4;
  const double eps = 0.04;
  const double lambda = 1.0, r = 0.5;
  harness::MeanAcc acc;
  for (std::size_t i = 0; i < 1500; ++i) {
    Rng rng = make_stream(83, i);
    auto p = pathops::stop_at_local_time(cfg, 1.0, rng);
    auto f = field::ray_knight_field(p, 1.0, {r}, eps);
    acc.add(std::exp(-lambda * f.z[0]));
  }
  const double target = std::exp(-csbp::u_closed({0.0}, lambda, r));
  CHECK(std::abs(acc.mean() - target) <=
        3.0 * acc.se() + harness::laplace_band_bias(lambda, eps, cfg.dt));
}

TEST_CASE("girsanov check: lambda = 0 is a normalization identity") {
  ReflectedBmConfig cfg;
  cfg.theta = 0.0;
  cfg.a = 1.0;
  cfg.dt = 2e-4;
  auto g = field::girsanov_check(cfg, 0.5, 0.0, 1.0, 1500, 89);
  CHECK(g.direct.estimate == doctest::Approx(1.0));
  CHECK(g.reweighted.target == doctest::Approx(1.0));
  CHECK(g.reweighted.pass);
  CHECK_FALSE(g.weight_collapse);
}

TEST_CASE("girsanov check: target theta = 0 weights are identically one") {
  ReflectedBmConfig cfg;
  cfg.theta = 0.0;
  cfg.a = 1.0;
  cfg.dt = 1e-3;
  auto g = field::girsanov_check(cfg, 0.0, 1.0, 0.5, 300, 97);
  CHECK(g.n_effective_weights < 300.0 + 1e-9);
  CHECK(g.reweighted.se > 0.0);  // e^{-lambda Z_a} still varies
  CHECK(g.reweighted.pass);
  CHECK(g.direct.pass);
}
