#include <cmath>
#include <stdexcept>

#include "doctest.h"

#include "heights/csbp.hpp"
#include "heights/stats.hpp"

using namespace heights;
using csbp::BranchingParams;

TEST_CASE("psi evaluates the quadratic mechanism") {
  CHECK(csbp::psi({0.0}, 1.0) == doctest::Approx(2.0));
  CHECK(csbp::psi({0.7}, 0.0) == doctest::Approx(0.0));
  CHECK(csbp::psi({-1.0}, 1.0) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(csbp::psi({0.0}, -0.1), std::domain_error);
  CHECK_THROWS_AS(csbp::psi({0.0, -1.0}, 1.0), std::domain_error);
}

TEST_CASE("u_closed basics") {
  CHECK(csbp::u_closed({1.3}, 2.5, 0.0) == doctest::Approx(2.5));
  CHECK(csbp::u_closed({0.0}, 1.0, 0.5) == doctest::Approx(0.5));
  // theta switch: tiny theta agrees with the critical formula
  CHECK(csbp::u_closed({1e-10}, 1.0, 1.0) == doctest::Approx(csbp::u_closed({0.0}, 1.0, 1.0)));
  CHECK_THROWS_AS(csbp::u_closed({0.0}, -1.0, 1.0), std::domain_error);
}

TEST_CASE("u_ode matches u_closed on the oracle grid") {
  CHECK(csbp::u_ode({0.4}, 0.0, 2.0, 1e-3) == doctest::Approx(0.0));
  CHECK(csbp::u_ode({0.0}, 1.0, 0.5, 1e-4) == doctest::Approx(0.5).epsilon(1e-8));
  for (double theta : {-1.0, -0.5, 0.0, 0.5, 1.0})
    for (double lambda : {0.1, 1.0, 10.0})
      for (double t : {0.1, 1.0, 2.0}) {
        const BranchingParams p{theta};
        CHECK(std::abs(csbp::u_ode(p, lambda, t, 1e-4) -
                       csbp::u_closed(p, lambda, t)) < 1e-6);
      }
  CHECK(std::abs(csbp::u_ode({-0.5}, 2.0, 1.0, 1e-4) -
                 csbp::u_closed({-0.5}, 2.0, 1.0)) < 1e-6);
}

TEST_CASE("u_closed semigroup and monotonicity") {
  for (double theta : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    const BranchingParams p{theta};
    for (double lambda : {0.1, 1.0, 10.0})
      for (double s : {0.2, 1.0})
        for (double t : {0.3, 1.5}) {
          const double composed = csbp::u_closed(p, csbp::u_closed(p, lambda, s), t);
          CHECK(composed == doctest::Approx(csbp::u_closed(p, lambda, s + t)).epsilon(1e-9));
        }
    // nondecreasing in lambda
    double prev = 0.0;
    for (double lambda = 0.0; lambda <= 20.0; lambda += 0.5) {
      const double u = csbp::u_closed(p, lambda, 0.7);
      CHECK(u >= prev);
      prev = u;
    }
  }
}

TEST_CASE("large-lambda limit matches extinction probability") {
  for (double theta : {-1.0, -0.5, 0.5, 1.0}) {
    const BranchingParams p{theta};
    const double lim = csbp::u_large_lambda_limit(p, 3.0);
    CHECK(csbp::u_closed(p, 1e9, 3.0) == doctest::Approx(lim).epsilon(1e-5));
  }
  // theta < 0: limit in t of the limit in lambda recovers -2 theta, so
  // e^{-x * (-2 theta)} = e^{2 x theta}.
  const BranchingParams p{-0.5};
  const double lim = csbp::u_large_lambda_limit(p, 500.0);
  CHECK(lim == doctest::Approx(-2.0 * p.theta).epsilon(1e-9));
  CHECK(std::exp(-1.0 * lim) == doctest::Approx(csbp::extinction_probability(p, 1.0)).epsilon(1e-9));
}

TEST_CASE("extinction probability closed form") {
  CHECK(csbp::extinction_probability({0.3}, 5.0) == doctest::Approx(1.0));
  CHECK(csbp::extinction_probability({-0.5}, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(csbp::extinction_probability({-2.0}, 1e-9) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(csbp::extinction_probability({0.0}, 0.0), std::domain_error);
}

TEST_CASE("exact transition sampler: absorption and mean") {
  Rng rng = make_stream(7, 0);
  const BranchingParams p0{0.0};
  CHECK(csbp::transition_sample(p0, 0.0, 0.5, rng) == 0.0);

  harness::MeanAcc acc;
  for (int i = 0; i < 100000; ++i) acc.add(csbp::transition_sample(p0, 1.0, 0.5, rng));
  const double target = csbp::transition_mean(p0, 1.0, 0.5);
  CHECK(std::abs(acc.mean() - target) <= 3.0 * acc.se());
}

TEST_CASE("exact transition sampler: Laplace transform vs u_closed") {
  // The anti-hallucination oracle: the sampler's construction is validated
  // against e^{-z u(lambda, s)} before it is trusted anywhere else.
  std::size_t stream = 0;
  for (double theta : {-0.5, 0.0, 0.5}) {
    const BranchingParams p{theta};
    for (double lambda : {0.5, 1.0}) {
      Rng rng = make_stream(11, stream++);
      harness::MeanAcc acc;
      for (int i = 0; i < 100000; ++i)
        acc.add(std::exp(-lambda * csbp::transition_sample(p, 1.0, 1.0, rng)));
      const double target = std::exp(-csbp::u_closed(p, lambda, 1.0));
      CHECK(std::abs(acc.mean() - target) <= 3.0 * acc.se());
    }
  }
}

TEST_CASE("csbp path: absorption frequency") {
  Rng rng = make_stream(13, 0);
  auto zero = csbp::sample_path({0.5}, 0.0, 2.0, 0.5, rng);
  for (double v : zero.values) CHECK(v == 0.0);

  // subcritical: essentially every chain dies by horizon 20
  std::size_t absorbed = 0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    Rng r = make_stream(17, i);
    auto path = csbp::sample_path({0.5}, 1.0, 20.0, 0.5, r);
    if (path.values.back() == 0.0) ++absorbed;
  }
  CHECK(static_cast<double>(absorbed) / n > 0.995);

  // supercritical: fraction e^{-1} +- 3 SE
  absorbed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Rng r = make_stream(19, i);
    auto path = csbp::sample_path({-0.5}, 1.0, 20.0, 0.5, r);
    if (path.values.back() == 0.0) ++absorbed;
  }
  const double frac = static_cast<double>(absorbed) / n;
  const double target = std::exp(-1.0);
  const double se = std::sqrt(target * (1.0 - target) / n);
  CHECK(std::abs(frac - target) <= 3.0 * se);
}

TEST_CASE("csbp path is absorbed permanently") {
  for (std::size_t i = 0; i < 50; ++i) {
    Rng r = make_stream(23, i);
    auto path = csbp::sample_path({0.8}, 0.3, 10.0, 0.25, r);
    bool dead = false;
    for (double v : path.values) {
      CHECK(v >= 0.0);
      if (dead) CHECK(v == 0.0);
      if (v == 0.0) dead = true;
    }
  }
}
