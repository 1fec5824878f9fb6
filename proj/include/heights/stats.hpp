#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>

// Estimators, pass/fail comparisons and Kolmogorov-Smirnov tests. Every
// tolerance decomposes as statistical (3*SE) plus a deterministic bias
// allowance (band width / step size), reported separately.
namespace heights::harness {

struct TestResult {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double target = 0.0;
  double tol_stat = 0.0;  // 3 * SE
  double tol_bias = 0.0;  // documented deterministic allowance
  bool pass = false;
  double n_effective = 0.0;
  double p_value = std::numeric_limits<double>::quiet_NaN();  // KS only

  double tolerance() const { return tol_stat + tol_bias; }
};

// Streaming mean / standard-error accumulator.
struct MeanAcc {
  std::size_t n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double v) {
    ++n;
    sum += v;
    sumsq += v * v;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (sumsq - static_cast<double>(n) * m * m) /
                             static_cast<double>(n - 1));
  }
  double se() const {
    return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

// |estimate - target| <= 3*SE + bias.
TestResult mean_compare(const MeanAcc& acc, double target, double bias,
                        std::string name);
TestResult mean_compare(std::span<const double> samples, double target,
                        double bias, std::string name);

// estimate = mean of e^{-lambda * sample}, compared against target.
TestResult laplace_compare(std::span<const double> samples, double lambda,
                           double target, double bias = 0.0,
                           std::string name = "laplace");

// Documented bias allowance for band-estimated local-time Laplace
// functionals: lambda * (eps/2 + 2*sqrt(dt)) covers the band-averaging and
// Skorokhod-projection discretization errors at the default resolutions.
inline double laplace_band_bias(double lambda, double eps, double dt) {
  return lambda * (0.5 * eps + 2.0 * std::sqrt(dt));
}

// Kolmogorov asymptotic survival function Q(x) = 2 sum (-1)^{k-1} e^{-2k^2x^2}.
double kolmogorov_sf(double x);

// One-sample two-sided KS against a cdf handle; pass at p > 0.01.
TestResult ks_test(std::span<const double> samples,
                   const std::function<double(double)>& cdf,
                   std::string name = "ks");

// Two-sample two-sided KS with asymptotic p-value; pass at p > 0.01.
TestResult ks_test_two_sample(std::span<const double> a,
                              std::span<const double> b,
                              std::string name = "ks2");

// Composite Simpson quadrature on [lo, hi] with n subintervals (n even).
double simpson(const std::function<double(double)>& f, double lo, double hi,
               std::size_t n = 10000);

}  // namespace heights::harness
