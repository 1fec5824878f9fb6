#include "heights/stats.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace heights::harness {

TestResult mean_compare(const MeanAcc& acc, double target, double bias,
                        std::string name) {
  TestResult r;
  r.name = std::move(name);
  r.estimate = acc.mean();
  r.se = acc.se();
  r.target = target;
  r.tol_stat = 3.0 * r.se;
  r.tol_bias = bias;
  r.n_effective = static_cast<double>(acc.n);
  r.pass = std::abs(r.estimate - r.target) <= r.tolerance();
  return r;
}

TestResult mean_compare(std::span<const double> samples, double target,
                        double bias, std::string name) {
  MeanAcc acc;
  for (double v : samples) acc.add(v);
  return mean_compare(acc, target, bias, std::move(name));
}

TestResult laplace_compare(std::span<const double> samples, double lambda,
                           double target, double bias, std::string name) {
  if (lambda < 0.0) throw std::domain_error("laplace_compare: lambda >= 0");
  if (samples.empty()) throw std::domain_error("laplace_compare: no samples");
  MeanAcc acc;
  for (double v : samples) acc.add(std::exp(-lambda * v));
  return mean_compare(acc, target, bias, std::move(name));
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

TestResult ks_test(std::span<const double> samples,
                   const std::function<double(double)>& cdf,
                   std::string name) {
  if (samples.size() < 100) throw std::domain_error("ks_test: need >= 100 samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  TestResult r;
  r.name = std::move(name);
  r.estimate = d;
  r.n_effective = n;
  r.p_value = kolmogorov_sf(std::sqrt(n) * d);
  r.pass = r.p_value > 0.01;
  return r;
}

TestResult ks_test_two_sample(std::span<const double> a,
                              std::span<const double> b, std::string name) {
  if (a.size() < 100 || b.size() < 100)
    throw std::domain_error("ks_test_two_sample: need >= 100 samples per side");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= v) ++i;
    while (j < sb.size() && sb[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  TestResult r;
  r.name = std::move(name);
  r.estimate = d;
  r.n_effective = ne;
  r.p_value = kolmogorov_sf(std::sqrt(ne) * d);
  r.pass = r.p_value > 0.01;
  return r;
}

double simpson(const std::function<double(double)>& f, double lo, double hi,
               std::size_t n) {
  if (n % 2) ++n;
  const double h = (hi - lo) / static_cast<double>(n);
  double s = f(lo) + f(hi);
  for (std::size_t i = 1; i < n; ++i)
    s += f(lo + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace heights::harness
