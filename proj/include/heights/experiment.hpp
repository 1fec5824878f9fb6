#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "heights/stats.hpp"

// Experiment orchestration: configuration, deterministic per-path RNG
// streams, worker fan-out, statistical comparisons and report serialization.
namespace heights::harness {

enum class ExperimentKind {
  simulate,    // dump one (optionally marked) path as CSV
  ray_knight,  // Laplace transform of the stopped local-time field vs closed form
  projection,  // projected vs directly simulated marginal + composition identity
  pruning,     // pruned field vs closed form at theta+gamma + 4*gamma*A identity
  occupation,  // occupation-time functionals vs x * int e^{-4 theta r} g(r) dr
  girsanov,    // direct vs reweighted estimators of E[e^{-lambda Z_a}]
  extinction,  // exact-sampler absorption frequency vs closed form
  stationary,  // long-run marginal KS vs the stationary density (pruned if gamma>0)
};

std::string to_string(ExperimentKind k);
ExperimentKind kind_from_string(const std::string& s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ray_knight;
  double theta = 0.0;
  double gamma = 0.0;
  double a = 1.0;
  double b = 0.0;  // optional sub-barrier; 0 means unset
  double x = 1.0;
  std::vector<double> lambdas{0.5, 1.0, 2.0};
  std::vector<double> levels{0.5, 1.0};
  double dt = 1e-4;
  double epsilon = 0.0;  // 0 means default 0.02 * a
  std::size_t n_paths = 10000;
  double horizon = 5.0;
  std::uint64_t seed = 20260823;
  std::uint64_t max_steps = 2'000'000'000;
  unsigned threads = 0;  // 0 means hardware concurrency
  std::string out_dir;   // empty means no files written

  double eps() const { return epsilon > 0.0 ? epsilon : 0.02 * a; }
  void validate() const;
  nlohmann::json to_json() const;
};

// Flat key-value config file: one `key = value` per line, '#' comments,
// comma-separated lists for lambdas/levels.
ExperimentConfig parse_config_file(const std::string& path);

struct ExperimentReport {
  int schema_version = 1;
  ExperimentConfig config;
  std::vector<TestResult> results;
  double runtime_seconds = 0.0;
  bool all_pass = true;
  // Kind-specific tables (mean field, marginals, ...), written as CSV
  // alongside the JSON report.
  std::vector<std::pair<std::string, std::vector<std::vector<double>>>> tables;
  std::vector<std::string> table_headers;

  nlohmann::json to_json() const;
};

// Runs the experiment with per-path RNG streams derived from (seed, path
// index); writes report.json and companion CSV tables when out_dir is set.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

void write_report(const ExperimentReport& report);

// Claims path indices from an atomic counter; body(i) must touch only
// slot i of any shared output, so results are identical for any thread count.
void parallel_paths(std::size_t n, unsigned threads,
                    const std::function<void(std::size_t)>& body);

void print_results(const ExperimentReport& report);

}  // namespace heights::harness
