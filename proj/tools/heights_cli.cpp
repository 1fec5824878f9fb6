// Command-line front end: runs one experiment per subcommand (or a config
// file) and writes report.json plus CSV tables. Exit code 0 iff every test
// in the run passes.

#include <cstdio>
#include <exception>
#include <vector>

#include "CLI11.hpp"

#include "heights/experiment.hpp"
#include "heights/pathops.hpp"

using heights::harness::ExperimentConfig;
using heights::harness::ExperimentKind;

namespace {

void add_common_options(CLI::App* cmd, ExperimentConfig& cfg,
                        std::string* config_path) {
  cmd->add_option("--config", *config_path,
                  "config file (explicit flags override its values)");
  cmd->add_option("--theta", cfg.theta, "branching/drift parameter");
  cmd->add_option("--gamma", cfg.gamma, "pruning intensity");
  cmd->add_option("--a", cfg.a, "upper barrier");
  cmd->add_option("--b", cfg.b, "sub-barrier (projection/consistency)");
  cmd->add_option("--x", cfg.x, "initial mass (local-time stopping level)");
  cmd->add_option("--lambda", cfg.lambdas, "Laplace-transform grid")->delimiter(',');
  cmd->add_option("--levels", cfg.levels, "field level grid")->delimiter(',');
  cmd->add_option("--dt", cfg.dt, "grid step");
  cmd->add_option("--eps", cfg.epsilon, "band width (default 0.02*a)");
  cmd->add_option("--paths", cfg.n_paths, "number of Monte-Carlo paths");
  cmd->add_option("--horizon", cfg.horizon, "time horizon");
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--max-steps", cfg.max_steps, "per-path step budget");
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = auto)");
  cmd->add_option("--out", cfg.out_dir, "output directory for report/CSV");
}

// Loads `path` and overrides every field whose flag was passed explicitly.
ExperimentConfig merge_config(CLI::App* cmd, const ExperimentConfig& cli,
                              const std::string& path) {
  ExperimentConfig out = heights::harness::parse_config_file(path);
  out.kind = cli.kind;  // the subcommand decides the experiment
  if (cmd->count("--theta")) out.theta = cli.theta;
  if (cmd->count("--gamma")) out.gamma = cli.gamma;
  if (cmd->count("--a")) out.a = cli.a;
  if (cmd->count("--b")) out.b = cli.b;
  if (cmd->count("--x")) out.x = cli.x;
  if (cmd->count("--lambda")) out.lambdas = cli.lambdas;
  if (cmd->count("--levels")) out.levels = cli.levels;
  if (cmd->count("--dt")) out.dt = cli.dt;
  if (cmd->count("--eps")) out.epsilon = cli.epsilon;
  if (cmd->count("--paths")) out.n_paths = cli.n_paths;
  if (cmd->count("--horizon")) out.horizon = cli.horizon;
  if (cmd->count("--seed")) out.seed = cli.seed;
  if (cmd->count("--max-steps")) out.max_steps = cli.max_steps;
  if (cmd->count("--threads")) out.threads = cli.threads;
  if (cmd->count("--out")) out.out_dir = cli.out_dir;
  return out;
}

int run(const ExperimentConfig& cfg) {
  try {
    auto report = heights::harness::run_experiment(cfg);
    heights::harness::print_results(report);
    if (report.results.empty())
      std::printf("done (%.2f s)\n", report.runtime_seconds);
    return report.all_pass ? 0 : 1;
  } catch (const heights::pathops::MaxStepsExceeded& e) {
    std::fprintf(stderr,
                 "error: %s (reached local time %.6g; raise --max-steps)\n",
                 e.what(), e.achieved_local_time);
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo experiments on reflected-Brownian height processes"};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path, "run an experiment from a config file");

  struct Sub {
    const char* name;
    const char* help;
    ExperimentKind kind;
  };
  const std::vector<Sub> subs = {
      {"simulate", "dump one reflected (optionally marked) path as CSV",
       ExperimentKind::simulate},
      {"ray-knight", "local-time field Laplace transform vs closed form",
       ExperimentKind::ray_knight},
      {"prune", "pruned field vs closed form at theta+gamma",
       ExperimentKind::pruning},
      {"project", "projected vs direct marginal + composition identity",
       ExperimentKind::projection},
      {"occupation", "occupation-time functionals vs closed form",
       ExperimentKind::occupation},
      {"girsanov", "direct vs reweighted field estimators",
       ExperimentKind::girsanov},
      {"extinction", "absorption frequency vs closed form",
       ExperimentKind::extinction},
      {"stationary", "long-run marginal KS test", ExperimentKind::stationary},
  };

  std::vector<ExperimentConfig> cfgs(subs.size());
  std::vector<std::string> sub_config_paths(subs.size());
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    cfgs[i].kind = subs[i].kind;
    if (subs[i].kind == ExperimentKind::extinction) cfgs[i].horizon = 20.0;
    add_common_options(cmd, cfgs[i], &sub_config_paths[i]);
    cmds.push_back(cmd);
  }

  auto* verify = app.add_subcommand(
      "verify-all", "run every statistical experiment at moderate scale");
  ExperimentConfig vcfg;
  vcfg.n_paths = 2000;
  std::string verify_config_path;
  add_common_options(verify, vcfg, &verify_config_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // 0 for --help, 2 for usage errors
  }

  if (!config_path.empty()) {
    try {
      return run(heights::harness::parse_config_file(config_path));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!cmds[i]->parsed()) continue;
    if (sub_config_paths[i].empty()) return run(cfgs[i]);
    try {
      return run(merge_config(cmds[i], cfgs[i], sub_config_paths[i]));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  }

  if (verify->parsed()) {
    if (!verify_config_path.empty()) {
      try {
        vcfg = merge_config(verify, vcfg, verify_config_path);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
      }
    }
    int status = 0;
    auto one = [&](ExperimentKind kind, auto&& tweak) {
      ExperimentConfig c = vcfg;
      c.kind = kind;
      tweak(c);
      std::printf("== %s ==\n", heights::harness::to_string(kind).c_str());
      status |= run(c);
    };
    one(ExperimentKind::extinction, [](ExperimentConfig& c) {
      if (c.theta == 0.0) c.theta = -0.5;
      c.horizon = 20.0;
    });
    one(ExperimentKind::stationary, [](ExperimentConfig& c) {});
    one(ExperimentKind::occupation, [](ExperimentConfig& c) {});
    one(ExperimentKind::ray_knight, [](ExperimentConfig& c) {
      c.levels = {0.25 * c.a, 0.5 * c.a};
    });
    one(ExperimentKind::projection, [](ExperimentConfig& c) {
      if (c.b == 0.0) c.b = 0.5 * c.a;
    });
    one(ExperimentKind::pruning, [](ExperimentConfig& c) {
      if (c.gamma == 0.0) c.gamma = 0.5;
      c.levels = {0.25 * c.a, 0.5 * c.a};
    });
    one(ExperimentKind::girsanov, [](ExperimentConfig& c) {
      if (c.theta == 0.0) c.theta = 0.5;
      c.lambdas = {1.0};
    });
    return status;
  }

  std::puts(app.help().c_str());
  return 0;
}
