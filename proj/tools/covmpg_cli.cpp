// covmpg: train, execute and evaluate coverage-game policies.
//
//   covmpg train    --config <file> --out <dir>
//   covmpg execute  --checkpoint <file> --config <file> [--out <dir>]
//   covmpg evaluate --checkpoint <file> --config <file> [--trials <n>] [--out <dir>]
//
// Log verbosity follows the SPDLOG_LEVEL environment variable.

#include <spdlog/cfg/env.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "covmpg/eval.hpp"
#include "covmpg/execution.hpp"
#include "covmpg/run_config.hpp"
#include "covmpg/trainer.hpp"

namespace fs = std::filesystem;
using namespace covmpg;

namespace {

std::string provenance(const RunConfig& cfg) {
  return "covmpg seed=" + std::to_string(cfg.seed) +
         " config=" + resolved_json(cfg);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  return os;
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  try {
    return load_checkpoint(in);
  } catch (const std::exception& e) {
    throw std::runtime_error("checkpoint '" + path + "' is unreadable: " +
                             e.what());
  }
}

int cmd_train(const std::string& config_path, const fs::path& out) {
  const RunConfig cfg = load_run_config(config_path);
  spdlog::info("training {} agents on {}x{}x{}, {} episodes x {} steps ({})",
               cfg.n_agents, cfg.dims.nx, cfg.dims.ny, cfg.dims.nz,
               cfg.train.episodes, cfg.train.max_steps,
               backend_name(cfg.train.backend));
  const TrainResult result = train(cfg.train);
  for (const auto& r : result.episodes) {
    spdlog::debug("episode {} return {} eps {:.4f} loss {:.4f} ({:.0f} ms)",
                  r.episode, r.ret, r.epsilon, r.mean_loss, r.duration_ms);
  }

  fs::create_directories(out);
  const std::string prov = provenance(cfg);
  {
    auto os = open_out(out / "checkpoint.txt");
    save_checkpoint(os, cfg, *result.q);
  }
  {
    auto os = open_out(out / "episodes.csv");
    write_episodes_csv(os, result.episodes, prov);
  }
  {
    auto os = open_out(out / "timings.csv");
    write_timings_csv(os, result.episodes, prov);
  }
  {
    auto os = open_out(out / "config.json");
    os << resolved_json(cfg) << '\n';
  }
  spdlog::info("wrote {}", out.string());
  return 0;
}

int cmd_execute(const std::string& ck_path, const std::string& config_path,
                const fs::path& out) {
  const RunConfig cfg = load_run_config(config_path);
  const Checkpoint ck = read_checkpoint(ck_path);
  check_compatible(ck, cfg);
  const ExecTrace trace =
      execute(*ck.q, ck.scenario, execution_start(cfg), cfg.exec);
  fs::create_directories(out);
  auto os = open_out(out / "trace.csv");
  write_trace_csv(os, trace, provenance(cfg));
  if (trace.steps_to_convergence) {
    spdlog::info("converged at step {}, J = {}", *trace.steps_to_convergence,
                 trace.potentials.back());
  } else {
    spdlog::info("not converged within {} steps, J = {}", cfg.exec.max_steps,
                 trace.potentials.back());
  }
  return 0;
}

int cmd_evaluate(const std::string& ck_path, const std::string& config_path,
                 std::optional<int> trials, const fs::path& out) {
  RunConfig cfg = load_run_config(config_path);
  if (trials) {
    if (*trials < 1) throw ConfigError("--trials must be >= 1");
    cfg.trials = *trials;
  }
  const Checkpoint ck = read_checkpoint(ck_path);
  check_compatible(ck, cfg);
  const McSummary summary =
      monte_carlo(*ck.q, ck.scenario, cfg.exec, cfg.trials, cfg.seed);
  fs::create_directories(out);
  {
    auto os = open_out(out / "summary.json");
    write_summary_json(os, summary, resolved_json(cfg));
  }
  {
    auto os = open_out(out / "histogram.csv");
    write_histogram_csv(os, summary, provenance(cfg));
  }
  spdlog::info("{}/{} converged, mean {:.3f} std {:.3f} steps",
               summary.converged_count, summary.trials, summary.mean_steps,
               summary.std_steps);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::cfg::load_env_levels();

  CLI::App app{"Coverage Markov potential game: training and execution"};
  app.require_subcommand(1);

  std::string config;
  std::string checkpoint;
  std::string out = ".";
  std::optional<int> trials;

  auto* train_cmd = app.add_subcommand("train", "Train a Q function");
  train_cmd->add_option("--config", config, "Run configuration (JSON)")->required();
  train_cmd->add_option("--out", out, "Output directory")->required();

  auto* exec_cmd = app.add_subcommand("execute", "Run one best-response trace");
  exec_cmd->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  exec_cmd->add_option("--config", config, "Run configuration (JSON)")->required();
  exec_cmd->add_option("--out", out, "Output directory");

  auto* eval_cmd = app.add_subcommand("evaluate", "Monte Carlo execution statistics");
  eval_cmd->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  eval_cmd->add_option("--config", config, "Run configuration (JSON)")->required();
  eval_cmd->add_option("--trials", trials, "Number of trials (overrides config)");
  eval_cmd->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(config, out);
    if (*exec_cmd) return cmd_execute(checkpoint, config, out);
    if (*eval_cmd) return cmd_evaluate(checkpoint, config, trials, out);
  } catch (const ConfigError& e) {
    spdlog::error("invalid configuration: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
