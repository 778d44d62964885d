#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "covmpg/execution.hpp"
#include "covmpg/game.hpp"
#include "covmpg/qfunc.hpp"
#include "covmpg/trainer.hpp"

namespace covmpg {

/// Everything one CLI invocation needs. Parsed from JSON; see
/// docs/config.md for the schema.
struct RunConfig {
  std::string preset;  // empty when the scenario is given explicitly
  GridDims dims;
  int n_agents = 0;
  int target_count = 0;
  FovHalfAngles phi;
  std::uint64_t seed = 0;
  TrainConfig train;  // train.scenario is filled by resolve_scenario
  ExecConfig exec;
  int trials = 50;

  void validate() const;
};

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset(const std::string& name);

/// Parses and validates; throws ConfigError with a readable message.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// The run's scenario; the FOI is drawn from stream 100 of the seed.
Scenario resolve_scenario(const RunConfig& cfg);
/// RunConfig with train.scenario populated.
RunConfig resolved(RunConfig cfg);

/// Canonical one-line JSON of every resolved parameter (stable key order).
std::string resolved_json(const RunConfig& cfg);

/// Initial joint state used by single-trace execution.
JointState execution_start(const RunConfig& cfg);

struct Checkpoint {
  std::string config_json;
  Scenario scenario;
  std::unique_ptr<QFunction> q;
};

/// Header line, config snapshot, scenario (dims, agents, phi, FOI), then the
/// Q-function record.
void save_checkpoint(std::ostream& os, const RunConfig& cfg,
                     const QFunction& q);
/// Throws std::runtime_error on any malformed or truncated input.
Checkpoint load_checkpoint(std::istream& is);

/// Throws ConfigError if the checkpoint was trained on a different scenario
/// or backend than `cfg` describes.
void check_compatible(const Checkpoint& ck, const RunConfig& cfg);

}  // namespace covmpg
