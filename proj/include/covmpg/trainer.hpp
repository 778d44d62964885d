#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "covmpg/game.hpp"
#include "covmpg/qfunc.hpp"

namespace covmpg {

enum class Backend { Mlp, Fsr };
Backend parse_backend(const std::string& name);
const char* backend_name(Backend b);

struct TrainConfig {
  Scenario scenario;
  int episodes = 400;
  int max_steps = 200;
  double gamma = 0.9;
  double alpha = 1e-3;
  int batch = 64;
  double eps_max = 1.0;
  double eps_min = 0.05;
  double eps_decay = 10000.0;  // steps per e-fold of the exploration rate
  std::uint64_t seed = 0;
  Backend backend = Backend::Mlp;
  std::vector<int> hidden{64, 64};
  std::size_t replay_capacity = ReplayBuffer::kDefaultCapacity;

  void validate() const;
};

struct EpisodeRecord {
  int episode = 0;
  long long ret = 0;
  double duration_ms = 0.0;
  double epsilon = 0.0;    // rate used on the episode's last step
  double mean_loss = 0.0;  // over the episode's TD updates, 0 if none
  int updates = 0;
};

/// Per-step view handed to an optional observer during training.
struct StepEvent {
  int episode;
  int t;
  long long step_count;  // global counter after this step
  double epsilon;
  const JointState& s;
  const JointAction& a;
  int reward;
  const JointState& s_next;
  std::optional<double> loss;
};

using StepObserver = std::function<void(const StepEvent&)>;

struct TrainResult {
  std::unique_ptr<QFunction> q;
  std::vector<EpisodeRecord> episodes;
  std::size_t buffer_size = 0;
};

/// max(eps_min, eps_max * exp(-step_count / eps_decay)).
double epsilon(long long step_count, const TrainConfig& cfg);

/// With probability eps a uniform joint action, otherwise the greedy one.
/// Always consumes exactly one uniform draw, plus one more when exploring.
JointAction select_action(const QFunction& q, const JointState& s, double eps,
                          Rng& rng);

std::unique_ptr<QFunction> make_qfunction(const TrainConfig& cfg);

/// Centralized Q-learning on the potential: each step the global reward is
/// J of the post-transition state, the transition goes into replay, and one
/// TD minibatch update runs once the buffer holds a full batch.
TrainResult train(const TrainConfig& cfg, const StepObserver& observer = {});

/// Training on an existing Q (used by tests that pre-shape the backend).
TrainResult train(const TrainConfig& cfg, std::unique_ptr<QFunction> q,
                  const StepObserver& observer = {});

/// Deterministic metrics: episode,return,epsilon,mean_loss,updates.
void write_episodes_csv(std::ostream& os,
                        const std::vector<EpisodeRecord>& records,
                        const std::string& header_comment = {});
/// Wall-clock metrics: episode,duration_ms.
void write_timings_csv(std::ostream& os,
                       const std::vector<EpisodeRecord>& records,
                       const std::string& header_comment = {});

}  // namespace covmpg
