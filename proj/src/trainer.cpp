#include "covmpg/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "text_io.hpp"

namespace covmpg {

Backend parse_backend(const std::string& name) {
  if (name == "mlp") return Backend::Mlp;
  if (name == "fsr") return Backend::Fsr;
  throw ConfigError("unknown backend '" + name + "' (expected mlp or fsr)");
}

const char* backend_name(Backend b) {
  return b == Backend::Mlp ? "mlp" : "fsr";
}

void TrainConfig::validate() const {
  scenario.validate();
  if (episodes < 1) throw ConfigError("episodes must be positive");
  if (max_steps < 1) throw ConfigError("max_steps must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ConfigError("alpha must be positive");
  if (batch < 1) throw ConfigError("batch must be positive");
  if (!(eps_min >= 0.0 && eps_min <= eps_max && eps_max <= 1.0))
    throw ConfigError("need 0 <= eps_min <= eps_max <= 1");
  if (!(eps_decay > 0.0)) throw ConfigError("eps_decay must be positive");
  if (replay_capacity < 1) throw ConfigError("replay capacity must be positive");
  if (backend == Backend::Mlp) {
    if (hidden.empty()) throw ConfigError("mlp backend needs hidden layers");
    for (int h : hidden)
      if (h < 1) throw ConfigError("hidden sizes must be positive");
  }
}

double epsilon(long long step_count, const TrainConfig& cfg) {
  return std::max(cfg.eps_min,
                  cfg.eps_max * std::exp(-static_cast<double>(step_count) /
                                         cfg.eps_decay));
}

JointAction select_action(const QFunction& q, const JointState& s, double eps,
                          Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < eps) {
    std::uniform_int_distribution<std::size_t> pick(0, q.action_count() - 1);
    return joint_action_from_index(pick(rng), q.n_agents());
  }
  return greedy_joint_action(q, s).action;
}

std::unique_ptr<QFunction> make_qfunction(const TrainConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  if (cfg.backend == Backend::Fsr)
    return std::make_unique<FsrQ>(sc.dims, sc.n_agents);
  return std::make_unique<MlpQ>(sc.dims, sc.n_agents, cfg.hidden,
                                Mlp::Init::FanInUniform,
                                derive_seed(cfg.seed, 0));
}

TrainResult train(const TrainConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  return train(cfg, make_qfunction(cfg), observer);
}

TrainResult train(const TrainConfig& cfg, std::unique_ptr<QFunction> q,
                  const StepObserver& observer) {
  cfg.validate();
  const Scenario& sc = cfg.scenario;
  if (!q || q->n_agents() != sc.n_agents || !(q->dims() == sc.dims)) {
    throw ConfigError("Q function does not match the scenario");
  }

  Rng action_rng(derive_seed(cfg.seed, 1));
  Rng reset_rng(derive_seed(cfg.seed, 2));
  Rng sample_rng(derive_seed(cfg.seed, 3));
  ReplayBuffer buffer(cfg.replay_capacity);

  TrainResult result;
  result.episodes.reserve(cfg.episodes);
  long long step_count = 0;
  const auto batch = static_cast<std::size_t>(cfg.batch);

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const auto started = std::chrono::steady_clock::now();
    JointState s = reset(sc.dims, sc.n_agents, reset_rng);
    EpisodeRecord rec;
    rec.episode = ep;
    double loss_sum = 0.0;

    for (int t = 0; t < cfg.max_steps; ++t) {
      const double eps = epsilon(step_count, cfg);
      JointAction a = select_action(*q, s, eps, action_rng);
      JointState s_next = step(s, a, sc.dims);
      const int r = potential(s_next, sc.foi, sc.phi);
      rec.ret += r;
      rec.epsilon = eps;
      ++step_count;

      buffer.push({s, a, r, s_next});
      std::optional<double> loss;
      if (auto mb = buffer.sample(batch, sample_rng)) {
        loss = q->td_update(*mb, cfg.gamma, cfg.alpha);
        if (!std::isfinite(*loss) || !q->all_finite()) {
          throw std::runtime_error("training diverged at step " +
                                   std::to_string(step_count));
        }
        loss_sum += *loss;
        ++rec.updates;
      }
      if (observer) {
        observer(StepEvent{ep, t, step_count, eps, s, a, r, s_next, loss});
      }
      s = std::move(s_next);
    }

    rec.mean_loss = rec.updates ? loss_sum / rec.updates : 0.0;
    rec.duration_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
    result.episodes.push_back(rec);
  }
  result.q = std::move(q);
  result.buffer_size = buffer.size();
  return result;
}

namespace {

void write_comment(std::ostream& os, const std::string& comment) {
  if (!comment.empty()) os << "# " << comment << '\n';
}

}  // namespace

void write_episodes_csv(std::ostream& os,
                        const std::vector<EpisodeRecord>& records,
                        const std::string& header_comment) {
  write_comment(os, header_comment);
  os << "episode,return,epsilon,mean_loss,updates\n";
  for (const auto& r : records) {
    os << r.episode << ',' << r.ret << ',';
    detail::write_double(os, r.epsilon);
    os << ',';
    detail::write_double(os, r.mean_loss);
    os << ',' << r.updates << '\n';
  }
}

void write_timings_csv(std::ostream& os,
                       const std::vector<EpisodeRecord>& records,
                       const std::string& header_comment) {
  write_comment(os, header_comment);
  os << "episode,duration_ms\n";
  for (const auto& r : records) {
    os << r.episode << ',';
    detail::write_double(os, r.duration_ms);
    os << '\n';
  }
}

}  // namespace covmpg
