#include "covmpg/execution.hpp"

#include <ostream>
#include <stdexcept>

namespace covmpg {

void ExecConfig::validate() const {
  if (max_steps < 0) throw ConfigError("execution max_steps must be >= 0");
  if (sweep_limit < 1) throw ConfigError("sweep_limit must be positive");
  if (stable_window < 1) throw ConfigError("stable_window must be positive");
}

Action best_response_action(const Eigen::VectorXd& values,
                            const JointAction& joint, int i) {
  JointAction trial = joint;
  Action best = kAllActions[0];
  double best_value = 0.0;
  for (int k = 0; k < kActionCount; ++k) {
    trial[i] = kAllActions[k];
    const double v =
        values(static_cast<Eigen::Index>(joint_action_index(trial)));
    if (k == 0 || v > best_value) {
      best = kAllActions[k];
      best_value = v;
    }
  }
  return best;
}

Action best_response_action(const QFunction& q, const JointState& s,
                            const JointAction& joint, int i) {
  if (i < 0 || i >= q.n_agents()) throw std::out_of_range("agent index");
  if (static_cast<int>(joint.size()) != q.n_agents()) {
    throw std::invalid_argument("joint action has wrong agent count");
  }
  return best_response_action(q.all_values(s), joint, i);
}

SweepOutcome best_response_sweep_detailed(const QFunction& q,
                                          const JointState& s,
                                          JointAction init, int sweep_limit) {
  if (static_cast<int>(init.size()) != q.n_agents()) {
    throw std::invalid_argument("joint action has wrong agent count");
  }
  const Eigen::VectorXd values = q.all_values(s);
  SweepOutcome out{std::move(init), 0, false};
  while (out.sweeps < sweep_limit) {
    ++out.sweeps;
    bool changed = false;
    for (int i = 0; i < q.n_agents(); ++i) {
      const Action br = best_response_action(values, out.action, i);
      if (br != out.action[i]) {
        out.action[i] = br;
        changed = true;
      }
    }
    if (!changed) {
      out.stable = true;
      break;
    }
  }
  return out;
}

JointAction best_response_sweep(const QFunction& q, const JointState& s,
                                JointAction init, int sweep_limit) {
  return best_response_sweep_detailed(q, s, std::move(init), sweep_limit)
      .action;
}

namespace {

template <class T>
std::optional<int> first_stable_run(const std::vector<T>& seq, int window) {
  int run_start = 0;
  for (int t = 1; t < static_cast<int>(seq.size()); ++t) {
    if (!(seq[t] == seq[t - 1])) run_start = t;
    if (t - run_start >= window) return run_start + 1;
  }
  return std::nullopt;
}

}  // namespace

ExecTrace execute(const QFunction& q, const Scenario& sc, const JointState& s0,
                  const ExecConfig& cfg) {
  cfg.validate();
  if (!valid_joint_state(s0, sc.dims) ||
      static_cast<int>(s0.size()) != q.n_agents()) {
    throw std::invalid_argument("initial joint state is invalid");
  }
  ExecTrace trace;
  trace.states.push_back(s0);
  trace.potentials.push_back(potential(s0, sc.foi, sc.phi));
  JointAction a(s0.size(), kAllActions[0]);
  for (int t = 0; t < cfg.max_steps; ++t) {
    a = best_response_sweep(q, trace.states.back(), a, cfg.sweep_limit);
    JointState next = step(trace.states.back(), a, sc.dims);
    trace.potentials.push_back(potential(next, sc.foi, sc.phi));
    trace.actions.push_back(a);
    trace.states.push_back(std::move(next));
  }

  const int window = cfg.stable_window;
  trace.steps_to_convergence = first_stable_run(trace.states, window);
  trace.potential_stable_step = first_stable_run(trace.potentials, window);
  return trace;
}

void write_trace_csv(std::ostream& os, const ExecTrace& trace,
                     const std::string& header_comment) {
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  const std::size_t n = trace.states.empty() ? 0 : trace.states[0].size();
  os << "step";
  for (std::size_t i = 0; i < n; ++i)
    os << ",x" << i << ",y" << i << ",z" << i;
  os << ",J\n";
  for (std::size_t t = 0; t < trace.states.size(); ++t) {
    os << t;
    for (const auto& a : trace.states[t]) os << ',' << a.x << ',' << a.y << ',' << a.z;
    os << ',' << trace.potentials[t] << '\n';
  }
}

}  // namespace covmpg
