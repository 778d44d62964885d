#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "covmpg/game.hpp"
#include "covmpg/qfunc.hpp"

namespace covmpg {

struct ExecConfig {
  int max_steps = 20;
  int sweep_limit = 10;
  int stable_window = 3;

  void validate() const;
};

struct ExecTrace {
  std::vector<JointState> states;    // s_0 .. s_T
  std::vector<JointAction> actions;  // actions[t] moves states[t] to states[t+1]
  std::vector<int> potentials;       // J(states[t])
  /// Step t + 1 for the first t with states[t] == ... == states[t + window]:
  /// transitions are numbered from 1 and this is the first one of the
  /// stable run. A trace that never moves converges at step 1.
  std::optional<int> steps_to_convergence;
  /// Same rule applied to potentials[] instead of states[]. Diagnostic only.
  std::optional<int> potential_stable_step;
};

/// Agent i's best own action with every other agent's action held at
/// `joint`. Ties go to the lowest action index.
Action best_response_action(const QFunction& q, const JointState& s,
                            const JointAction& joint, int i);
/// Same, reading from precomputed Q(s, .) values.
Action best_response_action(const Eigen::VectorXd& values,
                            const JointAction& joint, int i);

struct SweepOutcome {
  JointAction action;
  int sweeps = 0;
  bool stable = false;  // last sweep changed nothing
};

/// Round-robin best responses (agent 0 first) until a full sweep leaves the
/// joint action unchanged or `sweep_limit` sweeps have run.
SweepOutcome best_response_sweep_detailed(const QFunction& q,
                                          const JointState& s,
                                          JointAction init, int sweep_limit);
JointAction best_response_sweep(const QFunction& q, const JointState& s,
                                JointAction init, int sweep_limit);

/// Closed-loop decentralized execution from s0. Each step warm-starts the
/// sweep from the previous joint action (all index 0 on the first step).
ExecTrace execute(const QFunction& q, const Scenario& sc, const JointState& s0,
                  const ExecConfig& cfg);

/// Columns: step, then x<i>,y<i>,z<i> per agent, then J.
void write_trace_csv(std::ostream& os, const ExecTrace& trace,
                     const std::string& header_comment = {});

}  // namespace covmpg
