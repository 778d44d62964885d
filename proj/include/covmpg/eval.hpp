#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "covmpg/execution.hpp"
#include "covmpg/game.hpp"
#include "covmpg/qfunc.hpp"

namespace covmpg {

/// Steps-to-convergence statistics. Mean and (population) standard deviation
/// are taken over converged trials only; both are 0 when none converged.
struct McSummary {
  int trials = 0;
  int converged_count = 0;
  double mean_steps = 0.0;
  double std_steps = 0.0;
  std::map<int, int> histogram;  // steps -> converged trials
  double mean_final_potential = 0.0;  // over all trials
  int potential_stable_count = 0;     // traces whose J settles
};

/// Runs `trials` executions from seeded uniform random initial states. Trial
/// k draws its start from stream derive_seed(seed, k).
McSummary monte_carlo(const QFunction& q, const Scenario& sc,
                      const ExecConfig& cfg, int trials, std::uint64_t seed);

void write_summary_json(std::ostream& os, const McSummary& s,
                        const std::string& config_json = {});
void write_histogram_csv(std::ostream& os, const McSummary& s,
                         const std::string& header_comment = {});

/// Fully enumerated deterministic MDP of a small scenario: every joint
/// state, every joint action, next state by env::step and reward J(s').
/// State indices follow FsrQ::state_index.
struct TinyMdp {
  Scenario scenario;
  std::vector<JointState> states;
  std::size_t actions = 0;
  std::vector<std::size_t> next;  // states x actions
  std::vector<int> reward;        // states x actions

  static constexpr std::size_t kMaxPairs = 20000;
  static TinyMdp build(const Scenario& sc);

  [[nodiscard]] std::size_t pair(std::size_t s, std::size_t a) const {
    return s * actions + a;
  }
};

struct ValueIterationResult {
  Eigen::MatrixXd q;            // states x actions
  std::vector<double> changes;  // max |delta| per sweep
  int sweeps = 0;
};

/// Q*(s,a) = r(s,a) + gamma * max_a' Q*(s',a') by fixed-point sweeps until
/// the max change is below tol.
ValueIterationResult value_iteration(const TinyMdp& mdp, double gamma,
                                     double tol);

/// max |Q(s,a) - Q*(s,a)| over all enumerated pairs.
double max_abs_error(const QFunction& q, const TinyMdp& mdp,
                     const Eigen::MatrixXd& q_star);

}  // namespace covmpg
