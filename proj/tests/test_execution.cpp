#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "covmpg/execution.hpp"
#include "oracles.hpp"

using namespace covmpg;

namespace {

const GridDims kDims{4, 4, 3};

Scenario scenario(int n) {
  return {kDims, n, FieldOfInterest(4, 4, {{0, 0}, {1, 1}, {2, 2}, {3, 3}}), {}};
}

// Fills Q(s, .) with random values for one state.
void randomise(FsrQ& q, const JointState& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t a = 0; a < q.action_count(); ++a) q.set_weight(s, joint_action_from_index(a, q.n_agents()), u(rng));
}

bool unilaterally_stable(const QFunction& q, const JointState& s,
                         const JointAction& a) {
  const Eigen::VectorXd v = q.all_values(s);
  const double here = v(static_cast<Eigen::Index>(joint_action_index(a)));
  for (int i = 0; i < q.n_agents(); ++i) {
    JointAction dev = a;
    for (Action b : kAllActions) {
      dev[i] = b;
      if (v(static_cast<Eigen::Index>(joint_action_index(dev))) > here) return false;
    }
  }
  return true;
}

}  // namespace

TEST(BestResponse, ZeroQPicksFirstAction) {
  const FsrQ q(kDims, 2);
  const JointState s{{1, 1, 1}, {2, 2, 2}};
  const JointAction others{Action::East, Action::Down};
  EXPECT_EQ(best_response_action(q, s, others, 0), Action::North);
  EXPECT_EQ(best_response_action(q, s, others, 1), Action::North);
}

TEST(BestResponse, HandSetPreferenceIsFollowed) {
  FsrQ q(kDims, 2);
  const JointState s{{1, 1, 1}, {2, 2, 2}};
  q.set_weight(s, {Action::West, Action::Up}, 1.0);
  EXPECT_EQ(best_response_action(q, s, {Action::West, Action::South}, 1), Action::Up);
  // With agent 0 elsewhere the preferred entry is out of reach.
  EXPECT_EQ(best_response_action(q, s, {Action::East, Action::South}, 1), Action::North);
}

TEST(BestResponse, MatchesEnumerationOfOwnActions) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    FsrQ q(kDims, n);
    const auto s = oracle::random_joint(kDims, n, rng);
    randomise(q, s, rng);
    const auto joint = joint_action_from_index(
        std::uniform_int_distribution<std::size_t>(0, q.action_count() - 1)(rng), n);
    const int i = std::uniform_int_distribution<int>(0, n - 1)(rng);
    JointAction probe = joint;
    Action best = Action::North;
    double best_v = -1e9;
    for (Action b : kAllActions) {
      probe[i] = b;
      const double v = q.value(s, probe);
      if (v > best_v) best_v = v, best = b;
    }
    ASSERT_EQ(best_response_action(q, s, joint, i), best);
  }
}

TEST(BestResponse, BadArguments) {
  const FsrQ q(kDims, 2);
  const JointState s{{1, 1, 1}, {2, 2, 2}};
  EXPECT_THROW(best_response_action(q, s, {Action::Up, Action::Up}, 2), std::out_of_range);
  EXPECT_THROW(best_response_action(q, s, {Action::Up}, 0), std::invalid_argument);
}

TEST(BestResponseSweep, FixedPointIsReturnedAfterOneSweep) {
  FsrQ q(kDims, 2);
  const JointState s{{1, 1, 1}, {2, 2, 2}};
  const JointAction fixed{Action::East, Action::Up};
  q.set_weight(s, fixed, 2.0);
  const auto out = best_response_sweep_detailed(q, s, fixed, 10);
  EXPECT_EQ(out.action, fixed);
  EXPECT_EQ(out.sweeps, 1);
  EXPECT_TRUE(out.stable);
}

TEST(BestResponseSweep, SingleAgentIsPlainArgmax) {
  std::mt19937_64 rng(4);
  FsrQ q(kDims, 1);
  const JointState s{{2, 1, 3}};
  randomise(q, s, rng);
  const auto greedy = greedy_joint_action(q, s);
  EXPECT_EQ(best_response_sweep(q, s, {Action::Down}, 10), greedy.action);
}

TEST(BestResponseSweep, ResultIsUnilaterallyStable) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    FsrQ q(kDims, n);
    const auto s = oracle::random_joint(kDims, n, rng);
    randomise(q, s, rng);
    const auto init = joint_action_from_index(
        std::uniform_int_distribution<std::size_t>(0, q.action_count() - 1)(rng), n);
    // A shared objective strictly improves with every change, so the sweep
    // settles well within the limit.
    const auto out = best_response_sweep_detailed(q, s, init, 100);
    ASSERT_TRUE(out.stable);
    ASSERT_TRUE(unilaterally_stable(q, s, out.action)) << "trial " << trial;
  }
}

TEST(Execute, StayingPutConvergesAtStepOne) {
  FsrQ q(kDims, 2);
  const JointState s0{{1, 1, 3}, {2, 2, 3}};
  // Each agent gains by pressing Up against the ceiling, whatever the other does.
  for (std::size_t k = 0; k < q.action_count(); ++k) {
    const auto a = joint_action_from_index(k, 2);
    q.set_weight(s0, a, (a[0] == Action::Up) + (a[1] == Action::Up));
  }
  const auto trace = execute(q, scenario(2), s0, {});
  ASSERT_EQ(trace.states.size(), 21u);
  for (const auto& s : trace.states) EXPECT_EQ(s, s0);
  ASSERT_TRUE(trace.steps_to_convergence);
  EXPECT_EQ(*trace.steps_to_convergence, 1);
  EXPECT_EQ(trace.potential_stable_step, trace.steps_to_convergence);
}

TEST(Execute, OneMoveThenStable) {
  FsrQ q(kDims, 1);
  const JointState s0{{1, 1, 2}};
  const JointState s1{{1, 1, 3}};
  q.set_weight(s0, {Action::Up}, 1.0);
  q.set_weight(s1, {Action::Up}, 1.0);
  const auto trace = execute(q, scenario(1), s0, {8, 10, 3});
  EXPECT_EQ(trace.states[1], s1);
  ASSERT_TRUE(trace.steps_to_convergence);
  EXPECT_EQ(*trace.steps_to_convergence, 2);
}

TEST(Execute, OscillationKeepsJStableWithoutConverging) {
  FsrQ q(kDims, 1);
  const Scenario sc{kDims, 1, FieldOfInterest(4, 4, {{3, 3}}), {}};
  const JointState s0{{0, 0, 1}};
  const JointState s1{{1, 0, 1}};
  q.set_weight(s0, {Action::East}, 1.0);
  q.set_weight(s1, {Action::West}, 1.0);
  const auto trace = execute(q, sc, s0, {});
  for (std::size_t t = 0; t < trace.states.size(); ++t) {
    EXPECT_EQ(trace.states[t], t % 2 ? s1 : s0);
    EXPECT_EQ(trace.potentials[t], 0);
  }
  EXPECT_FALSE(trace.steps_to_convergence);
  ASSERT_TRUE(trace.potential_stable_step);
  EXPECT_EQ(*trace.potential_stable_step, 1);
}

TEST(Execute, ZeroStepsGivesSingleStateAndNoConvergence) {
  const FsrQ q(kDims, 2);
  const JointState s0{{1, 1, 1}, {2, 2, 2}};
  const auto trace = execute(q, scenario(2), s0, {0, 10, 3});
  EXPECT_EQ(trace.states.size(), 1u);
  EXPECT_EQ(trace.potentials.size(), 1u);
  EXPECT_TRUE(trace.actions.empty());
  EXPECT_FALSE(trace.steps_to_convergence);
}

TEST(Execute, WindowMustFitInTrace) {
  FsrQ q(kDims, 1);
  const JointState s0{{1, 1, 3}};
  q.set_weight(s0, {Action::Up}, 1.0);
  EXPECT_FALSE(execute(q, scenario(1), s0, {2, 10, 3}).steps_to_convergence);
  EXPECT_TRUE(execute(q, scenario(1), s0, {3, 10, 3}).steps_to_convergence);
}

TEST(Execute, TraceIsValidAndReproducible) {
  std::mt19937_64 rng(6);
  const Scenario sc = scenario(2);
  const MlpQ q(kDims, 2, {16, 16}, Mlp::Init::FanInUniform, 9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s0 = oracle::random_joint(kDims, 2, rng);
    const auto trace = execute(q, sc, s0, {});
    ASSERT_EQ(trace.states.size(), 21u);
    ASSERT_EQ(trace.actions.size(), 20u);
    for (std::size_t t = 0; t < trace.states.size(); ++t) {
      ASSERT_TRUE(valid_joint_state(trace.states[t], kDims));
      ASSERT_EQ(trace.potentials[t], potential(trace.states[t], sc.foi, sc.phi));
      if (t) ASSERT_EQ(trace.states[t], step(trace.states[t - 1], trace.actions[t - 1], kDims));
    }
    const auto again = execute(q, sc, s0, {});
    ASSERT_EQ(again.states, trace.states);
    ASSERT_EQ(again.steps_to_convergence, trace.steps_to_convergence);
  }
}

TEST(Execute, InvalidStartRejected) {
  const FsrQ q(kDims, 2);
  EXPECT_THROW(execute(q, scenario(2), {{1, 1, 0}, {2, 2, 2}}, {}), std::invalid_argument);
  EXPECT_THROW(execute(q, scenario(2), {{1, 1, 1}}, {}), std::invalid_argument);
  EXPECT_THROW(execute(q, scenario(2), {{1, 1, 1}, {2, 2, 2}}, {-1, 10, 3}), ConfigError);
}

TEST(TraceCsv, Format) {
  ExecTrace t;
  t.states = {{{0, 1, 2}, {3, 3, 1}}, {{0, 2, 2}, {3, 3, 1}}};
  t.potentials = {5, 6};
  std::ostringstream os;
  write_trace_csv(os, t, "c");
  EXPECT_EQ(os.str(),
            "# c\n"
            "step,x0,y0,z0,x1,y1,z1,J\n"
            "0,0,1,2,3,3,1,5\n"
            "1,0,2,2,3,3,1,6\n");
}
