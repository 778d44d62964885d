#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "covmpg/eval.hpp"
#include "covmpg/qfunc.hpp"
#include "oracles.hpp"

using namespace covmpg;

namespace {

const GridDims kDims{7, 7, 4};

Transition transition(JointState s, JointAction a, int r, JointState s_next) {
  return {std::move(s), std::move(a), r, std::move(s_next)};
}

}  // namespace

TEST(JointActionIndex, MixedRadixAgentZeroMostSignificant) {
  EXPECT_EQ(joint_action_count(1), 6u);
  EXPECT_EQ(joint_action_count(4), 1296u);
  EXPECT_EQ(joint_action_index({Action::South, Action::North}), 6u);
  EXPECT_EQ(joint_action_index({Action::North, Action::South}), 1u);
  EXPECT_EQ(joint_action_index({Action::Down, Action::Down}), 35u);
  for (std::size_t k = 0; k < joint_action_count(3); ++k)
    ASSERT_EQ(joint_action_index(joint_action_from_index(k, 3)), k);
}

TEST(Encode, LayoutAndRange) {
  const Eigen::VectorXd x = encode(kDims, {{6, 0, 4}, {3, 3, 1}},
                                   {Action::Up, Action::North});
  ASSERT_EQ(x.size(), encoding_dim(2));
  EXPECT_DOUBLE_EQ(x(0), 1.0);
  EXPECT_DOUBLE_EQ(x(1), 0.0);
  EXPECT_DOUBLE_EQ(x(2), 1.0);
  EXPECT_DOUBLE_EQ(x(3), 0.5);
  EXPECT_DOUBLE_EQ(x(5), 0.0);
  EXPECT_DOUBLE_EQ(x(6 + 4), 1.0);
  EXPECT_DOUBLE_EQ(x(6 + 6 + 0), 1.0);
  EXPECT_DOUBLE_EQ(x.tail(12).sum(), 2.0);
  EXPECT_GE(x.minCoeff(), 0.0);
  EXPECT_LE(x.maxCoeff(), 1.0);
}

TEST(Encode, InjectiveOnASmallDomain) {
  const GridDims d{2, 3, 2};
  std::set<std::vector<double>> seen;
  std::size_t count = 0;
  for (int x = 0; x < d.nx; ++x)
    for (int y = 0; y < d.ny; ++y)
      for (int z = 1; z <= d.nz; ++z)
        for (Action a : kAllActions) {
          const Eigen::VectorXd v = encode(d, {{x, y, z}}, {a});
          seen.insert({v.data(), v.data() + v.size()});
          ++count;
        }
  EXPECT_EQ(seen.size(), count);
}

TEST(QValue, FreshBackendsReadZero) {
  const FsrQ fsr(kDims, 2);
  const MlpQ mlp(kDims, 2, {64, 64}, Mlp::Init::Zero, 0);
  const JointState s{{1, 2, 3}, {4, 5, 1}};
  const JointAction a{Action::East, Action::Down};
  EXPECT_EQ(fsr.value(s, a), 0.0);
  EXPECT_EQ(mlp.value(s, a), 0.0);
  EXPECT_TRUE(fsr.all_values(s).isZero());
  EXPECT_TRUE(mlp.all_values(s).isZero());
}

TEST(QValue, OneFsrUpdateMovesByAlphaTimesTarget) {
  FsrQ q(kDims, 1);
  const Transition t = transition({{1, 1, 1}}, {Action::Up}, 7, {{1, 1, 2}});
  const double loss = q.td_update(std::span(&t, 1), 0.0, 0.25);
  EXPECT_DOUBLE_EQ(loss, 49.0);
  EXPECT_DOUBLE_EQ(q.value(t.s, t.a), 0.25 * 7);
  EXPECT_EQ(q.stored_weights(), 1u);
}

TEST(TdUpdate, GammaZeroAlphaOneSetsQToReward) {
  FsrQ q(kDims, 2);
  const Transition t =
      transition({{0, 0, 1}, {2, 2, 2}}, {Action::East, Action::Up}, 1,
                 {{1, 0, 1}, {2, 2, 3}});
  q.td_update(std::span(&t, 1), 0.0, 1.0);
  EXPECT_DOUBLE_EQ(q.value(t.s, t.a), 1.0);

  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const auto s = oracle::random_joint(kDims, 2, rng);
    const JointAction a = joint_action_from_index(k % 36, 2);
    const int r = std::uniform_int_distribution<int>(-20, 40)(rng);
    const Transition u{s, a, r, step(s, a, kDims)};
    q.td_update(std::span(&u, 1), 0.0, 1.0);
    ASSERT_DOUBLE_EQ(q.value(s, a), r);
  }
}

TEST(TdUpdate, ZeroErrorChangesNothing) {
  FsrQ fsr(kDims, 1);
  const Transition t = transition({{3, 3, 2}}, {Action::West}, 5, {{2, 3, 2}});
  fsr.set_weight(t.s, t.a, 5.0);
  EXPECT_EQ(fsr.td_update(std::span(&t, 1), 0.0, 0.5), 0.0);
  EXPECT_EQ(fsr.value(t.s, t.a), 5.0);

  MlpQ mlp(kDims, 1, {8, 8}, Mlp::Init::Zero, 0);
  const Transition z = transition({{3, 3, 2}}, {Action::West}, 0, {{2, 3, 2}});
  EXPECT_EQ(mlp.td_update(std::span(&z, 1), 0.9, 0.1), 0.0);
  EXPECT_TRUE(Eigen::Map<const Eigen::VectorXd>(mlp.net().parameters().data(),
                                                static_cast<Eigen::Index>(mlp.net().parameter_count()))
                  .isZero());
}

TEST(TdUpdate, RejectsEmptyBatchAndBadGamma) {
  FsrQ q(kDims, 1);
  MlpQ m(kDims, 1, {4}, Mlp::Init::Zero, 0);
  EXPECT_THROW(q.td_update({}, 0.9, 0.1), std::invalid_argument);
  EXPECT_THROW(m.td_update({}, 0.9, 0.1), std::invalid_argument);
  const Transition t = transition({{0, 0, 1}}, {Action::Up}, 1, {{0, 0, 2}});
  EXPECT_THROW(q.td_update(std::span(&t, 1), 1.0, 0.1), std::invalid_argument);
}

TEST(TdUpdate, MlpLossIsMeanSquaredTdErrorBeforeTheStep) {
  std::mt19937_64 rng(9);
  MlpQ q(kDims, 2, {16, 16}, Mlp::Init::FanInUniform, 3);
  std::vector<Transition> batch;
  for (int k = 0; k < 8; ++k) {
    const auto s = oracle::random_joint(kDims, 2, rng);
    const auto a = joint_action_from_index(k * 4, 2);
    batch.push_back({s, a, k, step(s, a, kDims)});
  }
  double expect = 0.0;
  for (const auto& t : batch) {
    double best = -1e300;
    for (std::size_t k = 0; k < q.action_count(); ++k)
      best = std::max(best, q.value(t.s_next, joint_action_from_index(k, 2)));
    const double delta = t.r + 0.9 * best - q.value(t.s, t.a);
    expect += delta * delta;
  }
  expect /= batch.size();
  EXPECT_NEAR(q.td_update(batch, 0.9, 1e-3), expect, 1e-9 * std::max(1.0, expect));
}

TEST(Greedy, FreshBackendPicksIndexZero) {
  const FsrQ q(kDims, 2);
  const auto g = greedy_joint_action(q, {{1, 1, 1}, {2, 2, 2}});
  EXPECT_EQ(g.index, 0u);
  EXPECT_EQ(g.action, (JointAction{Action::North, Action::North}));
}

TEST(Greedy, FindsTheSingleRewardedAction) {
  FsrQ q(kDims, 2);
  const JointState s{{1, 1, 1}, {2, 2, 2}};
  q.set_weight(s, {Action::Up, Action::West}, 1.0);
  const auto g = greedy_joint_action(q, s);
  EXPECT_EQ(g.action, (JointAction{Action::Up, Action::West}));
  EXPECT_EQ(g.value, 1.0);
}

TEST(Greedy, BatchedMlpMatchesExplicitLoop) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const MlpQ q(kDims, 2, {64, 64}, Mlp::Init::FanInUniform, 50 + trial);
    const auto s = oracle::random_joint(kDims, 2, rng);
    const Eigen::VectorXd all = q.all_values(s);
    ASSERT_EQ(all.size(), 36);
    std::size_t best = 0;
    double best_v = q.value(s, joint_action_from_index(0, 2));
    for (std::size_t k = 0; k < 36; ++k) {
      const double v = q.value(s, joint_action_from_index(k, 2));
      ASSERT_NEAR(all(static_cast<Eigen::Index>(k)), v, 1e-12);
      if (v > best_v) {
        best_v = v;
        best = k;
      }
    }
    ASSERT_EQ(greedy_joint_action(q, s).index, best);
  }
}

TEST(Greedy, AllValuesBatchAgreesAcrossChunking) {
  std::mt19937_64 rng(18);
  const MlpQ q({9, 9, 4}, 4, {8, 8}, Mlp::Init::FanInUniform, 1);
  std::vector<JointState> states;
  for (int k = 0; k < 30; ++k) states.push_back(oracle::random_joint({9, 9, 4}, 4, rng));
  const Eigen::MatrixXd batch = q.all_values_batch(states);
  for (int k = 0; k < 30; k += 7) {
    ASSERT_TRUE(batch.col(k).isApprox(q.all_values(states[k]), 1e-12));
    ASSERT_NEAR(batch(100, k), q.value(states[k], joint_action_from_index(100, 4)), 1e-12);
  }
}

TEST(Greedy, InvariantUnderConstantShift) {
  std::mt19937_64 rng(21);
  const JointState s{{2, 3, 1}, {5, 5, 4}};
  FsrQ a(kDims, 2);
  FsrQ b(kDims, 2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double shift = u(rng) * 10;
    for (std::size_t k = 0; k < 36; ++k) {
      const double w = std::round(u(rng) * 4) / 4;  // ties are likely
      a.set_weight(s, joint_action_from_index(k, 2), w);
      b.set_weight(s, joint_action_from_index(k, 2), w + shift);
    }
    ASSERT_EQ(greedy_joint_action(a, s).index, greedy_joint_action(b, s).index);
  }
}

TEST(TdUpdate, FsrConvergesToValueIterationOnATinyMdp) {
  Scenario sc;
  sc.dims = {2, 2, 2};
  sc.n_agents = 1;
  sc.foi = FieldOfInterest(2, 2, {{0, 0}, {1, 1}});
  sc.phi = {50.0, 50.0};
  const TinyMdp mdp = TinyMdp::build(sc);
  const auto vi = value_iteration(mdp, 0.9, 1e-12);

  FsrQ q(sc.dims, 1);
  std::vector<Transition> all;
  for (std::size_t s = 0; s < mdp.states.size(); ++s)
    for (std::size_t a = 0; a < mdp.actions; ++a) {
      const JointAction ja = joint_action_from_index(a, 1);
      all.push_back({mdp.states[s], ja, mdp.reward[mdp.pair(s, a)],
                     step(mdp.states[s], ja, sc.dims)});
    }
  for (int sweep = 0; sweep < 400; ++sweep) q.td_update(all, 0.9, 0.5);
  EXPECT_LT(max_abs_error(q, mdp, vi.q), 0.05);
}

TEST(QRecord, RoundTripBothBackends) {
  std::mt19937_64 rng(30);
  MlpQ mlp(kDims, 2, {64, 64}, Mlp::Init::FanInUniform, 9);
  FsrQ fsr(kDims, 2);
  for (int k = 0; k < 40; ++k) {
    fsr.set_weight(oracle::random_joint(kDims, 2, rng), joint_action_from_index(k, 2),
                   std::uniform_real_distribution<double>(-5, 5)(rng));
  }
  for (const QFunction* q : {static_cast<const QFunction*>(&mlp),
                             static_cast<const QFunction*>(&fsr)}) {
    std::stringstream ss;
    save_qfunction(ss, *q);
    const auto back = load_qfunction(ss);
    ASSERT_EQ(back->kind(), q->kind());
    for (int k = 0; k < 25; ++k) {
      const auto s = oracle::random_joint(kDims, 2, rng);
      ASSERT_EQ(back->all_values(s), q->all_values(s));
    }
    std::stringstream again;
    save_qfunction(again, *back);
    std::stringstream orig;
    save_qfunction(orig, *q);
    ASSERT_EQ(again.str(), orig.str());
  }
}

TEST(QRecord, RejectsCorruptInput) {
  std::stringstream wrong_header("covmpg-qfunction 2\nbackend fsr\n");
  EXPECT_THROW(load_qfunction(wrong_header), std::runtime_error);
  std::stringstream bad_backend("covmpg-qfunction 1\nbackend tree\ndims 2 2 2\nagents 1\n");
  EXPECT_THROW(load_qfunction(bad_backend), std::runtime_error);
  std::stringstream truncated("covmpg-qfunction 1\nbackend fsr\ndims 2 2 2\nagents 1\nfsr 3\n1 0.5\n");
  EXPECT_THROW(load_qfunction(truncated), std::runtime_error);
  std::stringstream mismatch(
      "covmpg-qfunction 1\nbackend mlp\ndims 2 2 2\nagents 2\nmlp 2 9 1\n"
      "0 0 0 0 0 0 0 0 0\n0\n");
  EXPECT_THROW(load_qfunction(mismatch), std::runtime_error);
}
