#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "covmpg/env.hpp"
#include "covmpg/nn.hpp"
#include "covmpg/replay.hpp"

namespace covmpg {

// Joint actions are enumerated in mixed radix base 6, agent 0 most
// significant: index = sum_i a_i * 6^(N-1-i).
std::size_t joint_action_count(int n_agents);
std::size_t joint_action_index(const JointAction& a);
JointAction joint_action_from_index(std::size_t index, int n_agents);

/// Feature vector for the network: 3N normalized coordinates (each axis
/// divided by its extent minus one, altitude shifted to start at 0), then N
/// one-hot blocks of 6 action entries. Length 9N, entries in [0, 1].
Eigen::VectorXd encode(const GridDims& dims, const JointState& s,
                       const JointAction& a);
inline int encoding_dim(int n_agents) { return 9 * n_agents; }

/// Q(s, a) over joint states and joint actions. Implementations are
/// single-writer; const members may be called concurrently.
class QFunction {
public:
  QFunction(GridDims dims, int n_agents);
  virtual ~QFunction() = default;

  [[nodiscard]] virtual std::string_view kind() const = 0;
  [[nodiscard]] virtual std::unique_ptr<QFunction> clone() const = 0;

  [[nodiscard]] virtual double value(const JointState& s,
                                     const JointAction& a) const = 0;
  /// Q(s, .) for every joint action, in index order.
  [[nodiscard]] virtual Eigen::VectorXd all_values(const JointState& s) const;
  /// Column k holds Q(states[k], .).
  [[nodiscard]] virtual Eigen::MatrixXd all_values_batch(
      std::span<const JointState> states) const;

  /// One semi-gradient TD step on the batch with targets
  /// r + gamma * max_a' Q(s', a') held fixed. Returns the mean squared TD
  /// error before the update. Throws std::invalid_argument on an empty batch
  /// or gamma outside [0, 1).
  virtual double td_update(std::span<const Transition> batch, double gamma,
                           double alpha) = 0;

  [[nodiscard]] virtual bool all_finite() const = 0;
  /// Backend payload only; see save_qfunction for the full record.
  virtual void save_payload(std::ostream& os) const = 0;

  [[nodiscard]] const GridDims& dims() const { return dims_; }
  [[nodiscard]] int n_agents() const { return n_agents_; }
  [[nodiscard]] std::size_t action_count() const { return action_count_; }

protected:
  Eigen::VectorXd td_targets(std::span<const Transition> batch,
                             double gamma) const;

  GridDims dims_;
  int n_agents_;
  std::size_t action_count_;
};

/// Network-backed Q with input encode(s, a).
class MlpQ final : public QFunction {
public:
  MlpQ(GridDims dims, int n_agents, std::vector<int> hidden, Mlp::Init init,
       std::uint64_t seed);
  MlpQ(GridDims dims, int n_agents, Mlp net);

  std::string_view kind() const override { return "mlp"; }
  std::unique_ptr<QFunction> clone() const override;
  double value(const JointState& s, const JointAction& a) const override;
  Eigen::MatrixXd all_values_batch(
      std::span<const JointState> states) const override;
  double td_update(std::span<const Transition> batch, double gamma,
                   double alpha) override;
  bool all_finite() const override { return net_.all_finite(); }
  void save_payload(std::ostream& os) const override;

  [[nodiscard]] Mlp& net() { return net_; }
  [[nodiscard]] const Mlp& net() const { return net_; }

private:
  Mlp net_;
};

/// Fixed sparse representation: one indicator feature, hence one weight,
/// per (joint state, joint action) pair. Unseen pairs read as 0.
class FsrQ final : public QFunction {
public:
  FsrQ(GridDims dims, int n_agents);

  std::string_view kind() const override { return "fsr"; }
  std::unique_ptr<QFunction> clone() const override;
  double value(const JointState& s, const JointAction& a) const override;
  Eigen::VectorXd all_values(const JointState& s) const override;
  /// Each distinct pair in the batch moves by alpha times the mean TD error
  /// of its occurrences, all errors taken before any weight changes.
  double td_update(std::span<const Transition> batch, double gamma,
                   double alpha) override;
  bool all_finite() const override;
  void save_payload(std::ostream& os) const override;
  static FsrQ load_payload(std::istream& is, GridDims dims, int n_agents);

  void set_weight(const JointState& s, const JointAction& a, double w);
  [[nodiscard]] std::size_t stored_weights() const { return weights_.size(); }
  [[nodiscard]] std::uint64_t state_index(const JointState& s) const;

private:
  [[nodiscard]] std::uint64_t key(const JointState& s,
                                  std::size_t action_index) const;
  std::unordered_map<std::uint64_t, double> weights_;
};

struct GreedyChoice {
  JointAction action;
  std::size_t index = 0;
  double value = 0.0;
};

/// Argmax over all 6^N joint actions; ties go to the lowest index.
GreedyChoice greedy_joint_action(const QFunction& q, const JointState& s);
std::size_t argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Versioned text record: header, backend kind, dims, agent count, payload.
void save_qfunction(std::ostream& os, const QFunction& q);
std::unique_ptr<QFunction> load_qfunction(std::istream& is);

}  // namespace covmpg
