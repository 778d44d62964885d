#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace covmpg {

struct SgdConfig {
  double learning_rate = 1e-3;
  void validate() const;
};

/// Dense feed-forward network with rectifier hidden layers and a single
/// linear output unit. Parameters are double precision; inputs are passed
/// column-wise (one column per example) for the batched entry points.
class Mlp {
public:
  enum class Init { Zero, FanInUniform };

  struct Layer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;
  };

  struct Gradients {
    std::vector<Eigen::MatrixXd> weight;
    std::vector<Eigen::VectorXd> bias;
  };

  Mlp() = default;
  /// `sizes` = {input, hidden..., 1}. FanInUniform draws every parameter
  /// from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Mlp(std::vector<int> sizes, Init init, std::uint64_t seed = 0);

  [[nodiscard]] int input_dim() const { return sizes_.front(); }
  [[nodiscard]] const std::vector<int>& sizes() const { return sizes_; }
  [[nodiscard]] std::size_t layer_count() const { return layers_.size(); }
  [[nodiscard]] Layer& layer(std::size_t l) { return layers_[l]; }
  [[nodiscard]] const Layer& layer(std::size_t l) const { return layers_[l]; }

  double forward(std::span<const double> x) const;
  double forward(const Eigen::VectorXd& x) const;
  Eigen::VectorXd forward_batch(const Eigen::MatrixXd& xs) const;
  std::vector<double> forward_batch(
      const std::vector<std::vector<double>>& xs) const;

  /// Runs the network from a given first-layer pre-activation (before the
  /// rectifier), one column per example. Lets callers build that
  /// pre-activation from structured inputs without forming them densely.
  Eigen::VectorXd forward_from_preactivation(const Eigen::MatrixXd& z1) const;

  /// Scratch space for repeated large forwards.
  struct Workspace {
    Eigen::MatrixXd a, b;
    Eigen::VectorXd out;
  };
  /// As above, but rectifies z1 in place and keeps every intermediate in
  /// `ws`, so repeated calls of the same shape do not allocate. The result
  /// lives in ws.out.
  void forward_from_preactivation(Eigen::MatrixXd& z1, Workspace& ws) const;

  /// Mean over the batch of (output - target)^2, and its exact gradient.
  double loss_and_gradients(const Eigen::MatrixXd& xs,
                            const Eigen::VectorXd& targets,
                            Gradients& grads) const;
  double loss(const Eigen::MatrixXd& xs, const Eigen::VectorXd& targets) const;

  /// One SGD step on the mean squared error. Returns the loss before the
  /// update. Throws std::invalid_argument on an empty batch.
  double backward_step(const Eigen::MatrixXd& xs,
                       const Eigen::VectorXd& targets, const SgdConfig& cfg);

  [[nodiscard]] std::size_t parameter_count() const;
  /// Flattened parameters: per layer, weight row-major then bias.
  [[nodiscard]] std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);
  static std::vector<double> flatten(const Gradients& g);

  [[nodiscard]] bool all_finite() const;

  void save(std::ostream& os) const;
  static Mlp load(std::istream& is);

private:
  void check_input(Eigen::Index rows) const;

  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

}  // namespace covmpg
