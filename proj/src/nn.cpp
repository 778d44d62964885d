#include "covmpg/nn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "text_io.hpp"

namespace covmpg {

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
}

Mlp::Mlp(std::vector<int> sizes, Init init, std::uint64_t seed)
    : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("need at least 2 layers");
  if (sizes_.back() != 1) throw std::invalid_argument("output size must be 1");
  for (int s : sizes_)
    if (s < 1) throw std::invalid_argument("layer sizes must be positive");

  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    Layer layer{Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
    if (init == Init::FanInUniform) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c) layer.weight(r, c) = u(rng);
      for (int r = 0; r < out; ++r) layer.bias(r) = u(rng);
    }
    layers_.push_back(std::move(layer));
  }
}

void Mlp::check_input(Eigen::Index rows) const {
  if (rows != input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(rows) +
                                " features, network expects " +
                                std::to_string(input_dim()));
  }
}

double Mlp::forward(const Eigen::VectorXd& x) const {
  check_input(x.size());
  return forward_batch(Eigen::MatrixXd(x))(0);
}

double Mlp::forward(std::span<const double> x) const {
  const Eigen::Map<const Eigen::VectorXd> v(x.data(),
                                            static_cast<Eigen::Index>(x.size()));
  return forward(Eigen::VectorXd(v));
}

Eigen::VectorXd Mlp::forward_batch(const Eigen::MatrixXd& xs) const {
  check_input(xs.rows());
  if (xs.cols() == 0) return Eigen::VectorXd(0);
  Eigen::MatrixXd z1 = layers_[0].weight * xs;
  z1.colwise() += layers_[0].bias;
  return forward_from_preactivation(z1);
}

std::vector<double> Mlp::forward_batch(
    const std::vector<std::vector<double>>& xs) const {
  Eigen::MatrixXd m(input_dim(), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    check_input(static_cast<Eigen::Index>(xs[k].size()));
    for (int r = 0; r < input_dim(); ++r) m(r, k) = xs[k][r];
  }
  const Eigen::VectorXd out = forward_batch(m);
  return {out.data(), out.data() + out.size()};
}

Eigen::VectorXd Mlp::forward_from_preactivation(
    const Eigen::MatrixXd& z1) const {
  if (layers_.size() == 1) return z1.row(0).transpose();
  Eigen::MatrixXd h = z1.cwiseMax(0.0);
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * h;
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) {
      h = z.cwiseMax(0.0);
    } else {
      return z.row(0).transpose();
    }
  }
  return {};
}

void Mlp::forward_from_preactivation(Eigen::MatrixXd& z1,
                                     Workspace& ws) const {
  if (layers_.size() == 1) {
    ws.out = z1.row(0).transpose();
    return;
  }
  z1 = z1.cwiseMax(0.0);
  const Eigen::MatrixXd* h = &z1;
  Eigen::MatrixXd* z = &ws.a;
  for (std::size_t l = 1; l + 1 < layers_.size(); ++l) {
    z->resize(layers_[l].weight.rows(), h->cols());
    z->noalias() = layers_[l].weight * *h;
    z->colwise() += layers_[l].bias;
    *z = z->cwiseMax(0.0);
    h = z;
    z = (z == &ws.a) ? &ws.b : &ws.a;
  }
  const auto& last = layers_.back();
  ws.out.resize(h->cols());
  ws.out.noalias() = (last.weight * *h).transpose();
  ws.out.array() += last.bias(0);
}

double Mlp::loss_and_gradients(const Eigen::MatrixXd& xs,
                               const Eigen::VectorXd& targets,
                               Gradients& grads) const {
  check_input(xs.rows());
  const Eigen::Index batch = xs.cols();
  if (batch == 0) throw std::invalid_argument("empty batch");
  if (targets.size() != batch) {
    throw std::invalid_argument("target count does not match batch size");
  }

  // Keep every post-activation for the backward pass.
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers_.size() + 1);
  acts.push_back(xs);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * acts.back();
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }

  const Eigen::RowVectorXd delta = acts.back().row(0) - targets.transpose();
  const double loss = delta.squaredNorm() / static_cast<double>(batch);

  grads.weight.resize(layers_.size());
  grads.bias.resize(layers_.size());
  Eigen::MatrixXd g = (2.0 / static_cast<double>(batch)) * delta;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    grads.weight[l] = g * acts[l].transpose();
    grads.bias[l] = g.rowwise().sum();
    if (l == 0) break;
    g = layers_[l].weight.transpose() * g;
    // Rectifier derivative: pass gradient only where the unit was active.
    g = g.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
  }
  return loss;
}

double Mlp::loss(const Eigen::MatrixXd& xs,
                 const Eigen::VectorXd& targets) const {
  const Eigen::VectorXd out = forward_batch(xs);
  return (out - targets).squaredNorm() / static_cast<double>(xs.cols());
}

double Mlp::backward_step(const Eigen::MatrixXd& xs,
                          const Eigen::VectorXd& targets,
                          const SgdConfig& cfg) {
  Gradients grads;
  const double loss = loss_and_gradients(xs, targets, grads);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weight.noalias() -= cfg.learning_rate * grads.weight[l];
    layers_[l].bias.noalias() -= cfg.learning_rate * grads.bias[l];
  }
  return loss;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
        flat.push_back(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat.push_back(l.bias(r));
  }
  return flat;
}

void Mlp::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
        l.weight(r, c) = flat[k++];
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat[k++];
  }
}

std::vector<double> Mlp::flatten(const Gradients& g) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < g.weight.size(); ++l) {
    for (Eigen::Index r = 0; r < g.weight[l].rows(); ++r)
      for (Eigen::Index c = 0; c < g.weight[l].cols(); ++c)
        flat.push_back(g.weight[l](r, c));
    for (Eigen::Index r = 0; r < g.bias[l].size(); ++r)
      flat.push_back(g.bias[l](r));
  }
  return flat;
}

bool Mlp::all_finite() const {
  for (const auto& l : layers_)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

void Mlp::save(std::ostream& os) const {
  os << "mlp " << sizes_.size();
  for (int s : sizes_) os << ' ' << s;
  os << '\n';
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        if (c) os << ' ';
        detail::write_double(os, l.weight(r, c));
      }
      os << '\n';
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      if (r) os << ' ';
      detail::write_double(os, l.bias(r));
    }
    os << '\n';
  }
}

Mlp Mlp::load(std::istream& is) {
  detail::expect_token(is, "mlp");
  const auto count = detail::read_int<int>(is);
  if (count < 2 || count > 64) throw std::runtime_error("bad layer count");
  std::vector<int> sizes(count);
  for (auto& s : sizes) {
    s = detail::read_int<int>(is);
    if (s < 1 || s > 1 << 16) throw std::runtime_error("bad layer size");
  }
  Mlp net(sizes, Init::Zero);
  for (auto& l : net.layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
        l.weight(r, c) = detail::read_double(is);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r)
      l.bias(r) = detail::read_double(is);
  }
  if (!net.all_finite()) throw std::runtime_error("non-finite parameters");
  return net;
}

}  // namespace covmpg
