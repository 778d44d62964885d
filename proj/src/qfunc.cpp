#include "covmpg/qfunc.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include "text_io.hpp"

namespace covmpg {

std::size_t joint_action_count(int n_agents) {
  std::size_t k = 1;
  for (int i = 0; i < n_agents; ++i) k *= kActionCount;
  return k;
}

std::size_t joint_action_index(const JointAction& a) {
  std::size_t index = 0;
  for (Action x : a) index = index * kActionCount + static_cast<std::size_t>(x);
  return index;
}

JointAction joint_action_from_index(std::size_t index, int n_agents) {
  JointAction a(n_agents);
  for (int i = n_agents - 1; i >= 0; --i) {
    a[i] = static_cast<Action>(index % kActionCount);
    index /= kActionCount;
  }
  return a;
}

namespace {

double normalized(int v, int extent) {
  return extent > 1 ? static_cast<double>(v) / (extent - 1) : 0.0;
}

void write_state_features(const GridDims& dims, const JointState& s,
                          Eigen::Ref<Eigen::VectorXd> out) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    out(3 * i) = normalized(s[i].x, dims.nx);
    out(3 * i + 1) = normalized(s[i].y, dims.ny);
    out(3 * i + 2) = normalized(s[i].z - 1, dims.nz);
  }
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("discount must lie in [0, 1)");
  }
}

}  // namespace

Eigen::VectorXd encode(const GridDims& dims, const JointState& s,
                       const JointAction& a) {
  if (s.size() != a.size()) {
    throw std::invalid_argument("joint state and joint action sizes differ");
  }
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(9 * n);
  write_state_features(dims, s, x.head(3 * n));
  for (Eigen::Index i = 0; i < n; ++i)
    x(3 * n + kActionCount * i + static_cast<int>(a[i])) = 1.0;
  return x;
}

QFunction::QFunction(GridDims dims, int n_agents)
    : dims_(dims), n_agents_(n_agents), action_count_(0) {
  dims_.validate();
  if (n_agents_ < 1) throw ConfigError("need at least one agent");
  action_count_ = joint_action_count(n_agents_);
}

Eigen::VectorXd QFunction::all_values(const JointState& s) const {
  return all_values_batch(std::span<const JointState>(&s, 1)).col(0);
}

Eigen::MatrixXd QFunction::all_values_batch(
    std::span<const JointState> states) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(action_count_),
                      static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = all_values(states[k]);
  return out;
}

Eigen::VectorXd QFunction::td_targets(std::span<const Transition> batch,
                                      double gamma) const {
  std::vector<JointState> next;
  next.reserve(batch.size());
  for (const auto& t : batch) next.push_back(t.s_next);
  const Eigen::MatrixXd q_next = all_values_batch(next);
  Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    y(col) = batch[k].r + gamma * q_next.col(col).maxCoeff();
  }
  return y;
}

// ---------------------------------------------------------------- MlpQ

MlpQ::MlpQ(GridDims dims, int n_agents, std::vector<int> hidden,
           Mlp::Init init, std::uint64_t seed)
    : QFunction(dims, n_agents) {
  std::vector<int> sizes{encoding_dim(n_agents)};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  net_ = Mlp(std::move(sizes), init, seed);
}

MlpQ::MlpQ(GridDims dims, int n_agents, Mlp net)
    : QFunction(dims, n_agents), net_(std::move(net)) {
  if (net_.input_dim() != encoding_dim(n_agents)) {
    throw std::invalid_argument("network input size does not match " +
                                std::to_string(n_agents) + " agents");
  }
}

std::unique_ptr<QFunction> MlpQ::clone() const {
  return std::make_unique<MlpQ>(*this);
}

double MlpQ::value(const JointState& s, const JointAction& a) const {
  return net_.forward(encode(dims_, s, a));
}

Eigen::MatrixXd MlpQ::all_values_batch(
    std::span<const JointState> states) const {
  const auto n = static_cast<Eigen::Index>(n_agents_);
  const auto actions = static_cast<Eigen::Index>(action_count_);
  const auto& first = net_.layer(0);
  const Eigen::Index hidden = first.weight.rows();

  // The one-hot half of the input contributes a state-independent column per
  // joint action: the sum of the selected weight columns.
  Eigen::MatrixXd action_part(hidden, actions);
  for (Eigen::Index k = 0; k < actions; ++k) {
    const JointAction a = joint_action_from_index(static_cast<std::size_t>(k),
                                                  n_agents_);
    auto col = action_part.col(k);
    col.setZero();
    for (Eigen::Index i = 0; i < n; ++i)
      col += first.weight.col(3 * n + kActionCount * i + static_cast<int>(a[i]));
  }

  Eigen::MatrixXd out(actions, static_cast<Eigen::Index>(states.size()));
  // Bound the working set to roughly 16k columns at a time, and keep the
  // buffers between calls: fresh multi-megabyte temporaries on every step
  // cost more in page faults than the arithmetic.
  const std::size_t chunk =
      std::max<std::size_t>(1, 16384 / static_cast<std::size_t>(actions));
  thread_local Eigen::MatrixXd z1;
  thread_local Mlp::Workspace ws;
  Eigen::VectorXd feats(3 * n);
  for (std::size_t begin = 0; begin < states.size(); begin += chunk) {
    const std::size_t end = std::min(states.size(), begin + chunk);
    const auto width = static_cast<Eigen::Index>(end - begin);
    z1.resize(hidden, width * actions);
    for (std::size_t k = begin; k < end; ++k) {
      if (static_cast<int>(states[k].size()) != n_agents_) {
        throw std::invalid_argument("joint state has wrong agent count");
      }
      write_state_features(dims_, states[k], feats);
      const Eigen::VectorXd base =
          first.weight.leftCols(3 * n) * feats + first.bias;
      z1.middleCols(static_cast<Eigen::Index>(k - begin) * actions, actions) =
          action_part.colwise() + base;
    }
    net_.forward_from_preactivation(z1, ws);
    for (Eigen::Index c = 0; c < width; ++c)
      out.col(static_cast<Eigen::Index>(begin) + c) = ws.out.segment(c * actions, actions);
  }
  return out;
}

double MlpQ::td_update(std::span<const Transition> batch, double gamma,
                       double alpha) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  check_gamma(gamma);
  const Eigen::VectorXd y = td_targets(batch, gamma);
  Eigen::MatrixXd xs(encoding_dim(n_agents_),
                     static_cast<Eigen::Index>(batch.size()));
  for (std::size_t k = 0; k < batch.size(); ++k)
    xs.col(static_cast<Eigen::Index>(k)) = encode(dims_, batch[k].s, batch[k].a);
  return net_.backward_step(xs, y, SgdConfig{alpha});
}

void MlpQ::save_payload(std::ostream& os) const { net_.save(os); }

// ---------------------------------------------------------------- FsrQ

FsrQ::FsrQ(GridDims dims, int n_agents) : QFunction(dims, n_agents) {}

std::unique_ptr<QFunction> FsrQ::clone() const {
  return std::make_unique<FsrQ>(*this);
}

std::uint64_t FsrQ::state_index(const JointState& s) const {
  if (static_cast<int>(s.size()) != n_agents_) {
    throw std::invalid_argument("joint state has wrong agent count");
  }
  const auto cells = static_cast<std::uint64_t>(dims_.cell_count());
  std::uint64_t index = 0;
  for (const auto& a : s) {
    const auto cell = static_cast<std::uint64_t>(
        (a.x * dims_.ny + a.y) * dims_.nz + (a.z - 1));
    index = index * cells + cell;
  }
  return index;
}

std::uint64_t FsrQ::key(const JointState& s, std::size_t action_index) const {
  return state_index(s) * action_count_ + action_index;
}

double FsrQ::value(const JointState& s, const JointAction& a) const {
  const auto it = weights_.find(key(s, joint_action_index(a)));
  return it == weights_.end() ? 0.0 : it->second;
}

Eigen::VectorXd FsrQ::all_values(const JointState& s) const {
  const std::uint64_t base = state_index(s) * action_count_;
  Eigen::VectorXd out(static_cast<Eigen::Index>(action_count_));
  for (std::size_t k = 0; k < action_count_; ++k) {
    const auto it = weights_.find(base + k);
    out(static_cast<Eigen::Index>(k)) = it == weights_.end() ? 0.0 : it->second;
  }
  return out;
}

double FsrQ::td_update(std::span<const Transition> batch, double gamma,
                       double alpha) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  check_gamma(gamma);
  const Eigen::VectorXd y = td_targets(batch, gamma);
  struct Accum {
    double sum = 0.0;
    int count = 0;
  };
  std::map<std::uint64_t, Accum> moves;
  double loss = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const std::uint64_t kk = key(batch[k].s, joint_action_index(batch[k].a));
    const auto it = weights_.find(kk);
    const double q = it == weights_.end() ? 0.0 : it->second;
    const double delta = y(static_cast<Eigen::Index>(k)) - q;
    loss += delta * delta;
    auto& m = moves[kk];
    m.sum += delta;
    ++m.count;
  }
  for (const auto& [kk, m] : moves) {
    if (m.sum == 0.0) continue;
    weights_[kk] += alpha * (m.sum / m.count);
  }
  return loss / static_cast<double>(batch.size());
}

bool FsrQ::all_finite() const {
  return std::all_of(weights_.begin(), weights_.end(),
                     [](const auto& kv) { return std::isfinite(kv.second); });
}

void FsrQ::set_weight(const JointState& s, const JointAction& a, double w) {
  weights_[key(s, joint_action_index(a))] = w;
}

void FsrQ::save_payload(std::ostream& os) const {
  std::vector<std::pair<std::uint64_t, double>> sorted(weights_.begin(),
                                                       weights_.end());
  std::sort(sorted.begin(), sorted.end());
  os << "fsr " << sorted.size() << '\n';
  for (const auto& [k, w] : sorted) {
    os << k << ' ';
    detail::write_double(os, w);
    os << '\n';
  }
}

FsrQ FsrQ::load_payload(std::istream& is, GridDims dims, int n_agents) {
  detail::expect_token(is, "fsr");
  const auto count = detail::read_int<std::uint64_t>(is);
  FsrQ q(dims, n_agents);
  for (std::uint64_t n = 0; n < count; ++n) {
    const auto k = detail::read_int<std::uint64_t>(is);
    const double w = detail::read_double(is);
    if (!std::isfinite(w)) throw std::runtime_error("non-finite FSR weight");
    q.weights_[k] = w;
  }
  return q;
}

// ---------------------------------------------------------------- greedy

std::size_t argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values) {
  std::size_t best = 0;
  for (Eigen::Index k = 1; k < values.size(); ++k)
    if (values(k) > values(static_cast<Eigen::Index>(best)))
      best = static_cast<std::size_t>(k);
  return best;
}

GreedyChoice greedy_joint_action(const QFunction& q, const JointState& s) {
  const Eigen::VectorXd values = q.all_values(s);
  const std::size_t best = argmax_lowest(values);
  return {joint_action_from_index(best, q.n_agents()), best,
          values(static_cast<Eigen::Index>(best))};
}

// ---------------------------------------------------------------- records

namespace {
constexpr const char* kQHeader = "covmpg-qfunction";
constexpr int kQVersion = 1;
}  // namespace

void save_qfunction(std::ostream& os, const QFunction& q) {
  os << kQHeader << ' ' << kQVersion << '\n'
     << "backend " << q.kind() << '\n'
     << "dims " << q.dims().nx << ' ' << q.dims().ny << ' ' << q.dims().nz
     << '\n'
     << "agents " << q.n_agents() << '\n';
  q.save_payload(os);
}

std::unique_ptr<QFunction> load_qfunction(std::istream& is) {
  detail::expect_token(is, kQHeader);
  const int version = detail::read_int<int>(is);
  if (version != kQVersion) {
    throw std::runtime_error("unsupported Q-function record version " +
                             std::to_string(version));
  }
  detail::expect_token(is, "backend");
  std::string kind;
  is >> kind;
  detail::expect_token(is, "dims");
  GridDims dims;
  dims.nx = detail::read_int<int>(is);
  dims.ny = detail::read_int<int>(is);
  dims.nz = detail::read_int<int>(is);
  detail::expect_token(is, "agents");
  const int n = detail::read_int<int>(is);
  if (n < 1 || n > 8) throw std::runtime_error("bad agent count in record");
  try {
    dims.validate();
  } catch (const ConfigError& e) {
    throw std::runtime_error(e.what());
  }
  try {
    if (kind == "mlp") return std::make_unique<MlpQ>(dims, n, Mlp::load(is));
    if (kind == "fsr")
      return std::make_unique<FsrQ>(FsrQ::load_payload(is, dims, n));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(e.what());
  }
  throw std::runtime_error("unknown Q backend '" + kind + "'");
}

}  // namespace covmpg
