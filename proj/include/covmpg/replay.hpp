#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "covmpg/env.hpp"

namespace covmpg {

struct Transition {
  JointState s;
  JointAction a;
  int r = 0;  // potential of the post-transition state
  JointState s_next;
};

/// Fixed-capacity ring of transitions; evicts oldest first.
class ReplayBuffer {
public:
  static constexpr std::size_t kDefaultCapacity = 100'000;

  explicit ReplayBuffer(std::size_t capacity = kDefaultCapacity);

  void push(Transition t);
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  /// i-th stored transition in insertion order (0 = oldest retained).
  [[nodiscard]] const Transition& at(std::size_t i) const;

  /// k uniform draws with replacement. Returns nullopt while the buffer holds
  /// fewer than k transitions (warmup not complete) or when k == 0.
  std::optional<std::vector<Transition>> sample(std::size_t k, Rng& rng) const;

private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest element once full
  std::vector<Transition> data_;
};

}  // namespace covmpg
