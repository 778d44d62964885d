#include "covmpg/replay.hpp"

#include <stdexcept>

namespace covmpg {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("replay index out of range");
  return data_[(head_ + i) % data_.size()];
}

std::optional<std::vector<Transition>> ReplayBuffer::sample(std::size_t k,
                                                            Rng& rng) const {
  if (k == 0 || data_.size() < k) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<Transition> out;
  out.reserve(k);
  for (std::size_t n = 0; n < k; ++n) out.push_back(data_[pick(rng)]);
  return out;
}

}  // namespace covmpg
