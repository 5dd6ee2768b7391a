#include "binpack/replay.hpp"

#include "binpack/errors.hpp"

namespace binpack {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw BadConfig("replay capacity must be positive");
  data_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
  ++pushed_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw BadConfig("replay index out of range");
  if (data_.size() < capacity_) return data_[i];
  return data_[(head_ + i) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(int n, RandomEngine& rng) const {
  if (data_.empty()) throw BadConfig("sampling from an empty replay buffer");
  std::vector<const Transition*> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(data_.size()) - 1));
    out.push_back(&data_[j]);
  }
  return out;
}

}  // namespace binpack
