#include "selfalign/queue.hpp"

#include <string>

#include "selfalign/errors.hpp"

namespace selfalign::queue {

NegativeQueue::NegativeQueue(std::size_t capacity, std::size_t batch_size,
                             std::size_t dim)
    : capacity_(capacity), batch_size_(batch_size), dim_(dim) {
  if (batch_size == 0 || dim == 0) {
    throw ConfigError("queue batch size and dim must be positive");
  }
}

void NegativeQueue::check_shape(const QueueBatch& b) const {
  if (b.ids.size() != batch_size_ || b.vectors.rows() != batch_size_ ||
      b.vectors.cols() != dim_) {
    throw ShapeMismatch("queue batch shape " + std::to_string(b.vectors.rows()) +
                        "x" + std::to_string(b.vectors.cols()) + " with " +
                        std::to_string(b.ids.size()) + " ids, expected " +
                        std::to_string(batch_size_) + "x" + std::to_string(dim_));
  }
}

void NegativeQueue::push(QueueBatch batch) {
  check_shape(batch);
  entries_.push_back(std::move(batch));
  while (entries_.size() > capacity_) entries_.pop_front();
}

std::vector<const double*> NegativeQueue::negatives_for(
    const QueueBatch& current, std::size_t anchor_index) const {
  check_shape(current);
  if (!warm()) {
    throw QueueNotWarm("queue holds " + std::to_string(entries_.size()) +
                       " of " + std::to_string(capacity_) + " batches");
  }
  if (anchor_index >= current.ids.size()) {
    throw ShapeMismatch("anchor index out of range");
  }
  const kg::EntityId anchor = current.ids[anchor_index];
  std::vector<const double*> out;
  out.reserve((entries_.size() + 1) * batch_size_);
  for (const QueueBatch& b : entries_) {
    for (std::size_t r = 0; r < batch_size_; ++r) {
      if (b.ids[r] != anchor) out.push_back(b.vectors.row(r));
    }
  }
  for (std::size_t r = 0; r < batch_size_; ++r) {
    if (current.ids[r] != anchor) out.push_back(current.vectors.row(r));
  }
  return out;
}

std::vector<const double*> NegativeQueue::all_negatives(
    const QueueBatch& current) const {
  check_shape(current);
  if (!warm()) {
    throw QueueNotWarm("queue holds " + std::to_string(entries_.size()) +
                       " of " + std::to_string(capacity_) + " batches");
  }
  std::vector<const double*> out;
  out.reserve((entries_.size() + 1) * batch_size_);
  for (const QueueBatch& b : entries_) {
    for (std::size_t r = 0; r < batch_size_; ++r) out.push_back(b.vectors.row(r));
  }
  for (std::size_t r = 0; r < batch_size_; ++r) out.push_back(current.vectors.row(r));
  return out;
}

void validate_capacity(std::size_t queue_k, std::size_t batch_size,
                       std::size_t ex_count, std::size_t ey_count) {
  unsigned long long pool =
      (1ull + queue_k) * static_cast<unsigned long long>(batch_size);
  unsigned long long smallest = std::min(ex_count, ey_count);
  if (pool >= smallest) {
    throw CapacityViolation(
        "negative pool (1+" + std::to_string(queue_k) + ")*" +
        std::to_string(batch_size) + " = " + std::to_string(pool) +
        " must stay below min(|E_x|,|E_y|) = " + std::to_string(smallest));
  }
}

}  // namespace selfalign::queue
