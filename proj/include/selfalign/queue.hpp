#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "selfalign/kg.hpp"
#include "selfalign/mat.hpp"

namespace selfalign::queue {

// One target-encoded batch. Entity ids ride along so anchors can be excluded
// from their own negative pool by identity rather than by vector equality.
struct QueueBatch {
  std::vector<kg::EntityId> ids;
  Mat vectors;  // |ids| x dim
};

// FIFO of the K most recent target-encoded batches for one KG.
class NegativeQueue {
 public:
  NegativeQueue(std::size_t capacity, std::size_t batch_size, std::size_t dim);

  // Appends a batch; evicts the oldest when more than `capacity` are stored.
  void push(QueueBatch batch);

  bool warm() const { return entries_.size() >= capacity_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t batch_size() const { return batch_size_; }
  std::size_t dim() const { return dim_; }
  const QueueBatch& entry(std::size_t i) const { return entries_[i]; }  // oldest first

  // All vectors from the K stored batches plus `current`, excluding every row
  // whose entity id equals the anchor's. Requires a warm queue. Row pointers
  // stay valid until the next push.
  std::vector<const double*> negatives_for(const QueueBatch& current,
                                           std::size_t anchor_index) const;

  // Same pool with no exclusion (cross-KG negatives have disjoint id spaces).
  std::vector<const double*> all_negatives(const QueueBatch& current) const;

 private:
  void check_shape(const QueueBatch& b) const;

  std::size_t capacity_;
  std::size_t batch_size_;
  std::size_t dim_;
  std::deque<QueueBatch> entries_;
};

// Enforces (1 + K) * N < min(|E_x|, |E_y|): a full negative pool must never
// exhaust either entity set. Throws CapacityViolation with the arithmetic.
void validate_capacity(std::size_t queue_k, std::size_t batch_size,
                       std::size_t ex_count, std::size_t ey_count);

}  // namespace selfalign::queue
