#pragma once

#include <span>

#include "selfalign/encoder.hpp"
#include "selfalign/mat.hpp"
#include "selfalign/queue.hpp"

namespace selfalign::loss {

// tau: temperature. duplication: the positive-term weight in the denominator
// (written lambda in the config files); values above 1 model a duplicated
// positive among the negatives.
struct LossConfig {
  double tau = 0.08;
  double duplication = 1.0;
};

using RowPtrs = std::span<const double* const>;

// Absolute similarity metric (NCE with the positive in the denominator):
//   -p/tau + log(duplication * e^{p/tau} + sum_i e^{s_i/tau}),  p = fx.fy
double asm_loss(std::span<const double> fx, std::span<const double> fy,
                RowPtrs negs, const LossConfig& cfg);

// Relative similarity metric: the positive is replaced by its upper bound 1,
//   -1/tau + log(duplication * e^{1/tau} + sum_i e^{s_i/tau})
double rsm_loss(std::span<const double> fx, RowPtrs negs, const LossConfig& cfg);

// rsm value plus d(rsm)/d(fx) written into grad_fx (overwritten, not added).
double rsm_value_grad(std::span<const double> fx, RowPtrs negs,
                      const LossConfig& cfg, std::span<double> grad_fx);

// One side of the joint objective. Anchors come from this side's KG; the
// negative pool is its own queue + current target batch in self-negative
// mode, or the other side's in the cross-KG ablation (exclude_anchor false:
// the id spaces are disjoint, so no label is available to exclude).
struct SideBatch {
  std::span<const kg::EntityId> ids;
  const Mat* anchors = nullptr;  // online encodings, |ids| x dim
  const queue::QueueBatch* neg_current = nullptr;
  const queue::NegativeQueue* neg_queue = nullptr;
  bool exclude_anchor = true;
};

// Mean rsm over the x batch plus mean rsm over the y batch.
double joint_loss(const SideBatch& x, const SideBatch& y, const LossConfig& cfg);

// Same objective as a function of the online encoder parameters: encodes the
// anchors, backpropagates through the encoder, and accumulates
// parameter-shaped gradients into `out`. Negatives are constants.
double grad_joint_loss(const enc::EncoderParams& online,
                       const enc::EncodeContext& ctx_x, const SideBatch& x,
                       const enc::EncodeContext& ctx_y, const SideBatch& y,
                       const LossConfig& cfg, enc::EncoderGrads& out);

}  // namespace selfalign::loss
