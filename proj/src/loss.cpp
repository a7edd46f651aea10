#include "selfalign/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "selfalign/errors.hpp"
#include "selfalign/kernels.hpp"

namespace selfalign::loss {
namespace {

constexpr double kUnitTol = 1e-4;

void check_cfg(const LossConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(cfg.duplication >= 1.0)) throw ConfigError("duplication must be >= 1");
}

void check_unit(const double* v, std::size_t dim, const char* what) {
  double norm = kernels::nrm2(v, dim);
  if (std::abs(norm - 1.0) > kUnitTol) {
    throw NormViolation(std::string(what) + " norm " + std::to_string(norm) +
                        " deviates from 1 by more than 1e-4");
  }
}

void check_unit_rows(RowPtrs rows, std::size_t dim, const char* what) {
  for (const double* r : rows) check_unit(r, dim, what);
}

// Log-sum-exp over the positive-cap logit (weight `duplication`) and the
// negative logits. Optionally writes the softmax weight of each negative.
double lse_with_cap(double cap_logit, double duplication,
                    const std::vector<double>& logits,
                    std::vector<double>* weights) {
  double mx = cap_logit;
  for (double l : logits) mx = std::max(mx, l);
  double denom = duplication * std::exp(cap_logit - mx);
  if (weights) weights->resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    double e = std::exp(logits[i] - mx);
    if (weights) (*weights)[i] = e;
    denom += e;
  }
  if (weights) {
    for (double& w : *weights) w /= denom;
  }
  return mx + std::log(denom);
}

// Core forms assume inputs were validated by the public wrappers.
double rsm_core(const double* fx, RowPtrs negs, std::size_t dim,
                const LossConfig& cfg, double* grad_fx) {
  const double inv_tau = 1.0 / cfg.tau;
  std::vector<double> logits(negs.size());
  for (std::size_t i = 0; i < negs.size(); ++i) {
    logits[i] = kernels::dot(fx, negs[i], dim) * inv_tau;
  }
  std::vector<double> weights;
  double lse = lse_with_cap(inv_tau, cfg.duplication, logits,
                            grad_fx ? &weights : nullptr);
  if (grad_fx) {
    std::fill(grad_fx, grad_fx + dim, 0.0);
    for (std::size_t i = 0; i < negs.size(); ++i) {
      kernels::axpy(weights[i] * inv_tau, negs[i], grad_fx, dim);
    }
  }
  return -inv_tau + lse;
}

double asm_core(const double* fx, const double* fy, RowPtrs negs,
                std::size_t dim, const LossConfig& cfg) {
  const double inv_tau = 1.0 / cfg.tau;
  const double pos = kernels::dot(fx, fy, dim) * inv_tau;
  std::vector<double> logits(negs.size());
  for (std::size_t i = 0; i < negs.size(); ++i) {
    logits[i] = kernels::dot(fx, negs[i], dim) * inv_tau;
  }
  return -pos + lse_with_cap(pos, cfg.duplication, logits, nullptr);
}

void check_side(const SideBatch& s, const char* what) {
  if (!s.neg_current || !s.neg_queue) {
    throw ConfigError(std::string(what) + ": negative sources not set");
  }
  if (s.ids.empty()) {
    throw ConfigError(std::string(what) + ": empty anchor batch");
  }
}

std::size_t side_dim(const SideBatch& s) { return s.neg_queue->dim(); }

void check_side_pool_norms(const SideBatch& s) {
  const std::size_t dim = side_dim(s);
  for (std::size_t b = 0; b < s.neg_queue->size(); ++b) {
    const auto& batch = s.neg_queue->entry(b);
    for (std::size_t r = 0; r < batch.vectors.rows(); ++r) {
      check_unit(batch.vectors.row(r), dim, "queue negative");
    }
  }
  for (std::size_t r = 0; r < s.neg_current->vectors.rows(); ++r) {
    check_unit(s.neg_current->vectors.row(r), dim, "current-batch negative");
  }
}

std::vector<const double*> side_negatives(const SideBatch& s, std::size_t i) {
  auto negs = s.exclude_anchor
                  ? s.neg_queue->negatives_for(*s.neg_current, i)
                  : s.neg_queue->all_negatives(*s.neg_current);
  if (negs.empty()) {
    throw EmptyNegatives("anchor exclusion left no negatives");
  }
  return negs;
}

// Mean rsm over one side; writes per-anchor gradients when danchors is set.
double side_mean(const SideBatch& s, const Mat& anchors, const LossConfig& cfg,
                 Mat* danchors) {
  const std::size_t n = s.ids.size();
  const std::size_t dim = side_dim(s);
  if (anchors.rows() != n || anchors.cols() != dim) {
    throw ShapeMismatch("anchor matrix shape does not match the batch");
  }
  check_side_pool_norms(s);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    check_unit(anchors.row(i), dim, "anchor");
    auto negs = side_negatives(s, i);
    sum += rsm_core(anchors.row(i), negs, dim, cfg,
                    danchors ? danchors->row(i) : nullptr);
  }
  return sum / static_cast<double>(n);
}

}  // namespace

double asm_loss(std::span<const double> fx, std::span<const double> fy,
                RowPtrs negs, const LossConfig& cfg) {
  check_cfg(cfg);
  if (fx.size() != fy.size()) throw DimensionMismatch("fx/fy dims differ");
  if (negs.empty()) throw EmptyNegatives("asm_loss needs at least one negative");
  check_unit(fx.data(), fx.size(), "fx");
  check_unit(fy.data(), fy.size(), "fy");
  check_unit_rows(negs, fx.size(), "negative");
  return asm_core(fx.data(), fy.data(), negs, fx.size(), cfg);
}

double rsm_loss(std::span<const double> fx, RowPtrs negs, const LossConfig& cfg) {
  check_cfg(cfg);
  if (negs.empty()) throw EmptyNegatives("rsm_loss needs at least one negative");
  check_unit(fx.data(), fx.size(), "fx");
  check_unit_rows(negs, fx.size(), "negative");
  return rsm_core(fx.data(), negs, fx.size(), cfg, nullptr);
}

double rsm_value_grad(std::span<const double> fx, RowPtrs negs,
                      const LossConfig& cfg, std::span<double> grad_fx) {
  check_cfg(cfg);
  if (negs.empty()) throw EmptyNegatives("rsm_value_grad needs negatives");
  if (grad_fx.size() != fx.size()) {
    throw DimensionMismatch("gradient span has wrong length");
  }
  check_unit(fx.data(), fx.size(), "fx");
  check_unit_rows(negs, fx.size(), "negative");
  return rsm_core(fx.data(), negs, fx.size(), cfg, grad_fx.data());
}

double joint_loss(const SideBatch& x, const SideBatch& y, const LossConfig& cfg) {
  check_cfg(cfg);
  check_side(x, "x side");
  check_side(y, "y side");
  if (!x.anchors || !y.anchors) {
    throw ConfigError("joint_loss needs encoded anchor matrices");
  }
  return side_mean(x, *x.anchors, cfg, nullptr) +
         side_mean(y, *y.anchors, cfg, nullptr);
}

double grad_joint_loss(const enc::EncoderParams& online,
                       const enc::EncodeContext& ctx_x, const SideBatch& x,
                       const enc::EncodeContext& ctx_y, const SideBatch& y,
                       const LossConfig& cfg, enc::EncoderGrads& out) {
  check_cfg(cfg);
  check_side(x, "x side");
  check_side(y, "y side");

  double total = 0.0;
  for (const auto* side : {&x, &y}) {
    const auto& ctx = side == &x ? ctx_x : ctx_y;
    const std::size_t n = side->ids.size();
    Mat anchors = enc::encode_batch(online, ctx, side->ids);
    Mat danchors(n, online.dim);
    total += side_mean(*side, anchors, cfg, &danchors);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      kernels::scale(danchors.row(i), inv_n, online.dim);
      enc::grad_encode(online, ctx, side->ids[i], danchors.row_span(i), out);
    }
  }
  return total;
}

}  // namespace selfalign::loss
