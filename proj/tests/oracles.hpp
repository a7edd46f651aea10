#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "selfalign/encoder.hpp"
#include "selfalign/mat.hpp"

// Independent reference implementations used to cross-check the library.
// Everything here is deliberately straight-line: no shared kernels, no
// log-sum-exp stabilization, no partial sorts.
namespace oracle {

double dot(std::span<const double> a, std::span<const double> b);

double asm_direct(std::span<const double> fx, std::span<const double> fy,
                  const std::vector<std::vector<double>>& negs, double tau,
                  double lambda);

double rsm_direct(std::span<const double> fx,
                  const std::vector<std::vector<double>>& negs, double tau,
                  double lambda);

// Full (distance, index) sort per query; squared distances compared exactly.
std::vector<std::vector<std::uint32_t>> knn_bruteforce(const selfalign::Mat& q,
                                                       const selfalign::Mat& t,
                                                       std::size_t k);

std::vector<std::uint32_t> ranks_bruteforce(
    const selfalign::Mat& q, const selfalign::Mat& t,
    std::span<const std::uint32_t> true_idx);

// Plain-loop forward pass of the one-layer attention aggregator.
std::vector<double> encode_direct(const selfalign::enc::EncoderParams& p,
                                  const selfalign::enc::EncodeContext& ctx,
                                  selfalign::kg::EntityId e);

// Textbook bias-corrected Adam recurrence over a flat parameter vector.
struct AdamRef {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  void step(std::vector<double>& params, const std::vector<double>& grads,
            double lr, double beta1, double beta2, double eps);
};

}  // namespace oracle
