#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "selfalign/embedding.hpp"
#include "selfalign/kg.hpp"
#include "selfalign/mat.hpp"

namespace selfalign::enc {

// One-layer single-head attention aggregator over the 1-hop neighborhood:
//   h_c = w_center * v_e
//   n_j = v_j                      (or normalize(v_j + v_rel) in relation mode)
//   h_j = w_neighbor * n_j
//   s_j = leaky_relu(attn^T [h_c ; h_j])
//   f(e) = normalize(h_c + sum_j softmax(s)_j * h_j)
struct EncoderParams {
  std::size_t dim = 0;
  double leaky_slope = 0.2;
  Mat w_center;                // dim x dim
  Mat w_neighbor;              // dim x dim
  std::vector<double> attn;    // 2 * dim

  // Scaled near-identity start: w_center = s(I + U(+-1e-3)), w_neighbor a
  // further 0.1 of that, attn ~ U(+-1/sqrt(2 dim)), with s = kInitScale.
  // The output normalization cancels s, so untrained outputs track the raw
  // embeddings and the before-training baseline is meaningful; small s keeps
  // the weights within reach of low-learning-rate fine-tuning.
  static constexpr double kInitScale = 0.002;
  static EncoderParams init(std::size_t dim, std::uint64_t seed);

  // Trainable tensors in declared (serialization) order.
  std::array<std::span<double>, 3> tensors();
  std::array<std::span<const double>, 3> tensors() const;
  std::size_t parameter_count() const { return dim * dim * 2 + 2 * dim; }
};

struct EncoderPair {
  EncoderParams online;
  EncoderParams target;
  double momentum = 0.9999;
};

// target <- m * target + (1 - m) * online, elementwise over every tensor.
void momentum_update(EncoderPair& pair);

struct EncodeContext {
  const emb::EmbeddingStore* entity_store = nullptr;
  const kg::KnowledgeGraph* graph = nullptr;
  const emb::EmbeddingStore* relation_store = nullptr;  // required in relation mode
  bool relation_mode = false;
};

void encode_into(const EncoderParams& p, const EncodeContext& ctx,
                 kg::EntityId e, double* out);
std::vector<double> encode(const EncoderParams& p, const EncodeContext& ctx,
                           kg::EntityId e);
Mat encode_batch(const EncoderParams& p, const EncodeContext& ctx,
                 std::span<const kg::EntityId> ids);

struct EncoderGrads {
  Mat w_center;
  Mat w_neighbor;
  std::vector<double> attn;

  explicit EncoderGrads(std::size_t dim = 0)
      : w_center(dim, dim), w_neighbor(dim, dim), attn(2 * dim, 0.0) {}
  void zero();
  std::array<std::span<double>, 3> tensors();
  std::array<std::span<const double>, 3> tensors() const;
};

// Accumulates d(upstream . f(e))/d(params) into `accum`. Embeddings are
// frozen inputs, so no gradient flows to them.
void grad_encode(const EncoderParams& p, const EncodeContext& ctx,
                 kg::EntityId e, std::span<const double> upstream,
                 EncoderGrads& accum);

// Versioned binary blobs; round trips are bit-exact.
void save_params(const std::filesystem::path& path, const EncoderParams& p);
EncoderParams load_params(const std::filesystem::path& path);
void save_pair(const std::filesystem::path& path, const EncoderPair& pair);
EncoderPair load_pair(const std::filesystem::path& path);

// Stream forms used by the trainer checkpoint.
void write_params(std::ostream& os, const EncoderParams& p);
EncoderParams read_params(std::istream& is);

}  // namespace selfalign::enc
