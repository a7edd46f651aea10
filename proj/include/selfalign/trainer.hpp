#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "selfalign/embedding.hpp"
#include "selfalign/encoder.hpp"
#include "selfalign/evaluator.hpp"
#include "selfalign/kg.hpp"
#include "selfalign/loss.hpp"
#include "selfalign/queue.hpp"
#include "selfalign/rng.hpp"

namespace selfalign::train {

struct TrainConfig {
  std::size_t batch_size = 64;   // N
  std::size_t queue_k = 64;      // K stored batches per side
  double tau = 0.08;
  double duplication = 1.0;      // lambda
  double momentum = 0.9999;
  double learning_rate = 1e-6;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 42;
  bool relation_mode = false;
  bool self_negatives = true;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

// One bias-corrected Adam step over all encoder tensors.
void adam_step(enc::EncoderParams& p, const enc::EncoderGrads& g, AdamState& a,
               double lr, double beta1, double beta2, double eps);

struct MetricRow {
  std::size_t epoch = 0;
  std::size_t step = 0;  // cumulative sampling steps
  double loss = 0.0;     // epoch mean over optimizer steps (nan during warm-up)
  double dev_hit1 = 0.0;
  double dev_hit10 = 0.0;
  long long wall_ms = 0;
};

struct TrainResult {
  enc::EncoderPair final_pair;
  enc::EncoderParams best_online;
  std::vector<MetricRow> metrics;
  std::size_t epochs_run = 0;
  double best_dev_hit1 = -1.0;
  std::size_t best_epoch = 0;
};

// Dev scoring is injected: the trainer itself never sees alignment labels.
using DevEval = std::function<eval::DevScore(const enc::EncoderParams& online)>;

class Trainer {
 public:
  Trainer(const kg::KnowledgeGraph& gx, const emb::EmbeddingStore& sx,
          const kg::KnowledgeGraph& gy, const emb::EmbeddingStore& sy,
          TrainConfig cfg, const emb::EmbeddingStore* rel_x = nullptr,
          const emb::EmbeddingStore* rel_y = nullptr);

  std::size_t steps_per_epoch() const { return steps_per_epoch_; }

  // One sampling step: target-encode both batches, take a gradient step when
  // both queues are warm, then push the target encodings. Returns the joint
  // loss, or NaN for a warm-up step.
  double step();

  // Runs epochs with per-epoch dev evaluation and early stopping.
  TrainResult run(const DevEval* dev,
                  const std::filesystem::path* metrics_path = nullptr);

  void save_checkpoint(const std::filesystem::path& path) const;
  void load_checkpoint(const std::filesystem::path& path);

  const enc::EncoderPair& pair() const { return pair_; }
  const AdamState& adam() const { return adam_; }
  const queue::NegativeQueue& queue_x() const { return qx_; }
  const queue::NegativeQueue& queue_y() const { return qy_; }
  std::size_t epoch() const { return epoch_; }
  std::size_t sampling_steps() const { return sampling_steps_; }
  std::size_t optimizer_steps() const { return optimizer_steps_; }

 private:
  void begin_epoch_if_needed();
  void finish_epoch();

  const kg::KnowledgeGraph& gx_;
  const kg::KnowledgeGraph& gy_;
  const emb::EmbeddingStore& sx_;
  const emb::EmbeddingStore& sy_;
  TrainConfig cfg_;
  enc::EncodeContext ctx_x_;
  enc::EncodeContext ctx_y_;
  loss::LossConfig lcfg_;
  std::size_t steps_per_epoch_ = 0;

  enc::EncoderPair pair_;
  AdamState adam_;
  queue::NegativeQueue qx_;
  queue::NegativeQueue qy_;
  Rng rng_;
  std::vector<kg::EntityId> order_x_;
  std::vector<kg::EntityId> order_y_;
  bool epoch_shuffled_ = false;
  std::size_t step_in_epoch_ = 0;
  std::size_t epoch_ = 0;
  std::size_t sampling_steps_ = 0;
  std::size_t optimizer_steps_ = 0;
  double best_dev_hit1_ = -1.0;
  std::size_t best_epoch_ = 0;
  std::size_t evals_since_best_ = 0;
  enc::EncoderParams best_online_;
  enc::EncoderGrads grads_;
};

void write_metrics_tsv(const std::filesystem::path& path,
                       const std::vector<MetricRow>& rows, bool append);

}  // namespace selfalign::train
