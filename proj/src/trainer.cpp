#include "selfalign/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <utility>

#include "binio.hpp"
#include "selfalign/errors.hpp"
#include "selfalign/kernels.hpp"

namespace selfalign::train {

namespace {

constexpr char kCheckpointMagic[9] = "SALNTRN1";

void write_queue(std::ostream& os, const queue::NegativeQueue& q) {
  binio::put_u64(os, q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const queue::QueueBatch& b = q.entry(i);
    binio::put_u64(os, b.ids.size());
    binio::put_u32_array(os, b.ids.data(), b.ids.size());
    binio::put_f64_array(os, b.vectors.data(), b.vectors.size());
  }
}

void read_queue(std::istream& is, queue::NegativeQueue& q, std::size_t dim) {
  std::uint64_t count = binio::get_u64(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t n = binio::get_u64(is);
    queue::QueueBatch b;
    b.ids.resize(n);
    binio::get_u32_array(is, b.ids.data(), n);
    b.vectors = Mat(n, dim);
    binio::get_f64_array(is, b.vectors.data(), b.vectors.size());
    q.push(std::move(b));
  }
}

}  // namespace

void adam_step(enc::EncoderParams& p, const enc::EncoderGrads& g, AdamState& a,
               double lr, double beta1, double beta2, double eps) {
  const std::size_t total = p.parameter_count();
  if (a.m.empty()) {
    a.m.assign(total, 0.0);
    a.v.assign(total, 0.0);
  }
  if (a.m.size() != total || a.v.size() != total) {
    throw ShapeMismatch("optimizer state does not match parameter count");
  }
  ++a.t;
  const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(a.t));
  const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(a.t));
  auto pts = p.tensors();
  auto gts = g.tensors();
  std::size_t off = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].size() != gts[i].size()) {
      throw ShapeMismatch("gradient does not match parameter tensor");
    }
    kernels::adam_update(pts[i].data(), gts[i].data(), a.m.data() + off,
                         a.v.data() + off, pts[i].size(), lr, beta1, beta2,
                         eps, bias1, bias2);
    off += pts[i].size();
  }
}

Trainer::Trainer(const kg::KnowledgeGraph& gx, const emb::EmbeddingStore& sx,
                 const kg::KnowledgeGraph& gy, const emb::EmbeddingStore& sy,
                 TrainConfig cfg, const emb::EmbeddingStore* rel_x,
                 const emb::EmbeddingStore* rel_y)
    : gx_(gx),
      gy_(gy),
      sx_(sx),
      sy_(sy),
      cfg_(cfg),
      ctx_x_{&sx, &gx, rel_x, cfg.relation_mode},
      ctx_y_{&sy, &gy, rel_y, cfg.relation_mode},
      lcfg_{cfg.tau, cfg.duplication},
      pair_{enc::EncoderParams::init(sx.dim, cfg.seed),
            enc::EncoderParams::init(sx.dim, cfg.seed), cfg.momentum},
      qx_(cfg.queue_k, cfg.batch_size, sx.dim),
      qy_(cfg.queue_k, cfg.batch_size, sx.dim),
      rng_(cfg.seed),
      best_online_(pair_.online),
      grads_(sx.dim) {
  if (cfg_.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (sx.dim != sy.dim) {
    throw DimensionMismatch("embedding stores disagree on dimension");
  }
  if (cfg_.relation_mode && (rel_x == nullptr || rel_y == nullptr)) {
    throw ConfigError("relation mode requires relation embeddings for both sides");
  }
  if (cfg_.tau <= 0.0) throw ConfigError("tau must be positive");
  if (cfg_.duplication < 1.0) throw ConfigError("duplication must be >= 1");
  queue::validate_capacity(cfg_.queue_k, cfg_.batch_size, gx.entity_count(),
                           gy.entity_count());
  steps_per_epoch_ = std::min(gx.entity_count() / cfg_.batch_size,
                              gy.entity_count() / cfg_.batch_size);
  if (steps_per_epoch_ == 0) {
    throw ConfigError("batch_size exceeds an entity set; no full batch fits");
  }
  order_x_.resize(gx.entity_count());
  order_y_.resize(gy.entity_count());
  std::iota(order_x_.begin(), order_x_.end(), 0u);
  std::iota(order_y_.begin(), order_y_.end(), 0u);
}

void Trainer::begin_epoch_if_needed() {
  if (step_in_epoch_ == 0 && !epoch_shuffled_) {
    rng_.shuffle(order_x_);
    rng_.shuffle(order_y_);
    epoch_shuffled_ = true;
  }
}

void Trainer::finish_epoch() {
  step_in_epoch_ = 0;
  epoch_shuffled_ = false;
  ++epoch_;
}

double Trainer::step() {
  begin_epoch_if_needed();
  if (step_in_epoch_ >= steps_per_epoch_) {
    throw ConfigError("epoch exhausted; advance via run()");
  }
  const std::size_t n = cfg_.batch_size;
  std::span<const kg::EntityId> ids_x(order_x_.data() + step_in_epoch_ * n, n);
  std::span<const kg::EntityId> ids_y(order_y_.data() + step_in_epoch_ * n, n);

  queue::QueueBatch tx{{ids_x.begin(), ids_x.end()},
                       enc::encode_batch(pair_.target, ctx_x_, ids_x)};
  queue::QueueBatch ty{{ids_y.begin(), ids_y.end()},
                       enc::encode_batch(pair_.target, ctx_y_, ids_y)};

  double loss_value = std::numeric_limits<double>::quiet_NaN();
  if (qx_.warm() && qy_.warm()) {
    loss::SideBatch bx;
    bx.ids = ids_x;
    loss::SideBatch by;
    by.ids = ids_y;
    if (cfg_.self_negatives) {
      bx.neg_current = &tx;
      bx.neg_queue = &qx_;
      bx.exclude_anchor = true;
      by.neg_current = &ty;
      by.neg_queue = &qy_;
      by.exclude_anchor = true;
    } else {
      bx.neg_current = &ty;
      bx.neg_queue = &qy_;
      bx.exclude_anchor = false;
      by.neg_current = &tx;
      by.neg_queue = &qx_;
      by.exclude_anchor = false;
    }
    grads_.zero();
    loss_value = loss::grad_joint_loss(pair_.online, ctx_x_, bx, ctx_y_, by,
                                       lcfg_, grads_);
    adam_step(pair_.online, grads_, adam_, cfg_.learning_rate, cfg_.adam_beta1,
              cfg_.adam_beta2, cfg_.adam_eps);
    enc::momentum_update(pair_);
    ++optimizer_steps_;
  }
  qx_.push(std::move(tx));
  qy_.push(std::move(ty));
  ++step_in_epoch_;
  ++sampling_steps_;
  return loss_value;
}

TrainResult Trainer::run(const DevEval* dev,
                         const std::filesystem::path* metrics_path) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<MetricRow> rows;
  while (epoch_ < cfg_.max_epochs) {
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    while (step_in_epoch_ < steps_per_epoch_) {
      double l = step();
      if (!std::isnan(l)) {
        loss_sum += l;
        ++loss_count;
      }
    }
    MetricRow row;
    row.epoch = epoch_ + 1;
    row.step = sampling_steps_;
    row.loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count)
                              : std::numeric_limits<double>::quiet_NaN();
    row.dev_hit1 = std::numeric_limits<double>::quiet_NaN();
    row.dev_hit10 = std::numeric_limits<double>::quiet_NaN();
    bool stop = false;
    if (dev != nullptr && *dev) {
      eval::DevScore score = (*dev)(pair_.online);
      row.dev_hit1 = score.hit1;
      row.dev_hit10 = score.hit10;
      if (score.hit1 > best_dev_hit1_) {
        best_dev_hit1_ = score.hit1;
        best_epoch_ = epoch_ + 1;
        evals_since_best_ = 0;
        best_online_ = pair_.online;
      } else {
        ++evals_since_best_;
        if (evals_since_best_ >= cfg_.patience) stop = true;
      }
    } else {
      best_online_ = pair_.online;
      best_epoch_ = epoch_ + 1;
    }
    row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    rows.push_back(row);
    finish_epoch();
    if (stop) break;
  }
  if (metrics_path != nullptr) {
    write_metrics_tsv(*metrics_path, rows, /*append=*/false);
  }
  TrainResult result;
  result.final_pair = pair_;
  result.best_online = best_online_;
  result.metrics = std::move(rows);
  result.epochs_run = epoch_;
  result.best_dev_hit1 = best_dev_hit1_;
  result.best_epoch = best_epoch_;
  return result;
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open checkpoint for writing: " + path.string());
  binio::put_magic(os, kCheckpointMagic);
  binio::put_u64(os, pair_.online.dim);
  binio::put_u64(os, cfg_.batch_size);
  binio::put_u64(os, cfg_.queue_k);
  binio::put_u64(os, epoch_);
  binio::put_u64(os, step_in_epoch_);
  binio::put_u64(os, sampling_steps_);
  binio::put_u64(os, optimizer_steps_);
  binio::put_u64(os, epoch_shuffled_ ? 1 : 0);
  enc::write_params(os, pair_.online);
  enc::write_params(os, pair_.target);
  binio::put_f64(os, pair_.momentum);
  binio::put_u64(os, adam_.t);
  binio::put_u64(os, adam_.m.size());
  binio::put_f64_array(os, adam_.m.data(), adam_.m.size());
  binio::put_f64_array(os, adam_.v.data(), adam_.v.size());
  write_queue(os, qx_);
  write_queue(os, qy_);
  binio::put_string(os, rng_.save_state());
  binio::put_u64(os, order_x_.size());
  binio::put_u32_array(os, order_x_.data(), order_x_.size());
  binio::put_u64(os, order_y_.size());
  binio::put_u32_array(os, order_y_.data(), order_y_.size());
  binio::put_f64(os, best_dev_hit1_);
  binio::put_u64(os, best_epoch_);
  binio::put_u64(os, evals_since_best_);
  enc::write_params(os, best_online_);
  if (!os) throw ConfigError("failed writing checkpoint: " + path.string());
}

void Trainer::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint: " + path.string());
  binio::expect_magic(is, kCheckpointMagic, "trainer checkpoint");
  std::uint64_t dim = binio::get_u64(is);
  std::uint64_t batch = binio::get_u64(is);
  std::uint64_t k = binio::get_u64(is);
  if (dim != pair_.online.dim || batch != cfg_.batch_size || k != cfg_.queue_k) {
    throw ConfigError("checkpoint shape does not match configuration");
  }
  epoch_ = binio::get_u64(is);
  step_in_epoch_ = binio::get_u64(is);
  sampling_steps_ = binio::get_u64(is);
  optimizer_steps_ = binio::get_u64(is);
  epoch_shuffled_ = binio::get_u64(is) != 0;
  pair_.online = enc::read_params(is);
  pair_.target = enc::read_params(is);
  pair_.momentum = binio::get_f64(is);
  adam_.t = binio::get_u64(is);
  std::uint64_t an = binio::get_u64(is);
  adam_.m.resize(an);
  adam_.v.resize(an);
  binio::get_f64_array(is, adam_.m.data(), an);
  binio::get_f64_array(is, adam_.v.data(), an);
  qx_ = queue::NegativeQueue(cfg_.queue_k, cfg_.batch_size, dim);
  qy_ = queue::NegativeQueue(cfg_.queue_k, cfg_.batch_size, dim);
  read_queue(is, qx_, dim);
  read_queue(is, qy_, dim);
  rng_.load_state(binio::get_string(is));
  std::uint64_t nx = binio::get_u64(is);
  if (nx != order_x_.size()) throw ConfigError("checkpoint entity count mismatch");
  binio::get_u32_array(is, order_x_.data(), nx);
  std::uint64_t ny = binio::get_u64(is);
  if (ny != order_y_.size()) throw ConfigError("checkpoint entity count mismatch");
  binio::get_u32_array(is, order_y_.data(), ny);
  best_dev_hit1_ = binio::get_f64(is);
  best_epoch_ = binio::get_u64(is);
  evals_since_best_ = binio::get_u64(is);
  best_online_ = enc::read_params(is);
}

void write_metrics_tsv(const std::filesystem::path& path,
                       const std::vector<MetricRow>& rows, bool append) {
  const bool fresh = !append || !std::filesystem::exists(path) ||
                     std::filesystem::file_size(path) == 0;
  std::ofstream os(path, append ? (std::ios::out | std::ios::app) : std::ios::out);
  if (!os) throw ConfigError("cannot open metrics file: " + path.string());
  if (fresh) os << "epoch\tstep\tloss\tdev_hit1\tdev_hit10\twall_ms\n";
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const MetricRow& r : rows) {
    os << r.epoch << '\t' << r.step << '\t' << fmt(r.loss) << '\t'
       << fmt(r.dev_hit1) << '\t' << fmt(r.dev_hit10) << '\t' << r.wall_ms
       << '\n';
  }
  if (!os) throw ConfigError("failed writing metrics file: " + path.string());
}

}  // namespace selfalign::train
