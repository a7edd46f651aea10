// Acceptance harness: one pass/fail line per criterion, exit code equals the
// number of failed criteria. Each criterion is self-contained and keeps its
// own wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "selfalign/embedding.hpp"
#include "selfalign/encoder.hpp"
#include "selfalign/errors.hpp"
#include "selfalign/evaluator.hpp"
#include "selfalign/kg.hpp"
#include "selfalign/loss.hpp"
#include "selfalign/mat.hpp"
#include "selfalign/queue.hpp"
#include "selfalign/rng.hpp"
#include "selfalign/synth.hpp"
#include "selfalign/theory.hpp"
#include "selfalign/trainer.hpp"
#include "testutil.hpp"

namespace sa = selfalign;
namespace enc = sa::enc;
namespace emb = sa::emb;
namespace kg = sa::kg;
namespace queue = sa::queue;
namespace fs = std::filesystem;
using sa::Mat;
using sa::Rng;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

kg::KnowledgeGraph ring_graph(std::size_t n, const std::string& prefix) {
  kg::KnowledgeGraph g;
  g.relation_raw_ids = {"r0"};
  g.relation_names = {"r0"};
  for (std::size_t i = 0; i < n; ++i) {
    g.raw_ids.push_back(prefix + std::to_string(i));
    g.entity_names.push_back(prefix + " " + std::to_string(i));
    g.id_of_raw[g.raw_ids.back()] = static_cast<kg::EntityId>(i);
  }
  g.neighbors.resize(n);
  auto link = [&](std::size_t a, std::size_t b) {
    g.triples.push_back({static_cast<kg::EntityId>(a), 0,
                         static_cast<kg::EntityId>(b)});
    g.neighbors[a].push_back({static_cast<kg::EntityId>(b), 0});
    g.neighbors[b].push_back({static_cast<kg::EntityId>(a), 0});
  };
  for (std::size_t i = 0; i < n; ++i) link(i, (i + 1) % n);
  if (n > 4) link(0, n / 2);
  for (auto& nb : g.neighbors) {
    std::sort(nb.begin(), nb.end(), [](const kg::Neighbor& a,
                                       const kg::Neighbor& b) {
      return a.entity != b.entity ? a.entity < b.entity
                                  : a.relation < b.relation;
    });
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return g;
}

// Random well-scaled parameters; gradient checks are a pointwise property, so
// the operating point need not come from init().
enc::EncoderParams rand_params(std::size_t dim, Rng& rng) {
  enc::EncoderParams p = enc::EncoderParams::init(dim, rng.next());
  const double root = std::sqrt(static_cast<double>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      p.w_center(i, j) = (i == j ? 1.0 : 0.0) + 0.2 * rng.normal() / root;
      p.w_neighbor(i, j) = 0.1 * (i == j ? 1.0 : 0.0) + 0.05 * rng.normal() / root;
    }
  }
  for (double& a : p.attn) a = 0.5 * rng.normal();
  return p;
}

emb::EmbeddingStore make_store(std::size_t n, std::size_t dim,
                               std::uint64_t seed) {
  emb::EmbeddingStore s;
  s.dim = dim;
  s.vectors = Mat(n, dim);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      s.vectors(i, j) = rng.normal();
      norm += s.vectors(i, j) * s.vectors(i, j);
    }
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < dim; ++j) s.vectors(i, j) /= norm;
  }
  return s;
}

queue::QueueBatch unit_batch(const std::vector<kg::EntityId>& ids,
                             std::size_t dim, std::uint64_t seed) {
  queue::QueueBatch b;
  b.ids = ids;
  b.vectors = Mat(ids.size(), dim);
  Rng rng(seed);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      b.vectors(i, j) = rng.normal();
      norm += b.vectors(i, j) * b.vectors(i, j);
    }
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < dim; ++j) b.vectors(i, j) /= norm;
  }
  return b;
}

// ---------------------------------------------------------------- criterion 1

bool crit_sandwich(std::string& detail) {
  Timer t;
  sa::theory::SandwichConfig cfg;  // 10,000 instances per (tau, dim, m) cell
  sa::theory::CheckReport rep = sa::theory::check_sandwich(cfg);
  double worst = 0.0;
  for (const auto& r : rep.rows) worst = std::max(worst, r.estimate);
  double secs = t.seconds();
  bool ok = rep.pass && secs < 30.0;
  detail = fmt("%zu cells, worst violation %.2e (slack 1e-9), %.1fs",
               rep.rows.size(), worst, secs);
  return ok;
}

// ---------------------------------------------------------------- criterion 2

bool crit_limit_decay(std::string& detail) {
  Timer t;
  sa::theory::DecayConfig cfg;
  cfg.ref_samples = 1000000;  // reference limit sample count
  sa::theory::CheckReport rep = sa::theory::check_limit_decay(cfg);
  bool ok = rep.pass;
  double last_est = 0.0, last_bound = 0.0;
  for (const auto& r : rep.rows) {
    if (r.m == cfg.ms.back()) {
      last_est = std::max(last_est, r.estimate);
      last_bound = std::max(last_bound, r.bound);
    }
  }
  double secs = t.seconds();
  ok = ok && secs < 120.0;
  detail = fmt("final-m deviation %.2e under bound %.2e, decreasing, %.1fs",
               last_est, last_bound, secs);
  return ok;
}

// ---------------------------------------------------------------- criterion 3

bool crit_source_gap(std::string& detail) {
  Timer t;
  sa::theory::GapConfig cfg;
  sa::theory::CheckReport rep = sa::theory::check_negative_source_gap(cfg);
  double final_gap = 0.0, final_se = 0.0, pw = 0.0, pw_bound = 0.0;
  for (const auto& r : rep.rows) {
    if (r.check == "pointwise") {
      pw = r.estimate;
      pw_bound = r.bound;
    } else if (r.m == cfg.ms.back()) {
      final_gap = r.estimate;
      final_se = r.std_err;
    }
  }
  double secs = t.seconds();
  bool ok = rep.pass && secs < 120.0;
  detail = fmt("final gap %.2e (3se %.2e), max|log S| %.3f < %.3f, %.1fs",
               final_gap, 3.0 * final_se, pw, pw_bound, secs);
  return ok;
}

// ---------------------------------------------------------------- criterion 4

bool crit_gradients(std::string& detail) {
  Timer t;
  const double h = 1e-5;
  const double tol = 1e-4;
  Rng rng(4242);
  std::size_t instances = 0, entries = 0;
  double worst = 0.0;

  auto check_tensors = [&](enc::EncoderParams& p, const enc::EncoderGrads& g,
                           auto&& value) {
    auto pts = p.tensors();
    auto gts =
        const_cast<enc::EncoderGrads&>(g).tensors();  // read-only access
    double gmax = 0.0;
    for (auto& ten : gts)
      for (double v : ten) gmax = std::max(gmax, std::fabs(v));
    bool ok = true;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      for (std::size_t i = 0; i < pts[k].size(); ++i) {
        double& x = pts[k][i];
        const double saved = x;
        x = saved + h;
        const double fp = value();
        x = saved - h;
        const double fm = value();
        x = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double an = gts[k][i];
        // The floor keeps entries far below the gradient's scale from being
        // judged by central-difference roundoff: such entries must still
        // agree to ~1e-9 absolute.
        const double denom =
            std::max({std::fabs(fd), std::fabs(an), 1e-5 * (1.0 + gmax)});
        const double rel = std::fabs(fd - an) / denom;
        worst = std::max(worst, rel);
        ok = ok && rel <= tol;
        ++entries;
      }
    }
    return ok;
  };

  bool all_ok = true;

  // Scalar-projection encoder instances: J = c . f(e).
  for (int inst = 0; inst < 52; ++inst) {
    const std::size_t dim = 4 + 2 * (inst % 3);
    const bool rel_mode = inst % 2 == 1;
    kg::KnowledgeGraph g = ring_graph(6, "e");
    emb::EmbeddingStore store = make_store(6, dim, rng.next());
    emb::EmbeddingStore rels = make_store(1, dim, rng.next());
    enc::EncodeContext ctx{&store, &g, rel_mode ? &rels : nullptr, rel_mode};
    enc::EncoderParams p = rand_params(dim, rng);
    const kg::EntityId e = static_cast<kg::EntityId>(rng.below(6));
    std::vector<double> c(dim);
    for (double& v : c) v = rng.normal();

    enc::EncoderGrads grads(dim);
    grads.zero();
    enc::grad_encode(p, ctx, e, c, grads);
    auto value = [&]() {
      std::vector<double> out = enc::encode(p, ctx, e);
      double s = 0.0;
      for (std::size_t j = 0; j < dim; ++j) s += c[j] * out[j];
      return s;
    };
    all_ok = check_tensors(p, grads, value) && all_ok;
    ++instances;
  }

  // Joint-loss instances over both negative-sourcing modes.
  const double taus[3] = {0.08, 0.5, 1.0};
  for (int inst = 0; inst < 52; ++inst) {
    const std::size_t dim = 6;
    const bool self_mode = inst % 2 == 0;
    kg::KnowledgeGraph gx = ring_graph(5, "x");
    kg::KnowledgeGraph gy = ring_graph(5, "y");
    emb::EmbeddingStore sx = make_store(5, dim, rng.next());
    emb::EmbeddingStore sy = make_store(5, dim, rng.next());
    enc::EncodeContext cx{&sx, &gx, nullptr, false};
    enc::EncodeContext cy{&sy, &gy, nullptr, false};
    enc::EncoderParams online = rand_params(dim, rng);

    std::vector<kg::EntityId> ids_x{static_cast<kg::EntityId>(rng.below(5)), 0};
    ids_x[1] = static_cast<kg::EntityId>((ids_x[0] + 1 + rng.below(4)) % 5);
    std::vector<kg::EntityId> ids_y{static_cast<kg::EntityId>(rng.below(5)), 0};
    ids_y[1] = static_cast<kg::EntityId>((ids_y[0] + 1 + rng.below(4)) % 5);
    queue::QueueBatch cur_x = unit_batch(ids_x, dim, rng.next());
    queue::QueueBatch cur_y = unit_batch(ids_y, dim, rng.next());
    queue::NegativeQueue qx(1, 2, dim), qy(1, 2, dim);
    qx.push(unit_batch({ids_x[0], 4}, dim, rng.next()));
    qy.push(unit_batch({ids_y[0], 4}, dim, rng.next()));

    sa::loss::LossConfig cfg{taus[inst % 3], inst % 4 == 3 ? 2.0 : 1.0};
    sa::loss::SideBatch bx, by;
    bx.ids = ids_x;
    by.ids = ids_y;
    bx.neg_current = self_mode ? &cur_x : &cur_y;
    bx.neg_queue = self_mode ? &qx : &qy;
    bx.exclude_anchor = self_mode;
    by.neg_current = self_mode ? &cur_y : &cur_x;
    by.neg_queue = self_mode ? &qy : &qx;
    by.exclude_anchor = self_mode;

    enc::EncoderGrads grads(dim);
    grads.zero();
    sa::loss::grad_joint_loss(online, cx, bx, cy, by, cfg, grads);
    auto value = [&]() {
      Mat ax = enc::encode_batch(online, cx, bx.ids);
      Mat ay = enc::encode_batch(online, cy, by.ids);
      sa::loss::SideBatch jx = bx, jy = by;
      jx.anchors = &ax;
      jy.anchors = &ay;
      return sa::loss::joint_loss(jx, jy, cfg);
    };
    all_ok = check_tensors(online, grads, value) && all_ok;
    ++instances;
  }

  double secs = t.seconds();
  bool ok = all_ok && instances >= 100 && secs < 60.0;
  detail = fmt("%zu instances, %zu entries, worst rel err %.2e (tol 1e-4), %.1fs",
               instances, entries, worst, secs);
  return ok;
}

// ---------------------------------------------------------------- criterion 5

bool crit_knn(std::string& detail) {
  Timer t;
  Rng rng(555);
  std::size_t checked = 0;
  bool all_ok = true;
  for (int inst = 0; inst < 50; ++inst) {
    std::size_t nq, nt, dim;
    const bool lattice = inst % 2 == 1;  // coarse coordinates force ties
    if (inst == 0) {
      nq = 500;
      nt = 1000;
      dim = 8;
    } else {
      nq = 1 + rng.below(500);
      nt = 10 + rng.below(991);
      dim = lattice ? 2 + rng.below(2) : 2 + rng.below(15);
    }
    Mat q(nq, dim), c(nt, dim);
    auto fill = [&](Mat& m) {
      for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
          m(i, j) = lattice ? static_cast<double>(rng.below(3)) - 1.0
                            : rng.normal();
    };
    fill(q);
    fill(c);
    if (nt >= 4) {  // exact duplicate rows guarantee tie cases
      for (std::size_t j = 0; j < dim; ++j) {
        c(1, j) = c(0, j);
        c(3, j) = c(2, j);
      }
    }
    for (std::size_t k : {std::size_t{1}, std::size_t{10}}) {
      sa::eval::KnnResult got = sa::eval::knn_l2(q, c, k);
      auto want = oracle::knn_bruteforce(q, c, k);
      all_ok = all_ok && got.ids == want;
      ++checked;
    }
  }
  double secs = t.seconds();
  bool ok = all_ok && secs < 30.0;
  detail = fmt("50 instances x k in {1,10} (%zu comparisons), ties included, %.1fs",
               checked, secs);
  return ok;
}

// ------------------------------------------------------- criteria 6 and 7

struct E2eRun {
  double untrained = 0.0;
  double trained = 0.0;
  std::size_t epochs = 0;
};

struct LoadedData {
  kg::KnowledgeGraph gx, gy;
  emb::EmbeddingStore sx, sy;
  kg::AlignmentLinkSet train_links, test_links;
};

LoadedData load_dataset(const fs::path& dir) {
  LoadedData d;
  d.gx = kg::load_kg(dir / "x_triples.tsv", dir / "x_names.tsv");
  d.gy = kg::load_kg(dir / "y_triples.tsv", dir / "y_names.tsv");
  d.sx = emb::load_embeddings(dir / "x_embeddings.tsv", d.gx);
  d.sy = emb::load_embeddings(dir / "y_embeddings.tsv", d.gy);
  d.train_links =
      kg::load_links(dir / "links_train.tsv", d.gx, d.gy, kg::Split::train);
  d.test_links =
      kg::load_links(dir / "links_test.tsv", d.gx, d.gy, kg::Split::test);
  return d;
}

double test_hit1(const LoadedData& d, const enc::EncoderParams& params) {
  std::vector<kg::EntityId> qids, tids;
  std::vector<std::uint32_t> true_idx;
  for (const auto& link : d.test_links.links) {
    qids.push_back(link.x);
    true_idx.push_back(static_cast<std::uint32_t>(tids.size()));
    tids.push_back(link.y);
  }
  enc::EncodeContext cx{&d.sx, &d.gx, nullptr, false};
  enc::EncodeContext cy{&d.sy, &d.gy, nullptr, false};
  Mat q = enc::encode_batch(params, cx, qids);
  Mat c = enc::encode_batch(params, cy, tids);
  return sa::eval::evaluate_alignment(q, c, true_idx, "test").hit1;
}

E2eRun run_training(const LoadedData& d, bool self_negatives) {
  sa::train::TrainConfig cfg;  // stock defaults: N=64, tau=0.08, m=0.9999,
  cfg.queue_k = 24;            // lr=1e-6; K scaled so (1+K)N=1600 < 2000
  cfg.self_negatives = self_negatives;

  E2eRun out;
  out.untrained = test_hit1(d, enc::EncoderParams::init(d.sx.dim, cfg.seed));

  kg::AlignmentLinkSet links = d.train_links;
  kg::carve_dev(links, 0.05, cfg.seed);
  auto dev_links = kg::links_of(links, kg::Split::dev);
  std::vector<kg::EntityId> qids, tids;
  std::vector<std::uint32_t> true_idx;
  for (std::size_t i = 0; i < dev_links.size(); ++i) {
    qids.push_back(dev_links[i].x);
    tids.push_back(dev_links[i].y);
    true_idx.push_back(static_cast<std::uint32_t>(i));
  }
  sa::train::Trainer trainer(d.gx, d.sx, d.gy, d.sy, cfg);
  sa::train::DevEval dev = [&](const enc::EncoderParams& online) {
    enc::EncodeContext cx{&d.sx, &d.gx, nullptr, false};
    enc::EncodeContext cy{&d.sy, &d.gy, nullptr, false};
    Mat q = enc::encode_batch(online, cx, qids);
    Mat c = enc::encode_batch(online, cy, tids);
    sa::eval::EvalReport r = sa::eval::evaluate_alignment(q, c, true_idx, "dev");
    return sa::eval::DevScore{r.hit1, r.hit10};
  };
  sa::train::TrainResult res = trainer.run(&dev);
  out.trained = test_hit1(d, res.best_online);
  out.epochs = res.epochs_run;
  return out;
}

bool crit_e2e(const fs::path& data42, std::string& detail) {
  Timer t;
  LoadedData d = load_dataset(data42);
  E2eRun r = run_training(d, true);
  double secs = t.seconds();
  bool band = r.untrained >= 0.3 && r.untrained <= 0.6;
  bool uplift = r.trained >= r.untrained + 0.05;
  bool ok = band && uplift && secs < 600.0;
  detail = fmt("untrained %.3f in [0.3,0.6], trained %.3f (+%.3f >= +0.05), "
               "%zu epochs, %.1fs",
               r.untrained, r.trained, r.trained - r.untrained, r.epochs, secs);
  return ok;
}

bool crit_ablation(const std::vector<fs::path>& datasets, std::string& detail) {
  Timer t;
  double self_sum = 0.0, cross_sum = 0.0;
  for (const fs::path& dir : datasets) {
    LoadedData d = load_dataset(dir);
    self_sum += run_training(d, true).trained;
    cross_sum += run_training(d, false).trained;
  }
  const double self_avg = self_sum / datasets.size();
  const double cross_avg = cross_sum / datasets.size();
  double secs = t.seconds();
  bool ok = cross_avg <= self_avg;
  detail = fmt("mean over %zu seeds: cross %.3f <= self %.3f, %.1fs",
               datasets.size(), cross_avg, self_avg, secs);
  return ok;
}

// ---------------------------------------------------------------- criterion 8

bool crit_mechanics(std::string& detail) {
  Timer t;
  bool ok = true;
  std::string fail;

  // FIFO eviction: capacity 2, oldest batch leaves first.
  {
    queue::NegativeQueue q(2, 2, 4);
    q.push(unit_batch({10, 11}, 4, 1));
    q.push(unit_batch({20, 21}, 4, 2));
    q.push(unit_batch({30, 31}, 4, 3));
    ok = ok && q.size() == 2 && q.entry(0).ids[0] == 20 &&
         q.entry(1).ids[0] == 30;
    if (!(q.size() == 2 && q.entry(0).ids[0] == 20)) fail = "fifo";
  }

  // Negative pool count: (1+K)*N - 1 with disjoint ids.
  {
    const std::size_t n = 4, k = 3, dim = 4;
    queue::NegativeQueue q(k, n, dim);
    q.push(unit_batch({100, 101, 102, 103}, dim, 4));
    q.push(unit_batch({110, 111, 112, 113}, dim, 5));
    q.push(unit_batch({120, 121, 122, 123}, dim, 6));
    queue::QueueBatch current = unit_batch({1, 2, 3, 4}, dim, 7);
    auto pool = q.negatives_for(current, 0);
    ok = ok && pool.size() == (1 + k) * n - 1;
    if (pool.size() != (1 + k) * n - 1) fail = "pool count";
  }

  // Capacity rule: strict inequality, boundary cases exact.
  {
    bool threw_eq = false, threw_over = false, ok_under = true;
    try {
      queue::validate_capacity(24, 80, 2000, 2000);  // (1+24)*80 == 2000
    } catch (const sa::CapacityViolation&) {
      threw_eq = true;
    }
    try {
      queue::validate_capacity(31, 64, 2000, 2000);  // 2048 > 2000
    } catch (const sa::CapacityViolation&) {
      threw_over = true;
    }
    try {
      queue::validate_capacity(30, 64, 2000, 2000);  // 1984 < 2000
    } catch (const sa::CapacityViolation&) {
      ok_under = false;
    }
    ok = ok && threw_eq && threw_over && ok_under;
    if (!(threw_eq && threw_over && ok_under)) fail = "capacity rule";
  }

  // Momentum blend: after k updates toward a frozen online encoder the
  // target-online residual shrinks by exactly m^k per coordinate.
  {
    enc::EncoderPair pair{enc::EncoderParams::init(6, 1),
                          enc::EncoderParams::init(6, 2), 0.9};
    enc::EncoderParams start_target = pair.target;
    const int k = 20;
    for (int i = 0; i < k; ++i) enc::momentum_update(pair);
    const double decay = std::pow(0.9, k);
    auto on = pair.online.tensors();
    auto tg = pair.target.tensors();
    auto t0 = start_target.tensors();
    double worst = 0.0;
    for (std::size_t ten = 0; ten < on.size(); ++ten) {
      for (std::size_t i = 0; i < on[ten].size(); ++i) {
        double expect = on[ten][i] + decay * (t0[ten][i] - on[ten][i]);
        worst = std::max(worst, std::fabs(tg[ten][i] - expect));
      }
    }
    ok = ok && worst <= 1e-12;
    if (worst > 1e-12) fail = "momentum decay";
  }

  // Checkpoint round trip: bit-exact state, bit-identical subsequent steps.
  {
    kg::KnowledgeGraph gx = ring_graph(24, "x");
    kg::KnowledgeGraph gy = ring_graph(24, "y");
    emb::EmbeddingStore sx = make_store(24, 8, 70);
    emb::EmbeddingStore sy = make_store(24, 8, 71);
    sa::train::TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.queue_k = 2;
    cfg.tau = 0.5;
    cfg.learning_rate = 1e-3;
    cfg.momentum = 0.5;
    cfg.seed = 97;

    testutil::TempDir dir;
    sa::train::Trainer a(gx, sx, gy, sy, cfg);
    for (int i = 0; i < 4; ++i) a.step();  // 6 steps per epoch available
    a.save_checkpoint(dir.file("ck.bin"));

    sa::train::Trainer b(gx, sx, gy, sy, cfg);
    b.load_checkpoint(dir.file("ck.bin"));

    auto tensors_equal = [](const enc::EncoderParams& l,
                            const enc::EncoderParams& r) {
      auto lt = const_cast<enc::EncoderParams&>(l).tensors();
      auto rt = const_cast<enc::EncoderParams&>(r).tensors();
      for (std::size_t i = 0; i < lt.size(); ++i)
        for (std::size_t j = 0; j < lt[i].size(); ++j)
          if (lt[i][j] != rt[i][j]) return false;
      return true;
    };
    bool state_ok = tensors_equal(a.pair().online, b.pair().online) &&
                    tensors_equal(a.pair().target, b.pair().target) &&
                    a.adam().m == b.adam().m && a.adam().v == b.adam().v &&
                    a.adam().t == b.adam().t &&
                    a.sampling_steps() == b.sampling_steps();
    bool steps_ok = true;
    for (int i = 0; i < 2; ++i) {
      double la = a.step(), lb = b.step();
      steps_ok = steps_ok && ((la == lb) || (std::isnan(la) && std::isnan(lb)));
    }
    ok = ok && state_ok && steps_ok;
    if (!(state_ok && steps_ok)) fail = "checkpoint round trip";
  }

  double secs = t.seconds();
  ok = ok && secs < 10.0;
  detail = fail.empty() ? fmt("all mechanics exact, %.1fs", secs)
                        : fmt("failed at: %s, %.1fs", fail.c_str(), secs);
  return ok;
}

}  // namespace

int main() {
  testutil::TempDir data;
  std::vector<fs::path> datasets;
  for (std::uint64_t seed : {42, 43, 44}) {
    sa::synth::SyntheticSpec spec;  // 2000 entities, dim 32, defaults
    spec.seed = seed;
    fs::path dir = data.file("ds" + std::to_string(seed));
    sa::synth::generate(spec, dir);
    datasets.push_back(dir);
  }

  struct Row {
    const char* name;
    bool pass;
    std::string detail;
  };
  std::vector<Row> rows;
  auto run = [&](const char* name, auto&& fn) {
    std::string detail;
    bool pass = false;
    try {
      pass = fn(detail);
    } catch (const std::exception& e) {
      detail = fmt("exception: %s", e.what());
    }
    rows.push_back({name, pass, detail});
    std::printf("criterion %zu %-14s %s  (%s)\n", rows.size(), name,
                pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
  };

  run("sandwich", [](std::string& d) { return crit_sandwich(d); });
  run("limit_decay", [](std::string& d) { return crit_limit_decay(d); });
  run("source_gap", [](std::string& d) { return crit_source_gap(d); });
  run("gradients", [](std::string& d) { return crit_gradients(d); });
  run("knn_exact", [](std::string& d) { return crit_knn(d); });
  run("e2e_alignment",
      [&](std::string& d) { return crit_e2e(datasets[0], d); });
  run("ablation", [&](std::string& d) { return crit_ablation(datasets, d); });
  run("mechanics", [](std::string& d) { return crit_mechanics(d); });

  int failures = 0;
  for (const auto& r : rows) failures += r.pass ? 0 : 1;
  std::printf("acceptance: %zu/%zu criteria passed\n", rows.size() - failures,
              rows.size());
  return failures;
}
