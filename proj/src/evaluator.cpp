#include "selfalign/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "selfalign/errors.hpp"
#include "selfalign/kernels.hpp"

namespace selfalign::eval {

KnnResult knn_l2(const Mat& queries, const Mat& targets, std::size_t k) {
  if (queries.cols() != targets.cols()) {
    throw DimensionMismatch("query dim " + std::to_string(queries.cols()) +
                            " vs target dim " + std::to_string(targets.cols()));
  }
  if (k == 0 || k > targets.rows()) {
    throw DimensionMismatch("k = " + std::to_string(k) + " outside [1, " +
                            std::to_string(targets.rows()) + "]");
  }
  const std::size_t dim = queries.cols();
  KnnResult res;
  res.ids.resize(queries.rows());
  res.dists.resize(queries.rows());
  std::vector<std::pair<double, std::uint32_t>> scored(targets.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    const double* qv = queries.row(q);
    for (std::size_t t = 0; t < targets.rows(); ++t) {
      scored[t] = {kernels::squared_l2(qv, targets.row(t), dim),
                   static_cast<std::uint32_t>(t)};
    }
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end());
    auto& ids = res.ids[q];
    auto& dists = res.dists[q];
    ids.resize(k);
    dists.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      ids[i] = scored[i].second;
      dists[i] = std::sqrt(scored[i].first);
    }
  }
  return res;
}

std::vector<std::uint32_t> exact_ranks(const Mat& queries, const Mat& targets,
                                       std::span<const std::uint32_t> true_idx) {
  if (queries.cols() != targets.cols()) {
    throw DimensionMismatch("query dim vs target dim");
  }
  if (true_idx.size() != queries.rows()) {
    throw DimensionMismatch("one true target index per query required");
  }
  const std::size_t dim = queries.cols();
  std::vector<std::uint32_t> ranks(queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    const double* qv = queries.row(q);
    const std::uint32_t ti = true_idx[q];
    if (ti >= targets.rows()) {
      throw MissingQuery("true target index " + std::to_string(ti) +
                         " outside the candidate set");
    }
    const double dtrue = kernels::squared_l2(qv, targets.row(ti), dim);
    std::uint32_t before = 0;
    for (std::size_t t = 0; t < targets.rows(); ++t) {
      double d = kernels::squared_l2(qv, targets.row(t), dim);
      if (d < dtrue || (d == dtrue && t < ti)) ++before;
    }
    ranks[q] = before + 1;
  }
  return ranks;
}

EvalReport hit_at_k(std::span<const std::uint32_t> ranks, std::size_t n_links,
                    std::string split) {
  if (ranks.size() != n_links) {
    throw MissingQuery("have ranks for " + std::to_string(ranks.size()) +
                       " of " + std::to_string(n_links) + " pairs");
  }
  EvalReport r;
  r.split = std::move(split);
  r.n_queries = ranks.size();
  r.ranks.assign(ranks.begin(), ranks.end());
  if (!ranks.empty()) {
    std::size_t h1 = 0, h10 = 0;
    for (std::uint32_t rank : ranks) {
      if (rank <= 1) ++h1;
      if (rank <= 10) ++h10;
    }
    r.hit1 = static_cast<double>(h1) / static_cast<double>(ranks.size());
    r.hit10 = static_cast<double>(h10) / static_cast<double>(ranks.size());
  }
  return r;
}

EvalReport evaluate_alignment(const Mat& queries, const Mat& candidates,
                              std::span<const std::uint32_t> true_idx,
                              std::string split) {
  auto ranks = exact_ranks(queries, candidates, true_idx);
  return hit_at_k(ranks, true_idx.size(), std::move(split));
}

void write_report_tsv(const std::filesystem::path& path, const EvalReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  char buf[40];
  out << "split\tk\tvalue\tn_queries\n";
  std::snprintf(buf, sizeof(buf), "%.17g", r.hit1);
  out << r.split << "\t1\t" << buf << '\t' << r.n_queries << '\n';
  std::snprintf(buf, sizeof(buf), "%.17g", r.hit10);
  out << r.split << "\t10\t" << buf << '\t' << r.n_queries << '\n';
}

}  // namespace selfalign::eval
