#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "selfalign/mat.hpp"

namespace selfalign::eval {

struct KnnResult {
  // Per query: candidate indices by ascending l2 distance, ties broken by
  // smaller index. dists holds the matching (non-squared) distances.
  std::vector<std::vector<std::uint32_t>> ids;
  std::vector<std::vector<double>> dists;
};

// Exact brute-force k nearest neighbors.
KnnResult knn_l2(const Mat& queries, const Mat& targets, std::size_t k);

// Exact rank (1-based) of the true target among all candidates, under the
// same (distance, index) ordering as knn_l2.
std::vector<std::uint32_t> exact_ranks(const Mat& queries, const Mat& targets,
                                       std::span<const std::uint32_t> true_idx);

struct EvalReport {
  std::string split;
  double hit1 = 0.0;
  double hit10 = 0.0;
  std::vector<std::uint32_t> ranks;
  std::size_t n_queries = 0;
};

// Ranks must cover every link of the split, one per query.
EvalReport hit_at_k(std::span<const std::uint32_t> ranks, std::size_t n_links,
                    std::string split);

EvalReport evaluate_alignment(const Mat& queries, const Mat& candidates,
                              std::span<const std::uint32_t> true_idx,
                              std::string split);

// TSV rows: split, k, value, n_queries.
void write_report_tsv(const std::filesystem::path& path, const EvalReport& r);

struct DevScore {
  double hit1 = 0.0;
  double hit10 = 0.0;
};

}  // namespace selfalign::eval
