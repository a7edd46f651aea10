#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "selfalign/kg.hpp"
#include "selfalign/mat.hpp"

namespace selfalign::emb {

// Unit-norm embedding rows indexed by dense entity (or relation) id.
struct EmbeddingStore {
  std::size_t dim = 0;
  Mat vectors;

  std::span<const double> vec(std::uint32_t id) const {
    return vectors.row_span(id);
  }
  std::size_t count() const { return vectors.rows(); }
};

// TSV: first line "dim<TAB>D", then raw_id<TAB>v1<TAB>...<TAB>vD.
// Every entity of `g` must be covered; rows are l2-normalized on load.
EmbeddingStore load_embeddings(const std::filesystem::path& path,
                               const kg::KnowledgeGraph& g);

void save_embeddings(const std::filesystem::path& path,
                     const EmbeddingStore& store,
                     const kg::KnowledgeGraph& g);

// Deterministic name embedding: character 3-grams with begin/end sentinels,
// each gram hashed (seeded) to a signed bucket, accumulated in sorted gram
// order, then l2-normalized. Stable across processes and platforms.
std::vector<double> fallback_embed(std::string_view name, std::size_t dim,
                                   std::uint64_t seed);

EmbeddingStore fallback_store(const std::vector<std::string>& names,
                              std::size_t dim, std::uint64_t seed);

}  // namespace selfalign::emb
