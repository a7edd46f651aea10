#include "selfalign/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>

#include "selfalign/errors.hpp"
#include "selfalign/kernels.hpp"
#include "selfalign/rng.hpp"

namespace selfalign::emb {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(where + ": bad float \"" + std::string(s) + "\"");
  }
  return v;
}

std::uint64_t hash_bytes(std::string_view s, std::uint64_t seed) {
  // FNV-1a with a seeded basis, then a finalizer for dispersal.
  std::uint64_t h = 14695981039346656037ull ^ mix64(seed);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return mix64(h);
}

}  // namespace

EmbeddingStore load_embeddings(const std::filesystem::path& path,
                               const kg::KnowledgeGraph& g) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string where_base = path.filename().string();
  std::string line;
  std::size_t lineno = 0;

  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError(where_base + ": empty file");
  auto header = split_tabs(line);
  if (header.size() != 2 || header[0] != "dim") {
    throw ParseError(where_base + ":1: expected header dim<TAB>D");
  }
  std::size_t dim = 0;
  {
    auto [ptr, ec] =
        std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim);
    if (ec != std::errc() || ptr != header[1].data() + header[1].size() || dim == 0) {
      throw ParseError(where_base + ":1: bad dimension \"" +
                       std::string(header[1]) + "\"");
    }
  }

  EmbeddingStore store;
  store.dim = dim;
  store.vectors = Mat(g.entity_count(), dim);
  std::vector<char> seen(g.entity_count(), 0);

  while (next_line()) {
    std::string where = where_base + ":" + std::to_string(lineno);
    auto fields = split_tabs(line);
    if (fields.size() != dim + 1) {
      throw DimensionMismatch(where + ": expected " + std::to_string(dim) +
                              " values, got " + std::to_string(fields.size() - 1));
    }
    auto it = g.id_of_raw.find(std::string(fields[0]));
    if (it == g.id_of_raw.end()) continue;  // rows for unknown entities are ignored
    kg::EntityId id = it->second;
    double* row = store.vectors.row(id);
    for (std::size_t c = 0; c < dim; ++c) {
      row[c] = parse_double(fields[c + 1], where);
    }
    double norm = kernels::nrm2(row, dim);
    if (norm < 1e-12) {
      throw ZeroVector(where + ": zero vector for entity " + std::string(fields[0]));
    }
    kernels::scale(row, 1.0 / norm, dim);
    seen[id] = 1;
  }

  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw MissingEntity(where_base + ": no embedding for entity " + g.raw_ids[i]);
    }
  }
  return store;
}

void save_embeddings(const std::filesystem::path& path,
                     const EmbeddingStore& store,
                     const kg::KnowledgeGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "dim\t" << store.dim << "\n";
  char buf[40];
  for (std::size_t i = 0; i < g.entity_count(); ++i) {
    out << g.raw_ids[i];
    const double* row = store.vectors.row(i);
    for (std::size_t c = 0; c < store.dim; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

std::vector<double> fallback_embed(std::string_view name, std::size_t dim,
                                   std::uint64_t seed) {
  if (dim < 8) throw ConfigError("fallback embedding needs dim >= 8");
  if (name.empty()) throw EmptyName("fallback_embed got an empty name");

  std::string s;
  s.reserve(name.size() + 2);
  s.push_back('\x02');
  s.append(name);
  s.push_back('\x03');

  std::vector<std::string_view> grams;
  grams.reserve(s.size());
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
    grams.emplace_back(s.data() + i, 3);
  }
  std::sort(grams.begin(), grams.end());

  std::vector<double> v(dim, 0.0);
  for (std::string_view g : grams) {
    std::uint64_t h = hash_bytes(g, seed);
    double sign = (h & (1ull << 63)) ? -1.0 : 1.0;
    v[static_cast<std::size_t>(h % dim)] += sign;
  }
  double norm = kernels::nrm2(v.data(), dim);
  if (norm < 1e-12) {
    // Total cancellation across buckets; fall back to a deterministic one-hot.
    std::fill(v.begin(), v.end(), 0.0);
    v[static_cast<std::size_t>(hash_bytes(s, seed ^ 0x5bd1e995u) % dim)] = 1.0;
    norm = 1.0;
  }
  kernels::scale(v.data(), 1.0 / norm, dim);
  return v;
}

EmbeddingStore fallback_store(const std::vector<std::string>& names,
                              std::size_t dim, std::uint64_t seed) {
  EmbeddingStore store;
  store.dim = dim;
  store.vectors = Mat(names.size(), dim);
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto v = fallback_embed(names[i], dim, seed);
    std::copy(v.begin(), v.end(), store.vectors.row(i));
  }
  return store;
}

}  // namespace selfalign::emb
