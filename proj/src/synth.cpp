#include "selfalign/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "selfalign/config.hpp"
#include "selfalign/errors.hpp"
#include "selfalign/kernels.hpp"
#include "selfalign/mat.hpp"
#include "selfalign/rng.hpp"

namespace selfalign::synth {

namespace {

constexpr const char* kAdjectives[] = {
    "amber", "basalt", "cobalt", "dusky",  "early",  "fabled", "gilded",
    "hollow", "iron",   "jade",   "keen",   "lunar",  "mossy",  "noble",
    "ochre", "pale",   "quiet",  "rustic", "silver", "tidal",  "umber",
    "vivid", "woven",  "young",
};
constexpr const char* kNouns[] = {
    "anvil",  "bridge", "canyon", "delta",  "ember",  "fjord",  "grove",
    "harbor", "island", "jetty",  "knoll",  "lagoon", "meadow", "narrows",
    "orchard", "plateau", "quarry", "ridge", "summit", "terrace", "upland",
    "valley", "wharf",  "yard",
};
constexpr std::size_t kWords = 24;

void check_spec(const SyntheticSpec& s) {
  if (s.n_entities < 2) throw ConfigError("n_entities must be at least 2");
  if (s.dim < 2) throw ConfigError("dim must be at least 2");
  if (s.edge_density <= 0.0) throw ConfigError("edge_density must be positive");
  if (s.intra_cluster_edges < 0.0 || s.intra_cluster_edges > 1.0) {
    throw ConfigError("intra_cluster_edges must lie in [0, 1]");
  }
  if (s.name_noise < 0.0 || s.name_noise > 1.0) {
    throw ConfigError("name_noise must lie in [0, 1]");
  }
  if (s.embed_sigma < 0.0) throw ConfigError("embed_sigma must be non-negative");
  if (s.nuisance_dims > s.dim) {
    throw ConfigError("nuisance_dims must not exceed dim");
  }
  if (s.nuisance_weight < 0.0) {
    throw ConfigError("nuisance_weight must be non-negative");
  }
  if (s.cluster_size == 0) throw ConfigError("cluster_size must be positive");
  if (s.cluster_spread < 0.0) throw ConfigError("cluster_spread must be non-negative");
  if (s.relation_count == 0) throw ConfigError("relation_count must be positive");
  if (s.train_fraction <= 0.0 || s.train_fraction >= 1.0) {
    throw ConfigError("train_fraction must lie strictly between 0 and 1");
  }
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot open output file: " + p.string());
  return os;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void sphere_point(double* out, std::size_t dim, Rng& rng) {
  while (true) {
    for (std::size_t i = 0; i < dim; ++i) out[i] = rng.normal();
    double n = kernels::nrm2(out, dim);
    if (n > 1e-12) {
      kernels::scale(out, 1.0 / n, dim);
      return;
    }
  }
}

void write_embeddings(const std::filesystem::path& p, const char* prefix,
                      const Mat& m) {
  std::ofstream os = open_out(p);
  os << "dim\t" << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << prefix << i;
    for (std::size_t j = 0; j < m.cols(); ++j) os << '\t' << fmt17(m(i, j));
    os << '\n';
  }
  if (!os) throw ConfigError("failed writing " + p.string());
}

}  // namespace

void generate(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  check_spec(spec);
  std::filesystem::create_directories(out_dir);
  Rng rng(spec.seed);
  const std::size_t n = spec.n_entities;

  std::vector<std::string> base(n);
  for (std::size_t i = 0; i < n; ++i) {
    base[i] = std::string(kAdjectives[rng.below(kWords)]) + "_" +
              kNouns[rng.below(kWords)] + "_" + std::to_string(i);
  }
  std::vector<std::string> base_y(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = base[i];
    for (char& c : s) {
      if (rng.uniform01() < spec.name_noise) {
        c = static_cast<char>('a' + rng.below(26));
      }
    }
    base_y[i] = std::move(s);
  }

  const std::size_t n_clusters = (n + spec.cluster_size - 1) / spec.cluster_size;
  Mat centers(n_clusters, spec.dim);
  for (std::size_t c = 0; c < n_clusters; ++c) {
    sphere_point(centers.row(c), spec.dim, rng);
  }
  Mat latent(n, spec.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double* c = centers.row(i / spec.cluster_size);
    double* v = latent.row(i);
    for (std::size_t j = 0; j < spec.dim; ++j) {
      v[j] = c[j] + spec.cluster_spread * rng.normal();
    }
    double norm = kernels::nrm2(v, spec.dim);
    if (norm < 1e-12) throw DegenerateNorm("degenerate synthetic embedding");
    kernels::scale(v, 1.0 / norm, spec.dim);
  }
  auto noisy_view = [&](Mat& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double* v = out.row(i);
      const double* z = latent.row(i);
      for (std::size_t j = 0; j < spec.dim; ++j) {
        double w = j < spec.nuisance_dims ? spec.nuisance_weight : 1.0;
        v[j] = z[j] + spec.embed_sigma * w * rng.normal();
      }
      double norm = kernels::nrm2(v, spec.dim);
      if (norm < 1e-12) throw DegenerateNorm("degenerate synthetic embedding");
      kernels::scale(v, 1.0 / norm, spec.dim);
    }
  };
  Mat ex(n, spec.dim);
  Mat ey(n, spec.dim);
  noisy_view(ex);
  noisy_view(ey);

  struct Edge {
    std::size_t h, r, t;
  };
  std::vector<Edge> edges;
  std::unordered_set<unsigned long long> seen;
  const std::size_t target = static_cast<std::size_t>(
      std::llround(spec.edge_density * static_cast<double>(n)));
  for (std::size_t e = 0; e < target; ++e) {
    std::size_t h = rng.below(n);
    std::size_t t;
    const std::size_t lo = (h / spec.cluster_size) * spec.cluster_size;
    const std::size_t hi = std::min(n, lo + spec.cluster_size);
    if (hi - lo >= 2 && rng.uniform01() < spec.intra_cluster_edges) {
      do {
        t = lo + rng.below(hi - lo);
      } while (t == h);
    } else {
      do {
        t = rng.below(n);
      } while (t == h);
    }
    std::size_t r = rng.below(spec.relation_count);
    unsigned long long key =
        (static_cast<unsigned long long>(h) * n + t) * spec.relation_count + r;
    if (seen.insert(key).second) edges.push_back({h, r, t});
  }

  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  rng.shuffle(perm);
  const std::size_t n_train = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) {
    throw ConfigError("train_fraction leaves an empty split");
  }

  {
    std::ofstream os = open_out(out_dir / "x_names.tsv");
    for (std::size_t i = 0; i < n; ++i) {
      os << "x_" << i << "\thttp://dbpedia.org/resource/" << base[i] << '\n';
    }
  }
  {
    std::ofstream os = open_out(out_dir / "y_names.tsv");
    for (std::size_t i = 0; i < n; ++i) {
      os << "y_" << i << "\thttp://zh.dbpedia.org/resource/" << base_y[i] << '\n';
    }
  }
  for (const char* side : {"x", "y"}) {
    std::ofstream os = open_out(out_dir / (std::string(side) + "_triples.tsv"));
    for (const Edge& e : edges) {
      os << side << '_' << e.h << "\trel_" << e.r << '\t' << side << '_' << e.t
         << '\n';
    }
    if (!os) throw ConfigError("failed writing triples");
  }
  write_embeddings(out_dir / "x_embeddings.tsv", "x_", ex);
  write_embeddings(out_dir / "y_embeddings.tsv", "y_", ey);
  {
    std::ofstream os = open_out(out_dir / "links_train.tsv");
    for (std::size_t i = 0; i < n_train; ++i) {
      os << "x_" << perm[i] << "\ty_" << perm[i] << '\n';
    }
  }
  {
    std::ofstream os = open_out(out_dir / "links_test.tsv");
    for (std::size_t i = n_train; i < n; ++i) {
      os << "x_" << perm[i] << "\ty_" << perm[i] << '\n';
    }
  }

  config::KvMap kv;
  kv["n_entities"] = std::to_string(spec.n_entities);
  kv["dim"] = std::to_string(spec.dim);
  kv["edge_density"] = fmt17(spec.edge_density);
  kv["intra_cluster_edges"] = fmt17(spec.intra_cluster_edges);
  kv["name_noise"] = fmt17(spec.name_noise);
  kv["embed_sigma"] = fmt17(spec.embed_sigma);
  kv["nuisance_dims"] = std::to_string(spec.nuisance_dims);
  kv["nuisance_weight"] = fmt17(spec.nuisance_weight);
  kv["cluster_size"] = std::to_string(spec.cluster_size);
  kv["cluster_spread"] = fmt17(spec.cluster_spread);
  kv["relation_count"] = std::to_string(spec.relation_count);
  kv["train_fraction"] = fmt17(spec.train_fraction);
  kv["seed"] = std::to_string(spec.seed);
  config::write_kv(out_dir / "synth_config.txt", kv);
}

}  // namespace selfalign::synth
