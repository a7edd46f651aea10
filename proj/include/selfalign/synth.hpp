#pragma once

#include <cstdint>
#include <filesystem>

namespace selfalign::synth {

// Desk-scale benchmark: two KGs with identical graph structure over aligned
// entities and clustered unit embeddings. Each side observes the shared
// latent embedding through its own noise: an isotropic part plus a stronger
// source-specific part confined to the first nuisance_dims coordinates,
// mimicking the systematic components real encoders attach per source. The
// ground-truth alignment is the identity permutation, shuffled and split
// train/test by train_fraction.
struct SyntheticSpec {
  std::size_t n_entities = 2000;
  std::size_t dim = 32;
  double edge_density = 3.0;         // mean triples per entity
  double intra_cluster_edges = 0.0;  // fraction of edges kept inside a cluster
  double name_noise = 0.10;          // per-character perturbation on y names
  double embed_sigma = 0.08;         // per-side Gaussian noise scale
  std::size_t nuisance_dims = 8;     // width of the source-specific subspace
  double nuisance_weight = 4.0;      // its strength relative to embed_sigma
  std::size_t cluster_size = 8;
  double cluster_spread = 0.35;      // within-cluster embedding dispersion
  std::size_t relation_count = 16;
  double train_fraction = 0.30;
  std::uint64_t seed = 42;
};

// Writes x_/y_{triples,names,embeddings}.tsv, links_{train,test}.tsv and a
// synth_config.txt echo into out_dir. Byte-identical for a given spec.
void generate(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace selfalign::synth
