#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace selfalign::kg {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;
};

struct Neighbor {
  EntityId entity;
  RelationId relation;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct KnowledgeGraph {
  // Index = dense id, assigned in names-file order.
  std::vector<std::string> raw_ids;
  std::vector<std::string> entity_names;  // normalized
  std::vector<std::string> relation_raw_ids;
  std::vector<std::string> relation_names;  // normalized
  std::vector<Triple> triples;
  // Undirected 1-hop adjacency, deduplicated per (entity, relation) pair and
  // sorted by (entity, relation).
  std::vector<std::vector<Neighbor>> neighbors;
  std::unordered_map<std::string, EntityId> id_of_raw;

  std::size_t entity_count() const { return raw_ids.size(); }
  std::size_t relation_count() const { return relation_raw_ids.size(); }
};

struct NameRules {
  std::vector<std::string> url_prefixes = {
      "http://dbpedia.org/resource/",
      "http://zh.dbpedia.org/resource/",
      "http://ja.dbpedia.org/resource/",
      "http://fr.dbpedia.org/resource/",
      "http://www.wikidata.org/entity/",
      "http://yago-knowledge.org/resource/",
  };
};

// Strips known URL prefixes (longest match, repeated until none applies),
// collapses runs of underscores to one space, trims surrounding whitespace.
// Throws EmptyName when nothing is left. Idempotent.
std::string normalize_name(std::string_view raw, const NameRules& rules = {});

// triples: head<TAB>relation<TAB>tail per line, raw ids.
// names:   raw_id<TAB>name per line; defines the entity universe and the
//          dense id order.
KnowledgeGraph load_kg(const std::filesystem::path& triples_path,
                       const std::filesystem::path& names_path,
                       const NameRules& rules = {});

enum class Split { train, dev, test };

struct AlignmentLinkSet {
  struct Link {
    EntityId x;
    EntityId y;
    Split split;
  };
  std::vector<Link> links;
};

// raw_id_x<TAB>raw_id_y per line; every pair tagged `initial`.
AlignmentLinkSet load_links(const std::filesystem::path& path,
                            const KnowledgeGraph& gx, const KnowledgeGraph& gy,
                            Split initial);

// Retags round(fraction * |train|) seeded-randomly chosen train links as dev.
void carve_dev(AlignmentLinkSet& links, double fraction, std::uint64_t seed);

std::vector<AlignmentLinkSet::Link> links_of(const AlignmentLinkSet& links,
                                             Split split);

// Mean over aligned pairs (x, y) of
//   |{n in N(x) : some m in N(y) is linked to n}| / max(1, |N(x)|)
// where N(.) is the set of distinct 1-hop neighbor entities.
double neighbor_similarity(const KnowledgeGraph& gx, const KnowledgeGraph& gy,
                           const AlignmentLinkSet& links);

}  // namespace selfalign::kg
