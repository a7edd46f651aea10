#include "selfalign/kg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "selfalign/errors.hpp"
#include "selfalign/rng.hpp"

namespace selfalign::kg {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

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

// Reads a text file line by line, tolerating \r\n endings. The callback gets
// (line_number, line); blank lines are skipped.
template <class Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(lineno, std::string_view(line));
  }
}

std::string location(const std::filesystem::path& path, std::size_t lineno) {
  return path.filename().string() + ":" + std::to_string(lineno);
}

}  // namespace

std::string normalize_name(std::string_view raw, const NameRules& rules) {
  std::string_view s = raw;
  // Strip the longest matching prefix, repeatedly, so the result is stable
  // under a second pass.
  bool stripped = true;
  while (stripped) {
    stripped = false;
    std::size_t best = 0;
    for (const auto& p : rules.url_prefixes) {
      if (p.size() > best && s.size() >= p.size() &&
          s.substr(0, p.size()) == p) {
        best = p.size();
      }
    }
    if (best > 0) {
      s.remove_prefix(best);
      stripped = true;
    }
  }
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '_') {
      while (i < s.size() && s[i] == '_') ++i;
      out.push_back(' ');
    } else {
      out.push_back(s[i]);
      ++i;
    }
  }
  std::string_view trimmed = trim(out);
  if (trimmed.empty()) {
    throw EmptyName("name is empty after normalization: \"" +
                    std::string(raw) + "\"");
  }
  return std::string(trimmed);
}

KnowledgeGraph load_kg(const std::filesystem::path& triples_path,
                       const std::filesystem::path& names_path,
                       const NameRules& rules) {
  KnowledgeGraph g;

  for_each_line(names_path, [&](std::size_t lineno, std::string_view line) {
    auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw ParseError(location(names_path, lineno) +
                       ": expected raw_id<TAB>name, got " +
                       std::to_string(fields.size()) + " fields");
    }
    std::string raw_id(fields[0]);
    if (raw_id.empty()) {
      throw ParseError(location(names_path, lineno) + ": empty raw id");
    }
    if (g.id_of_raw.count(raw_id)) {
      throw ParseError(location(names_path, lineno) + ": duplicate raw id " +
                       raw_id);
    }
    std::string name;
    try {
      name = normalize_name(fields[1], rules);
    } catch (const EmptyName& e) {
      throw ParseError(location(names_path, lineno) + ": " + e.what());
    }
    EntityId id = static_cast<EntityId>(g.raw_ids.size());
    g.id_of_raw.emplace(std::move(raw_id), id);
    g.raw_ids.emplace_back(fields[0]);
    g.entity_names.push_back(std::move(name));
  });

  std::unordered_map<std::string, RelationId> rel_of_raw;
  for_each_line(triples_path, [&](std::size_t lineno, std::string_view line) {
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError(location(triples_path, lineno) +
                       ": expected head<TAB>relation<TAB>tail, got " +
                       std::to_string(fields.size()) + " fields");
    }
    auto head = g.id_of_raw.find(std::string(fields[0]));
    if (head == g.id_of_raw.end()) {
      throw DanglingReference(location(triples_path, lineno) +
                              ": head entity \"" + std::string(fields[0]) +
                              "\" is not in the names file");
    }
    auto tail = g.id_of_raw.find(std::string(fields[2]));
    if (tail == g.id_of_raw.end()) {
      throw DanglingReference(location(triples_path, lineno) +
                              ": tail entity \"" + std::string(fields[2]) +
                              "\" is not in the names file");
    }
    std::string raw_rel(fields[1]);
    auto [it, inserted] =
        rel_of_raw.emplace(raw_rel, static_cast<RelationId>(rel_of_raw.size()));
    if (inserted) {
      g.relation_raw_ids.push_back(raw_rel);
      std::string rel_name;
      try {
        rel_name = normalize_name(raw_rel, rules);
      } catch (const EmptyName&) {
        rel_name = raw_rel;  // keep opaque labels usable
      }
      g.relation_names.push_back(std::move(rel_name));
    }
    g.triples.push_back({head->second, it->second, tail->second});
  });

  g.neighbors.assign(g.entity_count(), {});
  for (const Triple& t : g.triples) {
    g.neighbors[t.head].push_back({t.tail, t.relation});
    g.neighbors[t.tail].push_back({t.head, t.relation});
  }
  for (auto& list : g.neighbors) {
    std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.entity != b.entity ? a.entity < b.entity
                                  : a.relation < b.relation;
    });
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return g;
}

AlignmentLinkSet load_links(const std::filesystem::path& path,
                            const KnowledgeGraph& gx, const KnowledgeGraph& gy,
                            Split initial) {
  AlignmentLinkSet out;
  std::unordered_set<std::uint64_t> seen;
  for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw ParseError(location(path, lineno) +
                       ": expected raw_id_x<TAB>raw_id_y");
    }
    auto x = gx.id_of_raw.find(std::string(fields[0]));
    if (x == gx.id_of_raw.end()) {
      throw DanglingReference(location(path, lineno) + ": unknown x entity \"" +
                              std::string(fields[0]) + "\"");
    }
    auto y = gy.id_of_raw.find(std::string(fields[1]));
    if (y == gy.id_of_raw.end()) {
      throw DanglingReference(location(path, lineno) + ": unknown y entity \"" +
                              std::string(fields[1]) + "\"");
    }
    std::uint64_t key =
        (static_cast<std::uint64_t>(x->second) << 32) | y->second;
    if (!seen.insert(key).second) {
      throw ParseError(location(path, lineno) + ": duplicate link");
    }
    out.links.push_back({x->second, y->second, initial});
  });
  return out;
}

void carve_dev(AlignmentLinkSet& links, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> train_idx;
  for (std::size_t i = 0; i < links.links.size(); ++i) {
    if (links.links[i].split == Split::train) train_idx.push_back(i);
  }
  auto want = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(train_idx.size())));
  Rng rng(seed);
  rng.shuffle(train_idx);
  for (std::size_t i = 0; i < want && i < train_idx.size(); ++i) {
    links.links[train_idx[i]].split = Split::dev;
  }
}

std::vector<AlignmentLinkSet::Link> links_of(const AlignmentLinkSet& links,
                                             Split split) {
  std::vector<AlignmentLinkSet::Link> out;
  for (const auto& l : links.links) {
    if (l.split == split) out.push_back(l);
  }
  return out;
}

double neighbor_similarity(const KnowledgeGraph& gx, const KnowledgeGraph& gy,
                           const AlignmentLinkSet& links) {
  if (links.links.empty()) {
    throw ConfigError("neighbor_similarity needs a non-empty link set");
  }
  std::unordered_multimap<EntityId, EntityId> y_of_x;
  for (const auto& l : links.links) y_of_x.emplace(l.x, l.y);

  auto distinct_entities = [](const std::vector<Neighbor>& nbrs) {
    std::vector<EntityId> out;
    for (const Neighbor& n : nbrs) {
      if (out.empty() || out.back() != n.entity) out.push_back(n.entity);
    }
    return out;  // neighbors are sorted by entity, so this is the distinct set
  };

  double total = 0.0;
  for (const auto& l : links.links) {
    auto nx = distinct_entities(gx.neighbors[l.x]);
    auto ny_list = distinct_entities(gy.neighbors[l.y]);
    std::unordered_set<EntityId> ny(ny_list.begin(), ny_list.end());
    std::size_t hits = 0;
    for (EntityId n : nx) {
      auto [lo, hi] = y_of_x.equal_range(n);
      for (auto it = lo; it != hi; ++it) {
        if (ny.count(it->second)) {
          ++hits;
          break;
        }
      }
    }
    total += static_cast<double>(hits) /
             static_cast<double>(std::max<std::size_t>(1, nx.size()));
  }
  return total / static_cast<double>(links.links.size());
}

}  // namespace selfalign::kg
