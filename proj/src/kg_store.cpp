#include "itere/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <tuple>

namespace itere {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::optional<std::uint32_t> Vocabulary::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Vocabulary::intern(std::string_view name) {
  auto [it, inserted] = ids_.try_emplace(std::string(name), static_cast<std::uint32_t>(names_.size()));
  if (inserted) names_.emplace_back(name);
  return it->second;
}

LoadedTriples load_triples(std::istream& in, const std::string& source_name, const Vocabularies* fixed) {
  LoadedTriples out;
  if (fixed) out.vocab = *fixed;

  auto lookup = [&](Vocabulary& vocab, std::string_view name, const char* kind, std::size_t line_no) {
    if (!fixed) return vocab.intern(name);
    auto id = vocab.find(name);
    if (!id) {
      throw VocabularyError(source_name + ":" + std::to_string(line_no) + ": unknown " + kind + " '" +
                            std::string(name) + "'");
    }
    return *id;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab1 = line.find('\t');
    auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos || line.find('\t', tab2 + 1) != std::string::npos) {
      throw ParseError(source_name, line_no, "expected exactly three tab-separated fields");
    }
    std::string_view view(line);
    auto s = view.substr(0, tab1);
    auto r = view.substr(tab1 + 1, tab2 - tab1 - 1);
    auto o = view.substr(tab2 + 1);
    if (s.empty() || r.empty() || o.empty()) throw ParseError(source_name, line_no, "empty field");

    Triple t;
    t.subject = lookup(out.vocab.entities, s, "entity", line_no);
    t.relation = lookup(out.vocab.relations, r, "relation", line_no);
    t.object = lookup(out.vocab.entities, o, "entity", line_no);
    out.triples.push_back(t);
  }
  return out;
}

LoadedTriples load_triples(const std::filesystem::path& path, const Vocabularies* fixed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return load_triples(in, path.string(), fixed);
}

void write_triples(std::ostream& out, std::span<const Triple> triples, const Vocabularies& vocab) {
  for (const auto& t : triples) {
    out << vocab.entities.name(t.subject) << '\t' << vocab.relations.name(t.relation) << '\t'
        << vocab.entities.name(t.object) << '\n';
  }
}

namespace {

// CSR offsets for `keys` (already sorted) over [0, num_keys).
template <class Key>
std::vector<std::size_t> offsets_for(const std::vector<Key>& sorted_keys, std::size_t num_keys) {
  std::vector<std::size_t> offsets(num_keys + 1, 0);
  for (auto k : sorted_keys) ++offsets[k + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return offsets;
}

}  // namespace

KnowledgeGraph::KnowledgeGraph(std::span<const Triple> triples, std::size_t num_entities,
                               std::size_t num_relations)
    : num_entities_(num_entities), num_relations_(num_relations) {
  triples_.reserve(triples.size());
  members_.reserve(triples.size());
  for (const auto& t : triples) {
    if (t.subject >= num_entities || t.object >= num_entities || t.relation >= num_relations) {
      throw GraphError("triple (" + std::to_string(t.subject) + ", " + std::to_string(t.relation) + ", " +
                       std::to_string(t.object) + ") outside vocabulary bounds");
    }
    if (members_.insert(t).second) {
      triples_.push_back(t);
    } else {
      ++duplicates_dropped_;
    }
  }

  std::vector<Triple> sorted = triples_;
  const std::size_t n = sorted.size();

  std::sort(sorted.begin(), sorted.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.subject, a.relation, a.object) < std::tie(b.subject, b.relation, b.object);
  });
  {
    std::vector<EntityId> keys(n);
    out_relations_.resize(n);
    out_objects_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys[i] = sorted[i].subject;
      out_relations_[i] = sorted[i].relation;
      out_objects_[i] = sorted[i].object;
    }
    out_offsets_ = offsets_for(keys, num_entities);
  }

  std::sort(sorted.begin(), sorted.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.object, a.relation, a.subject) < std::tie(b.object, b.relation, b.subject);
  });
  {
    std::vector<EntityId> keys(n);
    in_relations_.resize(n);
    in_subjects_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys[i] = sorted[i].object;
      in_relations_[i] = sorted[i].relation;
      in_subjects_[i] = sorted[i].subject;
    }
    in_offsets_ = offsets_for(keys, num_entities);
  }

  std::sort(sorted.begin(), sorted.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.subject, a.object, a.relation) < std::tie(b.subject, b.object, b.relation);
  });
  {
    std::vector<EntityId> keys(n);
    pair_objects_.resize(n);
    pair_relations_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys[i] = sorted[i].subject;
      pair_objects_[i] = sorted[i].object;
      pair_relations_[i] = sorted[i].relation;
    }
    pair_offsets_ = offsets_for(keys, num_entities);
  }

  std::sort(sorted.begin(), sorted.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.relation, a.subject, a.object) < std::tie(b.relation, b.subject, b.object);
  });
  {
    std::vector<RelationId> keys(n);
    for (std::size_t i = 0; i < n; ++i) keys[i] = sorted[i].relation;
    rel_offsets_ = offsets_for(keys, num_relations);
    by_relation_ = sorted;
  }

  rel_entity_offsets_.assign(num_relations + 1, 0);
  for (RelationId r = 0; r < num_relations; ++r) {
    std::vector<EntityId> ents;
    for (const auto& t : triples_of(r)) {
      ents.push_back(t.subject);
      ents.push_back(t.object);
    }
    std::sort(ents.begin(), ents.end());
    ents.erase(std::unique(ents.begin(), ents.end()), ents.end());
    rel_entities_.insert(rel_entities_.end(), ents.begin(), ents.end());
    rel_entity_offsets_[r + 1] = rel_entities_.size();
  }
}

std::span<const EntityId> KnowledgeGraph::objects_of(EntityId s, RelationId r) const {
  if (s >= num_entities_) return {};
  auto first = out_relations_.begin() + static_cast<std::ptrdiff_t>(out_offsets_[s]);
  auto last = out_relations_.begin() + static_cast<std::ptrdiff_t>(out_offsets_[s + 1]);
  auto [lo, hi] = std::equal_range(first, last, r);
  auto begin = static_cast<std::size_t>(lo - out_relations_.begin());
  return {out_objects_.data() + begin, static_cast<std::size_t>(hi - lo)};
}

std::span<const EntityId> KnowledgeGraph::subjects_of(RelationId r, EntityId o) const {
  if (o >= num_entities_) return {};
  auto first = in_relations_.begin() + static_cast<std::ptrdiff_t>(in_offsets_[o]);
  auto last = in_relations_.begin() + static_cast<std::ptrdiff_t>(in_offsets_[o + 1]);
  auto [lo, hi] = std::equal_range(first, last, r);
  auto begin = static_cast<std::size_t>(lo - in_relations_.begin());
  return {in_subjects_.data() + begin, static_cast<std::size_t>(hi - lo)};
}

std::span<const RelationId> KnowledgeGraph::relations_between(EntityId s, EntityId o) const {
  if (s >= num_entities_) return {};
  auto first = pair_objects_.begin() + static_cast<std::ptrdiff_t>(pair_offsets_[s]);
  auto last = pair_objects_.begin() + static_cast<std::ptrdiff_t>(pair_offsets_[s + 1]);
  auto [lo, hi] = std::equal_range(first, last, o);
  auto begin = static_cast<std::size_t>(lo - pair_objects_.begin());
  return {pair_relations_.data() + begin, static_cast<std::size_t>(hi - lo)};
}

std::span<const Triple> KnowledgeGraph::triples_of(RelationId r) const {
  if (r >= num_relations_) return {};
  return {by_relation_.data() + rel_offsets_[r], rel_offsets_[r + 1] - rel_offsets_[r]};
}

std::span<const EntityId> KnowledgeGraph::entities_of(RelationId r) const {
  if (r >= num_relations_) return {};
  return {rel_entities_.data() + rel_entity_offsets_[r], rel_entity_offsets_[r + 1] - rel_entity_offsets_[r]};
}

EdgeRange KnowledgeGraph::out_edges(EntityId s) const {
  if (s >= num_entities_) return {};
  auto begin = out_offsets_[s];
  auto count = out_offsets_[s + 1] - begin;
  return {{out_relations_.data() + begin, count}, {out_objects_.data() + begin, count}};
}

EdgeRange KnowledgeGraph::in_edges(EntityId o) const {
  if (o >= num_entities_) return {};
  auto begin = in_offsets_[o];
  auto count = in_offsets_[o + 1] - begin;
  return {{in_relations_.data() + begin, count}, {in_subjects_.data() + begin, count}};
}

KnowledgeGraph build_graph(std::span<const Triple> triples, std::size_t num_entities, std::size_t num_relations) {
  return KnowledgeGraph(triples, num_entities, num_relations);
}

SparsityTable entity_sparsity(const KnowledgeGraph& train) {
  if (train.empty()) throw GraphError("entity sparsity needs a non-empty train graph");
  SparsityTable table;
  table.freq.assign(train.num_entities(), 0);
  for (const auto& t : train.triples()) {
    ++table.freq[t.subject];
    ++table.freq[t.object];
  }
  auto [lo, hi] = std::minmax_element(table.freq.begin(), table.freq.end());
  table.freq_min = *lo;
  table.freq_max = *hi;
  table.sparsity.assign(table.freq.size(), 0.0);
  if (table.freq_max == table.freq_min) return table;
  const double span = static_cast<double>(table.freq_max - table.freq_min);
  for (std::size_t e = 0; e < table.freq.size(); ++e) {
    table.sparsity[e] = 1.0 - static_cast<double>(table.freq[e] - table.freq_min) / span;
  }
  return table;
}

std::vector<EntityId> sparse_entities(const SparsityTable& table, double threshold) {
  std::vector<EntityId> out;
  for (std::size_t e = 0; e < table.sparsity.size(); ++e) {
    if (table.sparsity[e] > threshold) out.push_back(static_cast<EntityId>(e));
  }
  return out;
}

std::vector<Triple> sparsify_eval_split(const SparsityTable& train_table, std::span<const Triple> split,
                                        double threshold) {
  const std::size_t n = train_table.sparsity.size();
  std::vector<Triple> out;
  for (const auto& t : split) {
    if (t.subject >= n || t.object >= n) {
      throw VocabularyError("split triple references entity outside the train vocabulary");
    }
    if (train_table.sparsity[t.subject] > threshold || train_table.sparsity[t.object] > threshold) {
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace itere
