#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace itere {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

struct Triple {
  EntityId subject = 0;
  RelationId relation = 0;
  EntityId object = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t h = (std::uint64_t{t.subject} << 32) ^ (std::uint64_t{t.relation} << 16) ^ t.object;
    h ^= std::uint64_t{t.object} << 40;
    h *= 0x9e3779b97f4a7c15ULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

using TripleSet = std::unordered_set<Triple, TripleHash>;

/// Bidirectional string <-> dense id mapping. Ids are assigned in first-seen order.
class Vocabulary {
 public:
  std::optional<std::uint32_t> find(std::string_view name) const;
  std::uint32_t intern(std::string_view name);
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

struct Vocabularies {
  Vocabulary entities;
  Vocabulary relations;
};

struct LoadedTriples {
  std::vector<Triple> triples;
  Vocabularies vocab;
};

/// Parses `subject\trelation\tobject` lines. With `fixed` set, names must already
/// exist in it and the returned vocabularies are a copy of `fixed`.
LoadedTriples load_triples(std::istream& in, const std::string& source_name,
                           const Vocabularies* fixed = nullptr);
LoadedTriples load_triples(const std::filesystem::path& path, const Vocabularies* fixed = nullptr);

void write_triples(std::ostream& out, std::span<const Triple> triples, const Vocabularies& vocab);

/// Contiguous view of the (relation, entity) edges leaving or entering one entity,
/// sorted by (relation, entity).
struct EdgeRange {
  std::span<const RelationId> relations;
  std::span<const EntityId> entities;
  std::size_t size() const noexcept { return relations.size(); }
};

/// Immutable deduplicated triple set with sorted adjacency indices.
///
/// All query results are sorted ascending and empty for absent keys.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(std::span<const Triple> triples, std::size_t num_entities, std::size_t num_relations);

  std::size_t num_entities() const noexcept { return num_entities_; }
  std::size_t num_relations() const noexcept { return num_relations_; }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }
  std::size_t duplicates_dropped() const noexcept { return duplicates_dropped_; }

  /// Deduplicated triples in first-occurrence order.
  std::span<const Triple> triples() const noexcept { return triples_; }

  bool contains(const Triple& t) const { return members_.contains(t); }
  bool contains(EntityId s, RelationId r, EntityId o) const { return contains(Triple{s, r, o}); }
  const TripleSet& members() const noexcept { return members_; }

  std::span<const EntityId> objects_of(EntityId s, RelationId r) const;
  std::span<const EntityId> subjects_of(RelationId r, EntityId o) const;
  std::span<const RelationId> relations_between(EntityId s, EntityId o) const;
  /// Triples of relation r sorted by (subject, object).
  std::span<const Triple> triples_of(RelationId r) const;
  /// Entities appearing as subject or object of some triple of r.
  std::span<const EntityId> entities_of(RelationId r) const;
  EdgeRange out_edges(EntityId s) const;
  EdgeRange in_edges(EntityId o) const;

 private:
  std::size_t num_entities_ = 0;
  std::size_t num_relations_ = 0;
  std::size_t duplicates_dropped_ = 0;
  std::vector<Triple> triples_;
  TripleSet members_;

  // subject -> (relation, object), sorted by (s, r, o)
  std::vector<std::size_t> out_offsets_;
  std::vector<RelationId> out_relations_;
  std::vector<EntityId> out_objects_;
  // object -> (relation, subject), sorted by (o, r, s)
  std::vector<std::size_t> in_offsets_;
  std::vector<RelationId> in_relations_;
  std::vector<EntityId> in_subjects_;
  // subject -> (object, relation), sorted by (s, o, r)
  std::vector<std::size_t> pair_offsets_;
  std::vector<EntityId> pair_objects_;
  std::vector<RelationId> pair_relations_;
  // relation -> triples sorted by (s, o)
  std::vector<std::size_t> rel_offsets_;
  std::vector<Triple> by_relation_;
  // relation -> distinct entities
  std::vector<std::size_t> rel_entity_offsets_;
  std::vector<EntityId> rel_entities_;
};

/// Deduplicates (first occurrence kept) and indexes. Throws GraphError on out-of-range ids.
KnowledgeGraph build_graph(std::span<const Triple> triples, std::size_t num_entities,
                           std::size_t num_relations);

struct SparsityTable {
  std::vector<std::size_t> freq;
  std::size_t freq_min = 0;
  std::size_t freq_max = 0;
  std::vector<double> sparsity;
};

/// sparsity(e) = 1 - (freq(e) - freq_min) / (freq_max - freq_min), all zeros when
/// every entity has the same frequency.
SparsityTable entity_sparsity(const KnowledgeGraph& train);

/// Entities with sparsity strictly above the threshold, ascending.
std::vector<EntityId> sparse_entities(const SparsityTable& table, double threshold);

/// Keeps triples whose subject or object is sparse, preserving order.
std::vector<Triple> sparsify_eval_split(const SparsityTable& train_table, std::span<const Triple> split,
                                        double threshold);

}  // namespace itere
