#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itere/embedding.hpp"
#include "itere/kg_store.hpp"

namespace itere {

enum class AxiomType : std::uint8_t {
  Reflexive,
  Symmetric,
  Transitive,
  Equivalent,
  SubProperty,
  Inverse,
  SubPropertyChain,
};

inline constexpr std::array<AxiomType, 7> kAxiomTypes = {
    AxiomType::Reflexive,   AxiomType::Symmetric, AxiomType::Transitive,       AxiomType::Equivalent,
    AxiomType::SubProperty, AxiomType::Inverse,   AxiomType::SubPropertyChain,
};

std::size_t arity(AxiomType type);
std::string_view type_name(AxiomType type);
std::optional<AxiomType> parse_axiom_type(std::string_view name);

inline constexpr RelationId kNoRelation = ~RelationId{0};

/// An axiom over concrete relations. Slot conventions:
///   Equivalent / SubProperty: (body, head)   rule (x, head, y) <- (x, body, y)
///   Inverse:                  (head, body)   rule (x, head, y) <- (y, body, x)
///   SubPropertyChain:         (first, second, head)
///                             rule (y0, head, y2) <- (y0, first, y1), (y1, second, y2)
/// Unused slots hold kNoRelation.
struct Axiom {
  AxiomType type = AxiomType::Reflexive;
  std::array<RelationId, 3> relations = {kNoRelation, kNoRelation, kNoRelation};

  static Axiom reflexive(RelationId r) { return {AxiomType::Reflexive, {r, kNoRelation, kNoRelation}}; }
  static Axiom symmetric(RelationId r) { return {AxiomType::Symmetric, {r, kNoRelation, kNoRelation}}; }
  static Axiom transitive(RelationId r) { return {AxiomType::Transitive, {r, kNoRelation, kNoRelation}}; }
  static Axiom equivalent(RelationId body, RelationId head) { return {AxiomType::Equivalent, {body, head, kNoRelation}}; }
  static Axiom sub_property(RelationId body, RelationId head) {
    return {AxiomType::SubProperty, {body, head, kNoRelation}};
  }
  static Axiom inverse(RelationId head, RelationId body) { return {AxiomType::Inverse, {head, body, kNoRelation}}; }
  static Axiom chain(RelationId first, RelationId second, RelationId head) {
    return {AxiomType::SubPropertyChain, {first, second, head}};
  }

  RelationId head_relation() const;
  std::span<const RelationId> used_relations() const { return {relations.data(), arity(type)}; }

  friend auto operator<=>(const Axiom&, const Axiom&) = default;
};

/// e.g. "inverse(hasChild, hasParent)" using relation names from `relations`.
std::string describe(const Axiom& axiom, const Vocabulary& relations);

struct PoolEntry {
  Axiom axiom;
  std::size_t support = 0;
  std::size_t head_size = 0;
};

struct ScoredAxiom {
  Axiom axiom;
  std::size_t support = 0;
  std::size_t head_size = 0;
  double raw = 0.0;    // Frobenius distance between the two sides of the rule conclusion
  double score = 0.0;  // per-type min-max normalized, 1 = best
};

struct PoolConfig {
  double min_probability = 0.5;        // p
  double including_probability = 0.95; // t
  std::optional<std::size_t> sample_size;  // k; derived from (p, t) when unset

  std::size_t k() const;
  void validate() const;
};

inline constexpr std::size_t kMinSupport = 2;

/// Smallest k with k > N - N (1 - t)^(1 / (p N)) for every N: ceil(-ln(1 - t) / p).
std::size_t compute_k(double min_probability, double including_probability);

struct SupportCount {
  std::size_t support = 0;
  std::size_t head_size = 0;
};

SupportCount count_support_and_head(const KnowledgeGraph& kg, const Axiom& axiom);

/// Candidate axioms per relation from k sampled head triples, kept when support >= 2.
/// Output is sorted by axiom and deterministic for a given graph and rng state.
std::vector<PoolEntry> generate_pool(const KnowledgeGraph& kg, const PoolConfig& config, Rng& rng);

/// The two sides of the rule conclusion M1 = M2 for `axiom`.
std::pair<BlockDiagMatrix, BlockDiagMatrix> rule_conclusion(const EmbeddingModel& model, const Axiom& axiom);

double score_axiom_raw(const EmbeddingModel& model, const Axiom& axiom);

inline constexpr double kDegenerateScore = 0.5;

/// Fills `score` from `raw` within each axiom type. Types with fewer than two
/// distinct raw values get kDegenerateScore.
void normalize_scores(std::span<ScoredAxiom> scored);

/// Raw scores, per-type normalization, then a stable sort by score descending with
/// ties broken by axiom order.
std::vector<ScoredAxiom> induce_axioms(const EmbeddingModel& model, std::span<const PoolEntry> pool);

}  // namespace itere
