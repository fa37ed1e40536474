#include "itere/axiom.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <set>

namespace itere {

std::size_t arity(AxiomType type) {
  switch (type) {
    case AxiomType::Reflexive:
    case AxiomType::Symmetric:
    case AxiomType::Transitive: return 1;
    case AxiomType::Equivalent:
    case AxiomType::SubProperty:
    case AxiomType::Inverse: return 2;
    case AxiomType::SubPropertyChain: return 3;
  }
  return 0;
}

std::string_view type_name(AxiomType type) {
  switch (type) {
    case AxiomType::Reflexive: return "reflexive";
    case AxiomType::Symmetric: return "symmetric";
    case AxiomType::Transitive: return "transitive";
    case AxiomType::Equivalent: return "equivalent";
    case AxiomType::SubProperty: return "subproperty";
    case AxiomType::Inverse: return "inverse";
    case AxiomType::SubPropertyChain: return "chain";
  }
  return "?";
}

std::optional<AxiomType> parse_axiom_type(std::string_view name) {
  for (auto t : kAxiomTypes) {
    if (type_name(t) == name) return t;
  }
  return std::nullopt;
}

RelationId Axiom::head_relation() const {
  switch (type) {
    case AxiomType::Reflexive:
    case AxiomType::Symmetric:
    case AxiomType::Transitive:
    case AxiomType::Inverse: return relations[0];
    case AxiomType::Equivalent:
    case AxiomType::SubProperty: return relations[1];
    case AxiomType::SubPropertyChain: return relations[2];
  }
  return kNoRelation;
}

std::string describe(const Axiom& axiom, const Vocabulary& relations) {
  std::string out(type_name(axiom.type));
  out += '(';
  bool first = true;
  for (auto r : axiom.used_relations()) {
    if (!first) out += ", ";
    out += r < relations.size() ? relations.name(r) : std::to_string(r);
    first = false;
  }
  out += ')';
  return out;
}

std::size_t PoolConfig::k() const {
  return sample_size ? *sample_size : compute_k(min_probability, including_probability);
}

void PoolConfig::validate() const {
  if (!(min_probability > 0.0 && min_probability <= 1.0)) throw Error("minimum axiom probability p must lie in (0, 1]");
  if (!(including_probability > 0.0 && including_probability < 1.0)) {
    throw Error("including probability t must lie in (0, 1)");
  }
  if (sample_size && *sample_size == 0) throw Error("sample size k must be at least 1");
}

std::size_t compute_k(double min_probability, double including_probability) {
  if (!(min_probability > 0.0 && min_probability <= 1.0)) throw Error("compute_k: p must lie in (0, 1]");
  if (!(including_probability > 0.0 && including_probability < 1.0)) throw Error("compute_k: t must lie in (0, 1)");
  // f(N) increases monotonically towards its limit -ln(1 - t) / p.
  const double bound = -std::log1p(-including_probability) / min_probability;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(bound)));
}

SupportCount count_support_and_head(const KnowledgeGraph& kg, const Axiom& axiom) {
  SupportCount out;
  out.head_size = kg.triples_of(axiom.head_relation()).size();
  const auto& rel = axiom.relations;
  std::size_t n = 0;
  switch (axiom.type) {
    case AxiomType::Reflexive:
      for (const auto& t : kg.triples_of(rel[0])) n += t.subject == t.object;
      break;
    case AxiomType::Symmetric:
      for (const auto& t : kg.triples_of(rel[0])) n += kg.contains(t.object, rel[0], t.subject);
      break;
    case AxiomType::Transitive:
      for (const auto& t : kg.triples_of(rel[0])) {
        for (auto z : kg.objects_of(t.object, rel[0])) n += kg.contains(t.subject, rel[0], z);
      }
      break;
    case AxiomType::Equivalent:
    case AxiomType::SubProperty:
      for (const auto& t : kg.triples_of(rel[0])) n += kg.contains(t.subject, rel[1], t.object);
      break;
    case AxiomType::Inverse:
      // body triple (y, body, x) supports head (x, head, y)
      for (const auto& t : kg.triples_of(rel[1])) n += kg.contains(t.object, rel[0], t.subject);
      break;
    case AxiomType::SubPropertyChain:
      for (const auto& t : kg.triples_of(rel[0])) {
        for (auto y2 : kg.objects_of(t.object, rel[1])) n += kg.contains(t.subject, rel[2], y2);
      }
      break;
  }
  out.support = n;
  return out;
}

std::vector<PoolEntry> generate_pool(const KnowledgeGraph& kg, const PoolConfig& config, Rng& rng) {
  config.validate();
  const std::size_t k = config.k();
  std::set<Axiom> candidates;
  std::vector<Triple> sampled;

  for (RelationId r = 0; r < kg.num_relations(); ++r) {
    const auto triples = kg.triples_of(r);
    if (triples.empty()) continue;
    candidates.insert(Axiom::reflexive(r));
    candidates.insert(Axiom::symmetric(r));
    candidates.insert(Axiom::transitive(r));

    sampled.clear();
    std::sample(triples.begin(), triples.end(), std::back_inserter(sampled), k, rng);
    for (const auto& head : sampled) {
      const EntityId x = head.subject;
      const EntityId y = head.object;
      for (auto body : kg.relations_between(x, y)) {
        if (body == r) continue;
        candidates.insert(Axiom::equivalent(body, r));
        candidates.insert(Axiom::sub_property(body, r));
      }
      for (auto body : kg.relations_between(y, x)) candidates.insert(Axiom::inverse(r, body));
      const auto out = kg.out_edges(x);
      for (std::size_t i = 0; i < out.size(); ++i) {
        for (auto second : kg.relations_between(out.entities[i], y)) {
          candidates.insert(Axiom::chain(out.relations[i], second, r));
        }
      }
    }
  }

  std::vector<PoolEntry> pool;
  for (const auto& axiom : candidates) {
    auto count = count_support_and_head(kg, axiom);
    if (count.support >= kMinSupport) pool.push_back({axiom, count.support, count.head_size});
  }
  return pool;
}

std::pair<BlockDiagMatrix, BlockDiagMatrix> rule_conclusion(const EmbeddingModel& model, const Axiom& axiom) {
  const auto& rel = axiom.relations;
  const auto identity = BlockDiagMatrix::identity(model.layout());
  switch (axiom.type) {
    case AxiomType::Reflexive: return {model.relation(rel[0]), identity};
    case AxiomType::Symmetric: {
      auto m = model.relation(rel[0]);
      return {block_multiply(m, m), identity};
    }
    case AxiomType::Transitive: {
      auto m = model.relation(rel[0]);
      return {block_multiply(m, m), m};
    }
    case AxiomType::Equivalent:
    case AxiomType::SubProperty: return {model.relation(rel[0]), model.relation(rel[1])};
    case AxiomType::Inverse: return {block_multiply(model.relation(rel[0]), model.relation(rel[1])), identity};
    case AxiomType::SubPropertyChain:
      return {block_multiply(model.relation(rel[0]), model.relation(rel[1])), model.relation(rel[2])};
  }
  throw Error("rule_conclusion: unknown axiom type");
}

double score_axiom_raw(const EmbeddingModel& model, const Axiom& axiom) {
  for (auto r : axiom.used_relations()) {
    if (r >= model.num_relations()) throw Error("score_axiom_raw: relation id out of range");
  }
  auto [lhs, rhs] = rule_conclusion(model, axiom);
  return block_frobenius_diff(lhs, rhs);
}

void normalize_scores(std::span<ScoredAxiom> scored) {
  struct Range {
    double lo = 0.0, hi = 0.0;
    bool seen = false;
  };
  std::array<Range, kAxiomTypes.size()> ranges{};
  for (const auto& s : scored) {
    auto& range = ranges[static_cast<std::size_t>(s.axiom.type)];
    if (!range.seen) {
      range = {s.raw, s.raw, true};
    } else {
      range.lo = std::min(range.lo, s.raw);
      range.hi = std::max(range.hi, s.raw);
    }
  }
  for (auto& s : scored) {
    const auto& range = ranges[static_cast<std::size_t>(s.axiom.type)];
    s.score = range.hi > range.lo ? (range.hi - s.raw) / (range.hi - range.lo) : kDegenerateScore;
  }
}

std::vector<ScoredAxiom> induce_axioms(const EmbeddingModel& model, std::span<const PoolEntry> pool) {
  std::vector<ScoredAxiom> scored;
  scored.reserve(pool.size());
  for (const auto& entry : pool) {
    scored.push_back({entry.axiom, entry.support, entry.head_size, score_axiom_raw(model, entry.axiom), 0.0});
  }
  normalize_scores(scored);
  std::stable_sort(scored.begin(), scored.end(), [](const ScoredAxiom& a, const ScoredAxiom& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.axiom < b.axiom;
  });
  return scored;
}

}  // namespace itere
