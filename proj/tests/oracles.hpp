// Brute-force reference implementations used by the unit and acceptance tests.
// Nothing here calls into the index structures or the block kernels being tested.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "itere/axiom.hpp"
#include "itere/block_diag.hpp"
#include "itere/embedding.hpp"
#include "itere/kg_store.hpp"

namespace oracle {

using itere::Axiom;
using itere::AxiomType;
using itere::EntityId;
using itere::RelationId;
using itere::Triple;

using Dense = std::vector<double>;  // row-major n x n

inline Dense dense_of(const itere::BlockLayout& layout, const std::vector<double>& coeffs) {
  const std::size_t n = layout.dim();
  Dense m(n * n, 0.0);
  for (std::size_t i = 0; i < layout.scalars; ++i) m[i * n + i] = coeffs[i];
  for (std::size_t j = 0; j < layout.blocks; ++j) {
    const std::size_t p = layout.scalars + 2 * j;
    const double a = coeffs[p], b = coeffs[p + 1];
    m[p * n + p] = a;
    m[p * n + p + 1] = -b;
    m[(p + 1) * n + p] = b;
    m[(p + 1) * n + p + 1] = a;
  }
  return m;
}

inline Dense matmul(const Dense& x, const Dense& y, std::size_t n) {
  Dense out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += x[i * n + k] * y[k * n + j];
  return out;
}

inline double frobenius_diff(const Dense& x, const Dense& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

inline double bilinear(const std::vector<double>& s, const Dense& m, const std::vector<double>& o) {
  const std::size_t n = s.size();
  double out = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out += s[i] * m[i * n + j] * o[j];
  return out;
}

inline Dense identity(std::size_t n) {
  Dense m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
  return m;
}

// Random graph over `entities` x `relations`; roughly `count` distinct triples.
inline std::vector<Triple> random_triples(std::mt19937_64& rng, std::size_t entities, std::size_t relations,
                                          std::size_t count, bool self_loops = true) {
  std::uniform_int_distribution<EntityId> e(0, static_cast<EntityId>(entities - 1));
  std::uniform_int_distribution<RelationId> r(0, static_cast<RelationId>(relations - 1));
  std::vector<Triple> out;
  for (std::size_t i = 0; i < count; ++i) {
    Triple t{e(rng), r(rng), e(rng)};
    if (!self_loops && t.subject == t.object) continue;
    out.push_back(t);
  }
  return out;
}

// Linear scan membership.
inline bool has(const std::vector<Triple>& ts, EntityId s, RelationId r, EntityId o) {
  return std::find(ts.begin(), ts.end(), Triple{s, r, o}) != ts.end();
}

inline std::vector<Triple> dedup(std::vector<Triple> ts) {
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

// Rule body and head for one assignment of the variables (x, y, z).
struct Instance {
  std::vector<Triple> body;
  Triple head;
};

// Calls fn for every variable assignment over E^3 (E^1, E^2 where fewer variables are
// used) that instantiates the axiom's rule. The instance is reused between calls.
template <class Fn>
void for_each_instance(const Axiom& a, std::size_t entities, Fn&& fn) {
  const auto& rel = a.relations;
  const auto E = static_cast<EntityId>(entities);
  Instance inst;
  for (EntityId x = 0; x < E; ++x) {
    for (EntityId y = 0; y < E; ++y) {
      switch (a.type) {
        case AxiomType::Reflexive:
          if (y == 0) {
            inst.body.clear();
            inst.head = {x, rel[0], x};
            fn(inst);
          }
          break;
        case AxiomType::Symmetric:
          inst.body.assign({{x, rel[0], y}});
          inst.head = {y, rel[0], x};
          fn(inst);
          break;
        case AxiomType::Equivalent:
        case AxiomType::SubProperty:
          inst.body.assign({{x, rel[0], y}});
          inst.head = {x, rel[1], y};
          fn(inst);
          break;
        case AxiomType::Inverse:
          inst.body.assign({{y, rel[1], x}});
          inst.head = {x, rel[0], y};
          fn(inst);
          break;
        case AxiomType::Transitive:
          for (EntityId z = 0; z < E; ++z) {
            inst.body.assign({{x, rel[0], y}, {y, rel[0], z}});
            inst.head = {x, rel[0], z};
            fn(inst);
          }
          break;
        case AxiomType::SubPropertyChain:
          for (EntityId z = 0; z < E; ++z) {
            inst.body.assign({{x, rel[0], y}, {y, rel[1], z}});
            inst.head = {x, rel[2], z};
            fn(inst);
          }
          break;
      }
    }
  }
}

inline RelationId head_relation(const Axiom& a) {
  switch (a.type) {
    case AxiomType::Equivalent:
    case AxiomType::SubProperty: return a.relations[1];
    case AxiomType::SubPropertyChain: return a.relations[2];
    default: return a.relations[0];
  }
}

struct Counts {
  std::size_t support = 0, head_size = 0;
};

inline bool body_holds(const std::set<Triple>& known, const Instance& inst) {
  for (const auto& b : inst.body)
    if (!known.count(b)) return false;
  return true;
}

// support = satisfied instances (body and head in T); head_size = triples of the head relation.
inline Counts support_and_head(const std::vector<Triple>& ts, const Axiom& a, std::size_t entities) {
  const std::set<Triple> known(ts.begin(), ts.end());
  Counts c;
  // Reflexive only counts self-loops that exist
  for_each_instance(a, entities, [&](const Instance& inst) { c.support += known.count(inst.head) && body_holds(known, inst); });
  for (const auto& t : known) c.head_size += t.relation == head_relation(a);
  return c;
}

// Grounding heads with their bodies: body in T, head not in T. Reflexive ranges over
// the entities that occur with the relation.
inline std::set<std::pair<Triple, std::vector<Triple>>> groundings(const std::vector<Triple>& ts, const Axiom& a,
                                                                    std::size_t entities) {
  const std::set<Triple> known(ts.begin(), ts.end());
  std::set<std::pair<Triple, std::vector<Triple>>> out;
  std::set<EntityId> occurring;
  for (const auto& t : ts) {
    if (t.relation == a.relations[0]) {
      occurring.insert(t.subject);
      occurring.insert(t.object);
    }
  }
  for_each_instance(a, entities, [&](const Instance& inst) {
    if (known.count(inst.head)) return;
    const bool ok = a.type == AxiomType::Reflexive ? occurring.count(inst.head.subject) > 0 : body_holds(known, inst);
    if (ok) out.insert({inst.head, inst.body});
  });
  return out;
}

// Fraction of head-relation triples that are the head of some satisfied instance.
inline double head_coverage(const std::vector<Triple>& ts, const Axiom& a, std::size_t entities) {
  const std::set<Triple> known(ts.begin(), ts.end());
  std::set<Triple> covered;
  for_each_instance(a, entities, [&](const Instance& inst) {
    if (known.count(inst.head) && body_holds(known, inst)) covered.insert(inst.head);
  });
  std::size_t n = 0;
  for (const auto& t : known) n += t.relation == head_relation(a);
  return static_cast<double>(covered.size()) / static_cast<double>(n);
}

// Every axiom over `relations` relations, respecting the type's distinctness rules.
inline std::vector<Axiom> all_axioms(std::size_t relations) {
  std::vector<Axiom> out;
  const auto R = static_cast<RelationId>(relations);
  for (RelationId r = 0; r < R; ++r) {
    out.push_back(Axiom::reflexive(r));
    out.push_back(Axiom::symmetric(r));
    out.push_back(Axiom::transitive(r));
    for (RelationId q = 0; q < R; ++q) {
      if (q != r) {
        out.push_back(Axiom::equivalent(q, r));
        out.push_back(Axiom::sub_property(q, r));
      }
      out.push_back(Axiom::inverse(r, q));
      for (RelationId h = 0; h < R; ++h) out.push_back(Axiom::chain(r, q, h));
    }
  }
  return out;
}

// Rank by sorting every candidate: the true entity's 1-based position when candidates
// are ordered by (score desc, id asc), after optionally removing known corruptions.
inline std::size_t sort_rank(const std::vector<std::pair<double, EntityId>>& scored, EntityId truth,
                             const std::set<EntityId>& removed) {
  std::vector<std::pair<double, EntityId>> v;
  for (const auto& c : scored) {
    if (c.second != truth && removed.count(c.second)) continue;
    v.push_back(c);
  }
  std::sort(v.begin(), v.end(), [](const auto& l, const auto& r) {
    if (l.first != r.first) return l.first > r.first;
    return l.second < r.second;
  });
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i].second == truth) return i + 1;
  return 0;
}

// Supremum of f(N) = N - N (1 - t)^(1 / (p N)) over a log grid N in [1, 1e15].
inline double k_bound_sup(double p, double t, std::size_t points_per_decade = 200) {
  double best = 0.0;
  const double l = std::log1p(-t) / p;
  for (std::size_t i = 0; i <= 15 * points_per_decade; ++i) {
    const double n = std::pow(10.0, static_cast<double>(i) / static_cast<double>(points_per_decade));
    best = std::max(best, -n * std::expm1(l / n));
  }
  return best;
}

}  // namespace oracle
