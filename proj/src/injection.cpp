#include "itere/injection.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>

namespace itere {

struct TruthExpr::Node {
  Op op;
  double value = 0.0;
  std::shared_ptr<const Node> lhs, rhs;
};

TruthExpr TruthExpr::atom(double truth) {
  if (!(truth >= 0.0 && truth <= 1.0)) throw Error("truth value " + std::to_string(truth) + " outside [0, 1]");
  return TruthExpr(std::make_shared<const Node>(Node{Op::Atom, truth, nullptr, nullptr}));
}

TruthExpr TruthExpr::conj(TruthExpr lhs, TruthExpr rhs) {
  return TruthExpr(std::make_shared<const Node>(Node{Op::And, 0.0, std::move(lhs.node_), std::move(rhs.node_)}));
}

TruthExpr TruthExpr::disj(TruthExpr lhs, TruthExpr rhs) {
  return TruthExpr(std::make_shared<const Node>(Node{Op::Or, 0.0, std::move(lhs.node_), std::move(rhs.node_)}));
}

TruthExpr TruthExpr::negate(TruthExpr operand) {
  return TruthExpr(std::make_shared<const Node>(Node{Op::Not, 0.0, std::move(operand.node_), nullptr}));
}

TruthExpr TruthExpr::implies(TruthExpr premise, TruthExpr conclusion) {
  return TruthExpr(
      std::make_shared<const Node>(Node{Op::Implies, 0.0, std::move(premise.node_), std::move(conclusion.node_)}));
}

double TruthExpr::eval(const Node& node) {
  switch (node.op) {
    case Op::Atom: return node.value;
    case Op::And: return eval(*node.lhs) * eval(*node.rhs);
    case Op::Or: {
      const double a = eval(*node.lhs), b = eval(*node.rhs);
      return a + b - a * b;
    }
    case Op::Not: return 1.0 - eval(*node.lhs);
    case Op::Implies: {
      // not(a) or b
      const double na = 1.0 - eval(*node.lhs), b = eval(*node.rhs);
      return na + b - na * b;
    }
  }
  return 0.0;
}

double TruthExpr::evaluate() const { return eval(*node_); }

double truth_compose(const TruthExpr& expr) { return expr.evaluate(); }

double solve_head_truth(std::span<const double> body_truths, double grounding_truth) {
  double product = 1.0;
  for (double b : body_truths) product *= b;
  if (product == 0.0) throw Error("solve_head_truth: body truth product is zero, head truth undefined");
  // pi(g) = 1 - P + P * h  =>  h = (pi(g) - (1 - P)) / P, exact for P == 1
  const double head = (grounding_truth - (1.0 - product)) / product;
  return std::clamp(head, 0.0, 1.0);
}

std::vector<Grounding> ground_axiom(const KnowledgeGraph& kg, const Axiom& axiom) {
  std::vector<Grounding> out;
  const auto& rel = axiom.relations;
  auto emit = [&](Triple head, std::vector<Triple> body) {
    if (!kg.contains(head)) out.push_back({head, std::move(body), axiom});
  };

  switch (axiom.type) {
    case AxiomType::Reflexive:
      for (auto x : kg.entities_of(rel[0])) emit({x, rel[0], x}, {});
      break;
    case AxiomType::Symmetric:
      for (const auto& t : kg.triples_of(rel[0])) emit({t.object, rel[0], t.subject}, {t});
      break;
    case AxiomType::Transitive:
      for (const auto& t : kg.triples_of(rel[0])) {
        for (auto z : kg.objects_of(t.object, rel[0])) {
          emit({t.subject, rel[0], z}, {t, {t.object, rel[0], z}});
        }
      }
      break;
    case AxiomType::Equivalent:
    case AxiomType::SubProperty:
      for (const auto& t : kg.triples_of(rel[0])) emit({t.subject, rel[1], t.object}, {t});
      break;
    case AxiomType::Inverse:
      for (const auto& t : kg.triples_of(rel[1])) emit({t.object, rel[0], t.subject}, {t});
      break;
    case AxiomType::SubPropertyChain:
      for (const auto& t : kg.triples_of(rel[0])) {
        for (auto y2 : kg.objects_of(t.object, rel[1])) {
          emit({t.subject, rel[2], y2}, {t, {t.object, rel[1], y2}});
        }
      }
      break;
  }
  return out;
}

void InjectionConfig::validate() const {
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) throw Error("axiom score threshold must lie in [0, 1]");
  if (max_inferred < 1) throw Error("maximum inferred triples m must be at least 1");
  if (!(sparsity_threshold >= 0.0 && sparsity_threshold <= 1.0)) throw Error("sparsity threshold must lie in [0, 1]");
}

std::vector<InferredTriple> inject_triples(const KnowledgeGraph& kg, std::span<const ScoredAxiom> scored,
                                           std::span<const EntityId> sparse, const InjectionConfig& config) {
  config.validate();
  std::vector<char> is_sparse(kg.num_entities(), 0);
  for (auto e : sparse) {
    if (e < is_sparse.size()) is_sparse[e] = 1;
  }

  struct Merged {
    double truth = 0.0;
    std::vector<std::pair<double, Axiom>> sources;
  };
  std::map<Triple, Merged> merged;

  for (const auto& axiom : scored) {
    if (!(axiom.score > config.score_threshold)) continue;
    const auto groundings = ground_axiom(kg, axiom.axiom);

    // one grounding per distinct head; bodies are graph triples with truth 1
    std::map<Triple, std::size_t> heads;
    for (const auto& g : groundings) heads.try_emplace(g.head, g.body.size());
    if (heads.size() > config.max_inferred) continue;

    for (const auto& [head, body_size] : heads) {
      if (config.restrict_to_sparse && !is_sparse[head.subject] && !is_sparse[head.object]) continue;
      const std::vector<double> body_truths(body_size, 1.0);
      const double truth = solve_head_truth(body_truths, axiom.score);
      auto& entry = merged[head];
      entry.truth = std::max(entry.truth, truth);
      entry.sources.emplace_back(axiom.score, axiom.axiom);
    }
  }

  std::vector<InferredTriple> out;
  out.reserve(merged.size());
  for (auto& [triple, entry] : merged) {
    std::sort(entry.sources.begin(), entry.sources.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    InferredTriple inferred{triple, entry.truth, {}};
    for (const auto& src : entry.sources) inferred.sources.push_back(src.second);
    out.push_back(std::move(inferred));
  }
  return out;
}

}  // namespace itere
