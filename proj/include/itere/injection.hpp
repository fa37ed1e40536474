#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "itere/axiom.hpp"
#include "itere/kg_store.hpp"

namespace itere {

/// Propositional formula over truth values in [0, 1], evaluated with the product
/// t-norm: a AND b = ab, a OR b = a + b - ab, NOT a = 1 - a, a => b = NOT a OR b.
class TruthExpr {
 public:
  static TruthExpr atom(double truth);
  static TruthExpr conj(TruthExpr lhs, TruthExpr rhs);
  static TruthExpr disj(TruthExpr lhs, TruthExpr rhs);
  static TruthExpr negate(TruthExpr operand);
  static TruthExpr implies(TruthExpr premise, TruthExpr conclusion);

  double evaluate() const;

 private:
  enum class Op { Atom, And, Or, Not, Implies };
  struct Node;

  explicit TruthExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static double eval(const Node& node);

  std::shared_ptr<const Node> node_;
};

double truth_compose(const TruthExpr& expr);

/// Solves pi(body_1 AND ... AND body_n => head) = grounding_truth for pi(head),
/// clamped to [0, 1]. With unit body truths the result is grounding_truth exactly.
/// Throws Error when the body product is zero.
double solve_head_truth(std::span<const double> body_truths, double grounding_truth);

struct Grounding {
  Triple head;
  std::vector<Triple> body;
  Axiom axiom;
};

/// All instantiations of the axiom's rule whose body lies in the graph and whose head
/// does not. Reflexive heads range over the entities seen with the relation.
std::vector<Grounding> ground_axiom(const KnowledgeGraph& kg, const Axiom& axiom);

struct InferredTriple {
  Triple triple;
  double truth = 0.0;
  std::vector<Axiom> sources;  // contributing axioms, highest score first
};

struct InjectionConfig {
  double score_threshold = 0.9;      // axioms need score > threshold
  std::size_t max_inferred = 1000;   // axioms inferring more distinct heads are skipped
  double sparsity_threshold = 0.995;
  bool restrict_to_sparse = true;    // false keeps every inferred head

  void validate() const;
};

/// Infers heads from high-scoring axioms, keeps those touching a sparse entity, and
/// merges duplicates with the maximum contributing score. Sorted by triple.
std::vector<InferredTriple> inject_triples(const KnowledgeGraph& kg, std::span<const ScoredAxiom> scored,
                                           std::span<const EntityId> sparse, const InjectionConfig& config);

}  // namespace itere
