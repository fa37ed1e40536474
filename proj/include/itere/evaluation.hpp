#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "itere/axiom.hpp"
#include "itere/embedding.hpp"
#include "itere/injection.hpp"
#include "itere/kg_store.hpp"

namespace itere {

enum class Side { Subject, Object };
enum class RankMode { Raw, Filter };

/// Known triples for filtered ranking and train frequencies for bucketing.
struct EvaluationSplits {
  TripleSet known;  // train ∪ valid ∪ test
  std::vector<std::size_t> train_frequency;
};

EvaluationSplits make_evaluation_splits(const KnowledgeGraph& train, std::span<const Triple> valid,
                                        std::span<const Triple> test);

/// Rank of the true entity among all |E| substitutions:
/// 1 + #(strictly higher score) + #(equal score with a smaller id). Filter mode drops
/// candidates whose triple is in `known`, never the true one. Scores are logits.
std::size_t rank_entity_side(const EmbeddingModel& model, const TripleSet& known, const Triple& t, Side side,
                             RankMode mode);

struct RankResult {
  Triple triple;
  std::size_t subject_rank = 1;
  std::size_t object_rank = 1;
  double mean_rank() const { return 0.5 * static_cast<double>(subject_rank + object_rank); }
};

struct RankMetrics {
  double mrr = 0.0;            // mean of 1/rank over both sides of every triple
  double mrr_mean_rank = 0.0;  // mean of 1/mean_rank over triples
  double hits1 = 0.0, hits3 = 0.0, hits10 = 0.0;
};

RankMetrics metrics_from_ranks(std::span<const RankResult> ranks);

struct FrequencyBucket {
  std::size_t lo = 0, hi = 1;  // train frequency in [lo, hi)
  double mrr = 0.0;            // filtered
  std::size_t count = 0;       // side observations
};

struct MetricsReport {
  std::size_t test_triples = 0;
  std::size_t axiom_ranked = 0;  // triples forced to rank 1 by injected axioms
  RankMetrics raw, filter;
  std::vector<FrequencyBucket> buckets;
  std::vector<RankResult> raw_ranks, filter_ranks;
};

/// Power-of-two frequency buckets [0,1), [1,2), [2,4), ... over filtered side ranks,
/// keyed by the train frequency of the entity being predicted.
std::vector<FrequencyBucket> frequency_buckets(std::span<const RankResult> filter_ranks,
                                               std::span<const std::size_t> train_frequency);

MetricsReport link_prediction(const EmbeddingModel& model, const EvaluationSplits& splits,
                              std::span<const Triple> test);

/// As link_prediction, but test triples present in `injected` get rank 1 on both sides.
MetricsReport link_prediction_with_axioms(const EmbeddingModel& model, const EvaluationSplits& splits,
                                          std::span<const Triple> test, std::span<const InferredTriple> injected);

/// Fraction of head-relation pairs that are the head of some support of the axiom.
/// Throws Error when the head relation has no triples.
double head_coverage(const KnowledgeGraph& kg, const Axiom& axiom);

struct CurvePoint {
  double threshold = 0.0;
  double selected_fraction = 0.0;      // share of the pool with score > threshold
  double high_quality_coverage = 0.0;  // share of HQ axioms with score > threshold
};

struct RuleReport {
  double hc_threshold = 0.7;
  std::size_t pool_size = 0;
  std::size_t high_quality = 0;
  std::vector<double> head_coverage;  // aligned with the scored list
  std::vector<CurvePoint> curve;
};

inline constexpr double kDefaultHcThreshold = 0.7;

std::vector<double> default_score_grid();

RuleReport summarize_rules(const KnowledgeGraph& kg, std::span<const ScoredAxiom> scored, double hc_threshold,
                           std::span<const double> score_grid);

}  // namespace itere
