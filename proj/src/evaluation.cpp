#include "itere/evaluation.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "itere/kernels.hpp"

namespace itere {

EvaluationSplits make_evaluation_splits(const KnowledgeGraph& train, std::span<const Triple> valid,
                                        std::span<const Triple> test) {
  EvaluationSplits splits;
  splits.known = train.members();
  splits.known.insert(valid.begin(), valid.end());
  splits.known.insert(test.begin(), test.end());
  splits.train_frequency.assign(train.num_entities(), 0);
  for (const auto& t : train.triples()) {
    ++splits.train_frequency[t.subject];
    ++splits.train_frequency[t.object];
  }
  return splits;
}

namespace {

// Logits of every substitution of `side`.
void candidate_scores(const EmbeddingModel& model, const Triple& t, Side side, std::vector<double>& query,
                      std::vector<double>& scores) {
  const auto& k = kernels::active();
  const auto layout = model.layout();
  const std::size_t d = model.dim();
  query.resize(d);
  scores.resize(model.num_entities());
  const double* m = model.relation_coeffs(t.relation).data();
  if (side == Side::Subject) {
    // e^T M v_o = e . (M v_o)
    k.apply(m, model.entity(t.object).data(), layout.scalars, layout.blocks, query.data());
  } else {
    // v_s^T M e = (M^T v_s) . e
    k.apply_transpose(m, model.entity(t.subject).data(), layout.scalars, layout.blocks, query.data());
  }
  k.score_rows(model.entity_table().data(), model.num_entities(), query.data(), d, scores.data());
}

struct SideRanks {
  std::size_t raw = 1, filter = 1;
};

SideRanks ranks_from_scores(std::span<const double> scores, const TripleSet& known, const Triple& t, Side side) {
  const EntityId truth = side == Side::Subject ? t.subject : t.object;
  const double target = scores[truth];
  SideRanks ranks;
  for (EntityId e = 0; e < scores.size(); ++e) {
    if (e == truth) continue;
    const bool ahead = scores[e] > target || (scores[e] == target && e < truth);
    if (!ahead) continue;
    ++ranks.raw;
    Triple candidate = t;
    (side == Side::Subject ? candidate.subject : candidate.object) = e;
    if (!known.contains(candidate)) ++ranks.filter;
  }
  return ranks;
}

}  // namespace

std::size_t rank_entity_side(const EmbeddingModel& model, const TripleSet& known, const Triple& t, Side side,
                             RankMode mode) {
  std::vector<double> query, scores;
  candidate_scores(model, t, side, query, scores);
  auto ranks = ranks_from_scores(scores, known, t, side);
  return mode == RankMode::Raw ? ranks.raw : ranks.filter;
}

RankMetrics metrics_from_ranks(std::span<const RankResult> ranks) {
  RankMetrics m;
  if (ranks.empty()) return m;
  const double sides = 2.0 * static_cast<double>(ranks.size());
  for (const auto& r : ranks) {
    for (auto rank : {r.subject_rank, r.object_rank}) {
      m.mrr += 1.0 / static_cast<double>(rank);
      m.hits1 += rank <= 1;
      m.hits3 += rank <= 3;
      m.hits10 += rank <= 10;
    }
    m.mrr_mean_rank += 1.0 / r.mean_rank();
  }
  m.mrr /= sides;
  m.hits1 /= sides;
  m.hits3 /= sides;
  m.hits10 /= sides;
  m.mrr_mean_rank /= static_cast<double>(ranks.size());
  return m;
}

std::vector<FrequencyBucket> frequency_buckets(std::span<const RankResult> filter_ranks,
                                               std::span<const std::size_t> train_frequency) {
  std::vector<FrequencyBucket> buckets;
  auto bucket_of = [&](std::size_t freq) -> FrequencyBucket& {
    std::size_t index = freq == 0 ? 0 : static_cast<std::size_t>(std::bit_width(freq));
    while (buckets.size() <= index) {
      const std::size_t i = buckets.size();
      FrequencyBucket b;
      b.lo = i == 0 ? 0 : std::size_t{1} << (i - 1);
      b.hi = std::size_t{1} << i;
      buckets.push_back(b);
    }
    return buckets[index];
  };
  auto freq_of = [&](EntityId e) { return e < train_frequency.size() ? train_frequency[e] : std::size_t{0}; };
  for (const auto& r : filter_ranks) {
    auto& bs = bucket_of(freq_of(r.triple.subject));
    bs.mrr += 1.0 / static_cast<double>(r.subject_rank);
    ++bs.count;
    auto& bo = bucket_of(freq_of(r.triple.object));
    bo.mrr += 1.0 / static_cast<double>(r.object_rank);
    ++bo.count;
  }
  for (auto& b : buckets) {
    if (b.count) b.mrr /= static_cast<double>(b.count);
  }
  std::erase_if(buckets, [](const FrequencyBucket& b) { return b.count == 0; });
  return buckets;
}

namespace {

MetricsReport evaluate(const EmbeddingModel& model, const EvaluationSplits& splits, std::span<const Triple> test,
                       const TripleSet* injected) {
  if (test.empty()) throw Error("link prediction: empty test set");
  MetricsReport report;
  report.test_triples = test.size();
  std::vector<double> query, scores;
  for (const auto& t : test) {
    RankResult raw{t, 1, 1}, filter{t, 1, 1};
    if (injected && injected->contains(t)) {
      ++report.axiom_ranked;
    } else {
      candidate_scores(model, t, Side::Subject, query, scores);
      auto s = ranks_from_scores(scores, splits.known, t, Side::Subject);
      candidate_scores(model, t, Side::Object, query, scores);
      auto o = ranks_from_scores(scores, splits.known, t, Side::Object);
      raw.subject_rank = s.raw;
      raw.object_rank = o.raw;
      filter.subject_rank = s.filter;
      filter.object_rank = o.filter;
    }
    report.raw_ranks.push_back(raw);
    report.filter_ranks.push_back(filter);
  }
  report.raw = metrics_from_ranks(report.raw_ranks);
  report.filter = metrics_from_ranks(report.filter_ranks);
  report.buckets = frequency_buckets(report.filter_ranks, splits.train_frequency);
  return report;
}

}  // namespace

MetricsReport link_prediction(const EmbeddingModel& model, const EvaluationSplits& splits,
                              std::span<const Triple> test) {
  return evaluate(model, splits, test, nullptr);
}

MetricsReport link_prediction_with_axioms(const EmbeddingModel& model, const EvaluationSplits& splits,
                                          std::span<const Triple> test, std::span<const InferredTriple> injected) {
  TripleSet inferred;
  for (const auto& i : injected) inferred.insert(i.triple);
  return evaluate(model, splits, test, &inferred);
}

double head_coverage(const KnowledgeGraph& kg, const Axiom& axiom) {
  const RelationId head = axiom.head_relation();
  const auto head_triples = kg.triples_of(head);
  if (head_triples.empty()) throw Error("head_coverage: head relation has no triples");
  const auto& rel = axiom.relations;
  std::size_t covered = 0;
  for (const auto& t : head_triples) {
    const EntityId x = t.subject, y = t.object;
    bool hit = false;
    switch (axiom.type) {
      case AxiomType::Reflexive: hit = x == y; break;
      case AxiomType::Symmetric: hit = kg.contains(y, head, x); break;
      case AxiomType::Transitive:
        for (auto mid : kg.objects_of(x, head)) {
          if (kg.contains(mid, head, y)) {
            hit = true;
            break;
          }
        }
        break;
      case AxiomType::Equivalent:
      case AxiomType::SubProperty: hit = kg.contains(x, rel[0], y); break;
      case AxiomType::Inverse: hit = kg.contains(y, rel[1], x); break;
      case AxiomType::SubPropertyChain:
        for (auto mid : kg.objects_of(x, rel[0])) {
          if (kg.contains(mid, rel[1], y)) {
            hit = true;
            break;
          }
        }
        break;
    }
    covered += hit;
  }
  return static_cast<double>(covered) / static_cast<double>(head_triples.size());
}

std::vector<double> default_score_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  return grid;
}

RuleReport summarize_rules(const KnowledgeGraph& kg, std::span<const ScoredAxiom> scored, double hc_threshold,
                           std::span<const double> score_grid) {
  RuleReport report;
  report.hc_threshold = hc_threshold;
  report.pool_size = scored.size();
  report.head_coverage.reserve(scored.size());
  for (const auto& s : scored) {
    const double hc = head_coverage(kg, s.axiom);
    report.head_coverage.push_back(hc);
    report.high_quality += hc > hc_threshold;
  }
  for (double threshold : score_grid) {
    std::size_t selected = 0, hq_selected = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (!(scored[i].score > threshold)) continue;
      ++selected;
      hq_selected += report.head_coverage[i] > hc_threshold;
    }
    CurvePoint p;
    p.threshold = threshold;
    p.selected_fraction = scored.empty() ? 0.0 : static_cast<double>(selected) / static_cast<double>(scored.size());
    p.high_quality_coverage =
        report.high_quality == 0 ? 0.0 : static_cast<double>(hq_selected) / static_cast<double>(report.high_quality);
    report.curve.push_back(p);
  }
  return report;
}

}  // namespace itere
