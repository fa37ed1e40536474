#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "itere/block_diag.hpp"
#include "itere/kg_store.hpp"

namespace itere {

using Rng = std::mt19937_64;

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  std::size_t dim = 200;
  std::optional<std::size_t> scalars;  // defaults to dim / 2
  std::size_t negatives = 6;
  double l1 = 1e-5;
  double learning_rate = 1e-3;
  std::size_t batch_size = 1024;
  std::size_t epochs_per_iteration = 10;
  std::uint64_t seed = 42;
  AdamParams adam;

  BlockLayout layout() const;
  /// Throws Error when a field is out of range.
  void validate() const;
};

struct LabeledTriple {
  Triple triple;
  double label = 1.0;

  friend bool operator==(const LabeledTriple&, const LabeledTriple&) = default;
};

struct AdamState {
  std::vector<double> entity_m, entity_v;
  std::vector<double> relation_m, relation_v;
  std::uint64_t step = 0;
};

/// Entity vectors plus one block-diagonal matrix per relation, with Adam moments.
/// Both parameter tables are row-major with `dim()` values per row.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(std::size_t num_entities, std::size_t num_relations, BlockLayout layout);

  BlockLayout layout() const noexcept { return layout_; }
  std::size_t dim() const noexcept { return layout_.dim(); }
  std::size_t num_entities() const noexcept { return num_entities_; }
  std::size_t num_relations() const noexcept { return num_relations_; }

  std::span<const double> entity(EntityId e) const { return {entities_.data() + e * dim(), dim()}; }
  std::span<double> entity(EntityId e) { return {entities_.data() + e * dim(), dim()}; }
  std::span<const double> relation_coeffs(RelationId r) const { return {relations_.data() + r * dim(), dim()}; }
  std::span<double> relation_coeffs(RelationId r) { return {relations_.data() + r * dim(), dim()}; }
  BlockDiagMatrix relation(RelationId r) const { return BlockDiagMatrix(layout_, relation_coeffs(r)); }
  void set_relation(RelationId r, const BlockDiagMatrix& m);

  std::span<const double> entity_table() const noexcept { return entities_; }
  std::span<double> entity_table() noexcept { return entities_; }
  std::span<const double> relation_table() const noexcept { return relations_; }
  std::span<double> relation_table() noexcept { return relations_; }

  const AdamState& optimizer() const noexcept { return adam_; }
  AdamState& optimizer() noexcept { return adam_; }

  /// v_s^T M_r v_o before the sigmoid.
  double logit(const Triple& t) const;

  friend bool operator==(const EmbeddingModel& a, const EmbeddingModel& b);

 private:
  BlockLayout layout_;
  std::size_t num_entities_ = 0;
  std::size_t num_relations_ = 0;
  std::vector<double> entities_;
  std::vector<double> relations_;
  AdamState adam_;
};

/// Every parameter i.i.d. uniform on (-0.1, 0.1) from `config.seed`; optimizer zeroed.
EmbeddingModel init_model(std::size_t num_entities, std::size_t num_relations, const TrainConfig& config);

double sigmoid(double x);

/// sigma(v_s^T M_r v_o), strictly inside (0, 1) for finite parameters.
double score_triple(const EmbeddingModel& model, const Triple& t);

struct NegativeSample {
  std::vector<LabeledTriple> triples;
  bool exhausted = false;  // the retry bound was hit and fewer than requested were produced
};

inline constexpr std::size_t kNegativeRetries = 100;

/// Corrupts subject, object or relation (uniform) of `positive`, rejecting corruptions
/// that land in the graph or reproduce `positive`.
NegativeSample sample_negatives(const KnowledgeGraph& kg, const Triple& positive, std::size_t count, Rng& rng);

/// Gradient rows for the entities and relations touched by a batch.
class SparseGradient {
 public:
  SparseGradient() = default;
  SparseGradient(std::size_t num_entities, std::size_t num_relations, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::span<double> entity_row(EntityId e);
  std::span<double> relation_row(RelationId r);
  const double* find_entity(EntityId e) const;
  const double* find_relation(RelationId r) const;

  /// Touched ids in first-touch order.
  std::span<const EntityId> touched_entities() const noexcept { return entity_ids_; }
  std::span<const RelationId> touched_relations() const noexcept { return relation_ids_; }

  void clear();

 private:
  std::size_t dim_ = 0;
  std::vector<std::int64_t> entity_slot_, relation_slot_;
  std::vector<EntityId> entity_ids_;
  std::vector<RelationId> relation_ids_;
  std::vector<double> entity_rows_, relation_rows_;
};

struct LossTerms {
  double cross_entropy = 0.0;  // mean over the batch
  double regularization = 0.0;
  double total() const { return cross_entropy + regularization; }
};

inline constexpr double kLogClamp = 1e-12;

/// Mean binary cross-entropy over `batch` plus l1 * sum|theta| over touched rows.
/// `gradient` is cleared and refilled with the analytic gradient.
LossTerms compute_loss_and_gradients(const EmbeddingModel& model, std::span<const LabeledTriple> batch,
                                     double l1, SparseGradient& gradient);

/// One bias-corrected Adam step on the touched rows. Throws before touching the model
/// if any gradient entry is not finite.
void adam_update(EmbeddingModel& model, const SparseGradient& gradient, const TrainConfig& config);

struct EpochStats {
  double mean_loss = 0.0;
  std::size_t examples = 0;
  std::size_t short_negative_draws = 0;
};

/// Shuffles `inputs`, adds negatives for every input that is a graph triple, and runs
/// one Adam step per minibatch.
EpochStats train_epoch(EmbeddingModel& model, std::span<const LabeledTriple> inputs, const KnowledgeGraph& kg,
                       const TrainConfig& config, Rng& rng);

}  // namespace itere
