#include "itere/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "itere/kernels.hpp"

namespace itere {

BlockLayout TrainConfig::layout() const {
  const std::size_t ns = scalars.value_or(dim / 2);
  return {ns, (dim - ns) / 2};
}

void TrainConfig::validate() const {
  if (dim == 0 || dim % 2 != 0) throw Error("embedding dimension must be positive and even, got " + std::to_string(dim));
  const std::size_t ns = scalars.value_or(dim / 2);
  if (ns > dim || (dim - ns) % 2 != 0) {
    throw Error("scalar count " + std::to_string(ns) + " leaves an odd remainder of dimension " + std::to_string(dim) +
                (scalars ? "" : "; set the scalar count explicitly when d is not a multiple of 4"));
  }
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (l1 < 0.0) throw Error("l1 weight must be non-negative");
  if (batch_size == 0) throw Error("batch size must be positive");
  if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0)) {
    throw Error("adam betas must lie in (0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw Error("adam epsilon must be positive");
}

EmbeddingModel::EmbeddingModel(std::size_t num_entities, std::size_t num_relations, BlockLayout layout)
    : layout_(layout),
      num_entities_(num_entities),
      num_relations_(num_relations),
      entities_(num_entities * layout.dim(), 0.0),
      relations_(num_relations * layout.dim(), 0.0) {
  adam_.entity_m.assign(entities_.size(), 0.0);
  adam_.entity_v.assign(entities_.size(), 0.0);
  adam_.relation_m.assign(relations_.size(), 0.0);
  adam_.relation_v.assign(relations_.size(), 0.0);
}

void EmbeddingModel::set_relation(RelationId r, const BlockDiagMatrix& m) {
  if (!(m.layout() == layout_)) throw Error("set_relation: layout mismatch");
  std::ranges::copy(m.coeffs(), relation_coeffs(r).begin());
}

double EmbeddingModel::logit(const Triple& t) const {
  return kernels::active().bilinear(entity(t.subject).data(), relation_coeffs(t.relation).data(),
                                    entity(t.object).data(), layout_.scalars, layout_.blocks);
}

bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) {
  return a.layout_ == b.layout_ && a.num_entities_ == b.num_entities_ && a.num_relations_ == b.num_relations_ &&
         a.entities_ == b.entities_ && a.relations_ == b.relations_ && a.adam_.entity_m == b.adam_.entity_m &&
         a.adam_.entity_v == b.adam_.entity_v && a.adam_.relation_m == b.adam_.relation_m &&
         a.adam_.relation_v == b.adam_.relation_v && a.adam_.step == b.adam_.step;
}

EmbeddingModel init_model(std::size_t num_entities, std::size_t num_relations, const TrainConfig& config) {
  config.validate();
  if (num_entities == 0 || num_relations == 0) throw Error("init_model: entity and relation counts must be positive");
  EmbeddingModel model(num_entities, num_relations, config.layout());
  Rng rng(config.seed);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  auto draw = [&] {
    double x;
    do {
      x = dist(rng);
    } while (x == -0.1);
    return x;
  };
  for (auto& x : model.entity_table()) x = draw();
  for (auto& x : model.relation_table()) x = draw();
  return model;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double score_triple(const EmbeddingModel& model, const Triple& t) { return sigmoid(model.logit(t)); }

NegativeSample sample_negatives(const KnowledgeGraph& kg, const Triple& positive, std::size_t count, Rng& rng) {
  NegativeSample out;
  out.triples.reserve(count);
  std::uniform_int_distribution<int> position(0, 2);
  std::uniform_int_distribution<EntityId> entity(0, static_cast<EntityId>(kg.num_entities() - 1));
  std::uniform_int_distribution<RelationId> relation(0, static_cast<RelationId>(kg.num_relations() - 1));

  for (std::size_t i = 0; i < count; ++i) {
    bool found = false;
    for (std::size_t attempt = 0; attempt < kNegativeRetries && !found; ++attempt) {
      Triple t = positive;
      switch (position(rng)) {
        case 0: t.subject = entity(rng); break;
        case 1: t.object = entity(rng); break;
        default: t.relation = relation(rng); break;
      }
      if (t != positive && !kg.contains(t)) {
        out.triples.push_back({t, 0.0});
        found = true;
      }
    }
    if (!found) {
      out.exhausted = true;
      break;
    }
  }
  return out;
}

SparseGradient::SparseGradient(std::size_t num_entities, std::size_t num_relations, std::size_t dim)
    : dim_(dim), entity_slot_(num_entities, -1), relation_slot_(num_relations, -1) {}

std::span<double> SparseGradient::entity_row(EntityId e) {
  auto& slot = entity_slot_.at(e);
  if (slot < 0) {
    slot = static_cast<std::int64_t>(entity_ids_.size());
    entity_ids_.push_back(e);
    entity_rows_.resize(entity_rows_.size() + dim_, 0.0);
  }
  return {entity_rows_.data() + static_cast<std::size_t>(slot) * dim_, dim_};
}

std::span<double> SparseGradient::relation_row(RelationId r) {
  auto& slot = relation_slot_.at(r);
  if (slot < 0) {
    slot = static_cast<std::int64_t>(relation_ids_.size());
    relation_ids_.push_back(r);
    relation_rows_.resize(relation_rows_.size() + dim_, 0.0);
  }
  return {relation_rows_.data() + static_cast<std::size_t>(slot) * dim_, dim_};
}

const double* SparseGradient::find_entity(EntityId e) const {
  if (e >= entity_slot_.size() || entity_slot_[e] < 0) return nullptr;
  return entity_rows_.data() + static_cast<std::size_t>(entity_slot_[e]) * dim_;
}

const double* SparseGradient::find_relation(RelationId r) const {
  if (r >= relation_slot_.size() || relation_slot_[r] < 0) return nullptr;
  return relation_rows_.data() + static_cast<std::size_t>(relation_slot_[r]) * dim_;
}

void SparseGradient::clear() {
  for (auto e : entity_ids_) entity_slot_[e] = -1;
  for (auto r : relation_ids_) relation_slot_[r] = -1;
  entity_ids_.clear();
  relation_ids_.clear();
  entity_rows_.clear();
  relation_rows_.clear();
}

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

double l1_row(std::span<const double> params, std::span<double> grad, double l1) {
  double sum = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    sum += std::abs(params[i]);
    grad[i] += l1 * sign(params[i]);
  }
  return l1 * sum;
}

}  // namespace

LossTerms compute_loss_and_gradients(const EmbeddingModel& model, std::span<const LabeledTriple> batch, double l1,
                                     SparseGradient& gradient) {
  if (batch.empty()) throw Error("compute_loss_and_gradients: empty batch");
  if (gradient.dim() != model.dim()) {
    gradient = SparseGradient(model.num_entities(), model.num_relations(), model.dim());
  } else {
    gradient.clear();
  }

  const auto& k = kernels::active();
  const auto layout = model.layout();
  const std::size_t d = model.dim();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> scratch(d);

  LossTerms loss;
  for (const auto& item : batch) {
    const auto& t = item.triple;
    const double l = item.label;
    const double* s = model.entity(t.subject).data();
    const double* o = model.entity(t.object).data();
    const double* m = model.relation_coeffs(t.relation).data();

    const double x = k.bilinear(s, m, o, layout.scalars, layout.blocks);
    const double phi = sigmoid(x);
    const double one_minus_phi = sigmoid(-x);

    double ce = 0.0;
    double dx = 0.0;
    if (l != 0.0) {
      if (phi > kLogClamp) {
        ce -= l * std::log(phi);
        dx -= l * one_minus_phi;
      } else {
        ce -= l * std::log(kLogClamp);
      }
    }
    if (l != 1.0) {
      if (one_minus_phi > kLogClamp) {
        ce -= (1.0 - l) * std::log(one_minus_phi);
        dx += (1.0 - l) * phi;
      } else {
        ce -= (1.0 - l) * std::log(kLogClamp);
      }
    }
    loss.cross_entropy += ce * inv_n;
    const double coeff = dx * inv_n;
    if (coeff == 0.0) {
      // still mark the rows as touched so the regularizer sees them
      gradient.entity_row(t.subject);
      gradient.entity_row(t.object);
      gradient.relation_row(t.relation);
      continue;
    }

    k.apply(m, o, layout.scalars, layout.blocks, scratch.data());
    k.axpy(coeff, scratch.data(), gradient.entity_row(t.subject).data(), d);
    k.apply_transpose(m, s, layout.scalars, layout.blocks, scratch.data());
    k.axpy(coeff, scratch.data(), gradient.entity_row(t.object).data(), d);
    k.relation_grad(coeff, s, o, layout.scalars, layout.blocks, gradient.relation_row(t.relation).data());
  }

  if (l1 > 0.0) {
    for (auto e : gradient.touched_entities()) {
      loss.regularization += l1_row(model.entity(e), gradient.entity_row(e), l1);
    }
    for (auto r : gradient.touched_relations()) {
      loss.regularization += l1_row(model.relation_coeffs(r), gradient.relation_row(r), l1);
    }
  }
  return loss;
}

namespace {

void adam_row(std::span<double> params, std::span<double> m, std::span<double> v, const double* g,
              const AdamParams& adam, double lr, double bias1, double bias2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * g[i];
    v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + adam.epsilon);
  }
}

bool all_finite(const double* row, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(row[i])) return false;
  }
  return true;
}

}  // namespace

void adam_update(EmbeddingModel& model, const SparseGradient& gradient, const TrainConfig& config) {
  const std::size_t d = model.dim();
  for (auto e : gradient.touched_entities()) {
    if (!all_finite(gradient.find_entity(e), d)) throw Error("adam_update: non-finite gradient for entity " + std::to_string(e));
  }
  for (auto r : gradient.touched_relations()) {
    if (!all_finite(gradient.find_relation(r), d)) throw Error("adam_update: non-finite gradient for relation " + std::to_string(r));
  }

  auto& state = model.optimizer();
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(config.adam.beta1, t);
  const double bias2 = 1.0 - std::pow(config.adam.beta2, t);

  for (auto e : gradient.touched_entities()) {
    const std::size_t off = static_cast<std::size_t>(e) * d;
    adam_row(model.entity(e), {state.entity_m.data() + off, d}, {state.entity_v.data() + off, d},
             gradient.find_entity(e), config.adam, config.learning_rate, bias1, bias2);
  }
  for (auto r : gradient.touched_relations()) {
    const std::size_t off = static_cast<std::size_t>(r) * d;
    adam_row(model.relation_coeffs(r), {state.relation_m.data() + off, d}, {state.relation_v.data() + off, d},
             gradient.find_relation(r), config.adam, config.learning_rate, bias1, bias2);
  }
}

EpochStats train_epoch(EmbeddingModel& model, std::span<const LabeledTriple> inputs, const KnowledgeGraph& kg,
                       const TrainConfig& config, Rng& rng) {
  if (inputs.empty()) throw Error("train_epoch: no input triples");
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  SparseGradient gradient(model.num_entities(), model.num_relations(), model.dim());
  std::vector<LabeledTriple> batch;
  EpochStats stats;
  double weighted_loss = 0.0;

  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t end = std::min(order.size(), start + config.batch_size);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) {
      const auto& item = inputs[order[i]];
      batch.push_back(item);
      if (config.negatives > 0 && kg.contains(item.triple)) {
        auto neg = sample_negatives(kg, item.triple, config.negatives, rng);
        if (neg.exhausted) ++stats.short_negative_draws;
        batch.insert(batch.end(), neg.triples.begin(), neg.triples.end());
      }
    }
    const auto loss = compute_loss_and_gradients(model, batch, config.l1, gradient);
    adam_update(model, gradient, config);
    weighted_loss += loss.total() * static_cast<double>(batch.size());
    stats.examples += batch.size();
  }
  stats.mean_loss = weighted_loss / static_cast<double>(stats.examples);
  return stats;
}

}  // namespace itere
