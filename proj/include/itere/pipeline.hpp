#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "itere/axiom.hpp"
#include "itere/embedding.hpp"
#include "itere/evaluation.hpp"
#include "itere/injection.hpp"
#include "itere/kg_store.hpp"

namespace itere {

/// Thrown for invalid configuration before any training starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct PipelineConfig {
  std::filesystem::path data_dir;
  std::filesystem::path out_dir;
  std::uint64_t seed = 42;
  std::size_t iterations = 10;
  TrainConfig train;
  PoolConfig pool;
  InjectionConfig injection;
  double hc_threshold = kDefaultHcThreshold;
  bool eval_every_iteration = false;
  bool axioms_eval_union = false;      // evaluate +axioms with the union over iterations
  bool axioms_eval_prefilter = false;  // evaluate +axioms with heads before the sparse filter

  void validate() const;

  /// Sets one key from its text form. Throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  /// Flat key -> text view of every setting, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Reads `key = value` lines; blank lines and `#` comments are ignored.
PipelineConfig parse_config(std::istream& in, const std::string& source_name = "<config>");
PipelineConfig load_config(const std::filesystem::path& path);

struct Dataset {
  Vocabularies vocab;
  KnowledgeGraph train;
  std::vector<Triple> valid, test;
};

/// Loads train.txt, then valid.txt and test.txt against the train vocabulary.
/// Missing valid/test files are treated as empty.
Dataset load_dataset(const std::filesystem::path& dir);

enum class RngPhase : std::uint64_t { Init = 1, Pool = 2, Train = 3 };

/// Independent stream for (seed, iteration, phase); a resumed run reproduces it.
Rng stream_rng(std::uint64_t seed, std::uint64_t iteration, RngPhase phase);

using TypeCounts = std::array<std::size_t, kAxiomTypes.size()>;

struct IterationRecord {
  std::size_t iteration = 0;
  double mean_loss = 0.0;
  TypeCounts axioms_above_threshold{};
  TypeCounts injected_by_type{};  // attributed to the best-scoring source axiom
  std::size_t injected_total = 0;
  std::optional<MetricsReport> metrics;
};

struct PipelineResult {
  EmbeddingModel model;
  std::vector<PoolEntry> pool;
  std::vector<IterationRecord> records;
  std::vector<ScoredAxiom> axioms;
  std::vector<InferredTriple> injected;       // final iteration
  std::vector<InferredTriple> eval_injected;  // set used for the +axioms evaluation
  std::optional<MetricsReport> plain, with_axioms;
  RuleReport rules;
};

struct RunOptions {
  std::optional<std::filesystem::path> resume;
  bool write_outputs = true;  // needs config.out_dir
};

/// Trains, induces and injects for `config.iterations` rounds, then evaluates.
/// With outputs enabled writes ckpt_iterN.bin, injected_iterN.tsv, records.jsonl,
/// axioms.jsonl / axioms.csv, report.json and report.csv under out_dir.
PipelineResult run_iterations(const PipelineConfig& config, const Dataset& data, const RunOptions& options = {});

}  // namespace itere
