#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "itere/axiom.hpp"
#include "itere/evaluation.hpp"
#include "itere/injection.hpp"
#include "itere/pipeline.hpp"

namespace itere {

using Json = nlohmann::ordered_json;

Json to_json(const RankMetrics& m);
Json to_json(const MetricsReport& report);
Json to_json(const RuleReport& report);
Json to_json(const IterationRecord& record);
IterationRecord record_from_json(const Json& j);

/// One axiom as {type, relations, support, head_size, raw, score[, hc]}.
Json axiom_json(const ScoredAxiom& axiom, const Vocabulary& relations, const double* hc = nullptr);

void write_axioms_jsonl(std::ostream& out, std::span<const ScoredAxiom> axioms, const Vocabulary& relations,
                        std::span<const double> hc = {});
void write_axioms_csv(std::ostream& out, std::span<const ScoredAxiom> axioms, const Vocabulary& relations,
                      std::span<const double> hc = {});

/// subject, relation, object, truth, source count; tab separated, no header.
void write_injected_tsv(std::ostream& out, std::span<const InferredTriple> injected, const Vocabularies& vocab);
/// Source axioms are not recoverable from the TSV; `sources` stays empty.
std::vector<InferredTriple> read_injected_tsv(std::istream& in, const Vocabularies& vocab,
                                              const std::string& source_name = "<injected>");
std::vector<InferredTriple> read_injected_tsv(const std::filesystem::path& path, const Vocabularies& vocab);

/// Flattens nested objects into "a.b.c,value" rows; arrays of objects get an index.
void write_flat_csv(std::ostream& out, const Json& doc);

/// Shortest round-trip decimal text for a double.
std::string format_double(double x);

}  // namespace itere
