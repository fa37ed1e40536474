#include "itere/report.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace itere {

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw Error("format_double failed");
  return std::string(buf, end);
}

Json to_json(const RankMetrics& m) {
  return Json{{"mrr", m.mrr},       {"mrr_mean_rank", m.mrr_mean_rank}, {"hits@1", m.hits1},
              {"hits@3", m.hits3}, {"hits@10", m.hits10}};
}

Json to_json(const MetricsReport& report) {
  Json buckets = Json::array();
  for (const auto& b : report.buckets) {
    buckets.push_back({{"lo", b.lo}, {"hi", b.hi}, {"mrr", b.mrr}, {"count", b.count}});
  }
  return Json{{"test_triples", report.test_triples},
              {"axiom_ranked", report.axiom_ranked},
              {"raw", to_json(report.raw)},
              {"filter", to_json(report.filter)},
              {"frequency_buckets", buckets}};
}

Json to_json(const RuleReport& report) {
  Json curve = Json::array();
  for (const auto& p : report.curve) {
    curve.push_back({{"threshold", p.threshold},
                     {"selected_fraction", p.selected_fraction},
                     {"high_quality_coverage", p.high_quality_coverage}});
  }
  return Json{{"hc_threshold", report.hc_threshold},
              {"pool_size", report.pool_size},
              {"high_quality", report.high_quality},
              {"curve", curve}};
}

namespace {

Json type_counts(const TypeCounts& counts) {
  Json j = Json::object();
  for (auto t : kAxiomTypes) j[std::string(type_name(t))] = counts[static_cast<std::size_t>(t)];
  return j;
}

TypeCounts type_counts_from(const Json& j) {
  TypeCounts counts{};
  for (auto t : kAxiomTypes) counts[static_cast<std::size_t>(t)] = j.at(std::string(type_name(t))).get<std::size_t>();
  return counts;
}

RankMetrics metrics_from(const Json& j) {
  RankMetrics m;
  m.mrr = j.at("mrr").get<double>();
  m.mrr_mean_rank = j.at("mrr_mean_rank").get<double>();
  m.hits1 = j.at("hits@1").get<double>();
  m.hits3 = j.at("hits@3").get<double>();
  m.hits10 = j.at("hits@10").get<double>();
  return m;
}

}  // namespace

Json to_json(const IterationRecord& record) {
  Json j{{"iteration", record.iteration},
         {"mean_loss", record.mean_loss},
         {"axioms_above_threshold", type_counts(record.axioms_above_threshold)},
         {"injected_by_type", type_counts(record.injected_by_type)},
         {"injected_total", record.injected_total}};
  j["metrics"] = record.metrics ? to_json(*record.metrics) : Json(nullptr);
  return j;
}

IterationRecord record_from_json(const Json& j) {
  IterationRecord r;
  r.iteration = j.at("iteration").get<std::size_t>();
  r.mean_loss = j.at("mean_loss").get<double>();
  r.axioms_above_threshold = type_counts_from(j.at("axioms_above_threshold"));
  r.injected_by_type = type_counts_from(j.at("injected_by_type"));
  r.injected_total = j.at("injected_total").get<std::size_t>();
  if (const auto& m = j.at("metrics"); !m.is_null()) {
    MetricsReport report;
    report.test_triples = m.at("test_triples").get<std::size_t>();
    report.axiom_ranked = m.at("axiom_ranked").get<std::size_t>();
    report.raw = metrics_from(m.at("raw"));
    report.filter = metrics_from(m.at("filter"));
    for (const auto& b : m.at("frequency_buckets")) {
      report.buckets.push_back({b.at("lo").get<std::size_t>(), b.at("hi").get<std::size_t>(), b.at("mrr").get<double>(),
                                b.at("count").get<std::size_t>()});
    }
    r.metrics = std::move(report);
  }
  return r;
}

Json axiom_json(const ScoredAxiom& axiom, const Vocabulary& relations, const double* hc) {
  Json names = Json::array();
  for (auto r : axiom.axiom.used_relations()) names.push_back(relations.name(r));
  Json j{{"type", std::string(type_name(axiom.axiom.type))},
         {"relations", names},
         {"support", axiom.support},
         {"head_size", axiom.head_size},
         {"raw", axiom.raw},
         {"score", axiom.score}};
  if (hc) j["hc"] = *hc;
  return j;
}

void write_axioms_jsonl(std::ostream& out, std::span<const ScoredAxiom> axioms, const Vocabulary& relations,
                        std::span<const double> hc) {
  for (std::size_t i = 0; i < axioms.size(); ++i) {
    out << axiom_json(axioms[i], relations, hc.empty() ? nullptr : &hc[i]).dump() << '\n';
  }
}

void write_axioms_csv(std::ostream& out, std::span<const ScoredAxiom> axioms, const Vocabulary& relations,
                      std::span<const double> hc) {
  out << "type,relations,support,head_size,raw,score";
  if (!hc.empty()) out << ",hc";
  out << '\n';
  for (std::size_t i = 0; i < axioms.size(); ++i) {
    const auto& a = axioms[i];
    std::string names;
    for (auto r : a.axiom.used_relations()) {
      if (!names.empty()) names += ';';
      names += relations.name(r);
    }
    // relation names may contain commas (Freebase paths do not, but be safe)
    if (names.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : names) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      names = quoted + "\"";
    }
    out << type_name(a.axiom.type) << ',' << names << ',' << a.support << ',' << a.head_size << ','
        << format_double(a.raw) << ',' << format_double(a.score);
    if (!hc.empty()) out << ',' << format_double(hc[i]);
    out << '\n';
  }
}

void write_injected_tsv(std::ostream& out, std::span<const InferredTriple> injected, const Vocabularies& vocab) {
  for (const auto& i : injected) {
    out << vocab.entities.name(i.triple.subject) << '\t' << vocab.relations.name(i.triple.relation) << '\t'
        << vocab.entities.name(i.triple.object) << '\t' << format_double(i.truth) << '\t' << i.sources.size() << '\n';
  }
}

std::vector<InferredTriple> read_injected_tsv(std::istream& in, const Vocabularies& vocab,
                                              const std::string& source_name) {
  std::vector<InferredTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      auto tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (fields.size() != 5) throw ParseError(source_name, line_no, "expected five tab-separated fields");
    auto s = vocab.entities.find(fields[0]);
    auto r = vocab.relations.find(fields[1]);
    auto o = vocab.entities.find(fields[2]);
    if (!s || !r || !o) throw VocabularyError(source_name + ":" + std::to_string(line_no) + ": unknown name");
    double truth = 0.0;
    auto [ptr, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), truth);
    if (ec != std::errc{} || ptr != fields[3].data() + fields[3].size()) {
      throw ParseError(source_name, line_no, "bad truth value");
    }
    out.push_back({{*s, *r, *o}, truth, {}});
  }
  return out;
}

std::vector<InferredTriple> read_injected_tsv(const std::filesystem::path& path, const Vocabularies& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_injected_tsv(in, vocab, path.string());
}

namespace {

void flatten(std::ostream& out, const std::string& prefix, const Json& node) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      flatten(out, prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) flatten(out, prefix + "." + std::to_string(i), node[i]);
  } else if (node.is_string()) {
    out << prefix << ',' << node.get<std::string>() << '\n';
  } else if (node.is_number_float()) {
    out << prefix << ',' << format_double(node.get<double>()) << '\n';
  } else {
    out << prefix << ',' << node.dump() << '\n';
  }
}

}  // namespace

void write_flat_csv(std::ostream& out, const Json& doc) {
  out << "key,value\n";
  flatten(out, "", doc);
}

}  // namespace itere
