#include "itere/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "itere/checkpoint.hpp"
#include "itere/report.hpp"

namespace itere {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError("invalid value for " + key + ": '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + value + "'");
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

void PipelineConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (!(hc_threshold >= 0.0 && hc_threshold <= 1.0)) throw ConfigError("hc_threshold must lie in [0, 1]");
  try {
    train.validate();
    pool.validate();
    injection.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void PipelineConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  auto size = [&] { return parse_number<std::size_t>(key, value); };
  auto real = [&] { return parse_number<double>(key, value); };
  if (key == "data") data_dir = value;
  else if (key == "out") out_dir = value;
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "d") train.dim = size();
  else if (key == "scalars") train.scalars = value == "auto" ? std::nullopt : std::optional<std::size_t>(size());
  else if (key == "negatives") train.negatives = size();
  else if (key == "lambda") train.l1 = real();
  else if (key == "lr") train.learning_rate = real();
  else if (key == "batch_size") train.batch_size = size();
  else if (key == "epochs") train.epochs_per_iteration = size();
  else if (key == "iterations") iterations = size();
  else if (key == "beta1") train.adam.beta1 = real();
  else if (key == "beta2") train.adam.beta2 = real();
  else if (key == "epsilon") train.adam.epsilon = real();
  else if (key == "p") pool.min_probability = real();
  else if (key == "t") pool.including_probability = real();
  else if (key == "k") pool.sample_size = value == "auto" ? std::nullopt : std::optional<std::size_t>(size());
  else if (key == "theta_score") injection.score_threshold = real();
  else if (key == "m") injection.max_inferred = size();
  else if (key == "theta_sparsity") injection.sparsity_threshold = real();
  else if (key == "restrict_to_sparse") injection.restrict_to_sparse = parse_bool(key, value);
  else if (key == "hc_threshold") hc_threshold = real();
  else if (key == "eval_every_iteration") eval_every_iteration = parse_bool(key, value);
  else if (key == "axioms_eval_union") axioms_eval_union = parse_bool(key, value);
  else if (key == "axioms_eval_prefilter") axioms_eval_prefilter = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
  auto num = [](auto x) {
    if constexpr (std::is_floating_point_v<decltype(x)>) {
      return format_double(x);
    } else {
      return std::to_string(x);
    }
  };
  return {
      {"data", data_dir.string()},
      {"out", out_dir.string()},
      {"seed", num(seed)},
      {"d", num(train.dim)},
      {"scalars", train.scalars ? num(*train.scalars) : "auto"},
      {"negatives", num(train.negatives)},
      {"lambda", num(train.l1)},
      {"lr", num(train.learning_rate)},
      {"batch_size", num(train.batch_size)},
      {"epochs", num(train.epochs_per_iteration)},
      {"iterations", num(iterations)},
      {"beta1", num(train.adam.beta1)},
      {"beta2", num(train.adam.beta2)},
      {"epsilon", num(train.adam.epsilon)},
      {"p", num(pool.min_probability)},
      {"t", num(pool.including_probability)},
      {"k", pool.sample_size ? num(*pool.sample_size) : "auto"},
      {"theta_score", num(injection.score_threshold)},
      {"m", num(injection.max_inferred)},
      {"theta_sparsity", num(injection.sparsity_threshold)},
      {"restrict_to_sparse", bool_text(injection.restrict_to_sparse)},
      {"hc_threshold", num(hc_threshold)},
      {"eval_every_iteration", bool_text(eval_every_iteration)},
      {"axioms_eval_union", bool_text(axioms_eval_union)},
      {"axioms_eval_prefilter", bool_text(axioms_eval_prefilter)},
  };
}

PipelineConfig parse_config(std::istream& in, const std::string& source_name) {
  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(source_name, line_no, "expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    try {
      config.set(key, body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  auto config = parse_config(in, path.string());
  // relative paths in a config file are taken from the file's directory
  const auto base = path.parent_path();
  if (!config.data_dir.empty() && config.data_dir.is_relative()) config.data_dir = base / config.data_dir;
  if (!config.out_dir.empty() && config.out_dir.is_relative()) config.out_dir = base / config.out_dir;
  return config;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto train_path = dir / "train.txt";
  if (!std::filesystem::exists(train_path)) throw Error("missing " + train_path.string());
  auto train = load_triples(train_path);
  Dataset data;
  data.vocab = std::move(train.vocab);
  data.train = build_graph(train.triples, data.vocab.entities.size(), data.vocab.relations.size());
  auto split = [&](const char* name) {
    const auto p = dir / name;
    if (!std::filesystem::exists(p)) return std::vector<Triple>{};
    return load_triples(p, &data.vocab).triples;
  };
  data.valid = split("valid.txt");
  data.test = split("test.txt");
  return data;
}

Rng stream_rng(std::uint64_t seed, std::uint64_t iteration, RngPhase phase) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed);
  h = mix(h ^ iteration);
  h = mix(h ^ static_cast<std::uint64_t>(phase));
  return Rng(h);
}

namespace {

std::filesystem::path iter_file(const std::filesystem::path& dir, const char* stem, std::size_t it, const char* ext) {
  return dir / (std::string(stem) + std::to_string(it) + ext);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<IterationRecord> read_records(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path);
  if (!in) throw Error("cannot resume: missing " + path.string());
  std::vector<IterationRecord> records;
  std::string line;
  while (records.size() < count && std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(record_from_json(Json::parse(line)));
  }
  if (records.size() < count) throw Error("cannot resume: " + path.string() + " has fewer records than the checkpoint");
  return records;
}

// Keeps the larger truth for triples present in both.
void merge_max(std::vector<InferredTriple>& into, std::span<const InferredTriple> more) {
  std::map<Triple, InferredTriple> merged;
  for (const auto& i : into) merged.emplace(i.triple, i);
  for (const auto& i : more) {
    auto [it, inserted] = merged.emplace(i.triple, i);
    if (!inserted && i.truth > it->second.truth) it->second = i;
  }
  into.clear();
  for (auto& [t, i] : merged) into.push_back(std::move(i));
}

}  // namespace

PipelineResult run_iterations(const PipelineConfig& config, const Dataset& data, const RunOptions& options) {
  config.validate();
  if (data.train.empty()) throw Error("training graph is empty");
  const auto& kg = data.train;
  const auto& out = config.out_dir;
  if (options.write_outputs) {
    if (out.empty()) throw ConfigError("no output directory configured");
    std::filesystem::create_directories(out);
  }

  TrainConfig train = config.train;
  train.seed = stream_rng(config.seed, 0, RngPhase::Init)();

  PipelineResult result;
  {
    auto rng = stream_rng(config.seed, 0, RngPhase::Pool);
    result.pool = generate_pool(kg, config.pool, rng);
  }
  const auto sparse = sparse_entities(entity_sparsity(kg), config.injection.sparsity_threshold);
  InjectionConfig eval_injection = config.injection;
  if (config.axioms_eval_prefilter) eval_injection.restrict_to_sparse = false;

  std::size_t first = 1;
  std::vector<InferredTriple> eval_union;
  if (options.resume) {
    auto ckpt = load_checkpoint(*options.resume, ExpectedShape{train.layout(), kg.num_entities(), kg.num_relations()});
    if (ckpt.iteration < 1 || ckpt.iteration > config.iterations) {
      throw Error("checkpoint iteration " + std::to_string(ckpt.iteration) + " is outside the configured run");
    }
    result.model = std::move(ckpt.model);
    first = ckpt.iteration + 1;
    if (options.write_outputs) {
      result.records = read_records(out / "records.jsonl", ckpt.iteration);
      if (config.axioms_eval_union) {
        const char* stem = config.axioms_eval_prefilter ? "eval_injected_iter" : "injected_iter";
        for (std::size_t it = 1; it < ckpt.iteration; ++it) {
          merge_max(eval_union, read_injected_tsv(iter_file(out, stem, it, ".tsv"), data.vocab));
        }
      }
    }
    // the checkpoint holds the model after training; induction and injection are
    // pure functions of it, so redoing them reproduces the uninterrupted state
    result.axioms = induce_axioms(result.model, result.pool);
    result.injected = inject_triples(kg, result.axioms, sparse, config.injection);
    result.eval_injected = config.axioms_eval_prefilter
                               ? inject_triples(kg, result.axioms, sparse, eval_injection)
                               : result.injected;
    if (config.axioms_eval_union) merge_max(eval_union, result.eval_injected);
  } else {
    result.model = init_model(kg.num_entities(), kg.num_relations(), train);
  }

  std::optional<EvaluationSplits> splits;
  auto evaluation_splits = [&]() -> const EvaluationSplits& {
    if (!splits) splits = make_evaluation_splits(kg, data.valid, data.test);
    return *splits;
  };

  std::vector<LabeledTriple> inputs;
  for (std::size_t it = first; it <= config.iterations; ++it) {
    inputs.clear();
    for (const auto& t : kg.triples()) inputs.push_back({t, 1.0});
    for (const auto& i : result.injected) inputs.push_back({i.triple, i.truth});

    auto rng = stream_rng(config.seed, it, RngPhase::Train);
    IterationRecord record;
    record.iteration = it;
    for (std::size_t e = 0; e < train.epochs_per_iteration; ++e) {
      record.mean_loss += train_epoch(result.model, inputs, kg, train, rng).mean_loss;
    }
    if (train.epochs_per_iteration) record.mean_loss /= static_cast<double>(train.epochs_per_iteration);

    result.axioms = induce_axioms(result.model, result.pool);
    result.injected = inject_triples(kg, result.axioms, sparse, config.injection);
    result.eval_injected = config.axioms_eval_prefilter
                               ? inject_triples(kg, result.axioms, sparse, eval_injection)
                               : result.injected;
    if (config.axioms_eval_union) merge_max(eval_union, result.eval_injected);

    for (const auto& a : result.axioms) {
      if (a.score > config.injection.score_threshold) ++record.axioms_above_threshold[static_cast<std::size_t>(a.axiom.type)];
    }
    for (const auto& i : result.injected) ++record.injected_by_type[static_cast<std::size_t>(i.sources.front().type)];
    record.injected_total = result.injected.size();
    if (config.eval_every_iteration && !data.test.empty()) {
      record.metrics = link_prediction(result.model, evaluation_splits(), data.test);
    }
    result.records.push_back(std::move(record));

    if (options.write_outputs) {
      save_checkpoint(iter_file(out, "ckpt_iter", it, ".bin"), result.model, it);
      std::ostringstream tsv;
      write_injected_tsv(tsv, result.injected, data.vocab);
      write_text(iter_file(out, "injected_iter", it, ".tsv"), tsv.str());
      if (config.axioms_eval_prefilter) {
        std::ostringstream eval_tsv;
        write_injected_tsv(eval_tsv, result.eval_injected, data.vocab);
        write_text(iter_file(out, "eval_injected_iter", it, ".tsv"), eval_tsv.str());
      }
      std::ostringstream lines;
      for (const auto& r : result.records) lines << to_json(r).dump() << '\n';
      write_text(out / "records.jsonl", lines.str());
    }
  }
  if (config.axioms_eval_union) result.eval_injected = eval_union;

  if (!data.test.empty()) {
    result.plain = link_prediction(result.model, evaluation_splits(), data.test);
    result.with_axioms = link_prediction_with_axioms(result.model, evaluation_splits(), data.test, result.eval_injected);
  }
  const auto grid = default_score_grid();
  result.rules = summarize_rules(kg, result.axioms, config.hc_threshold, grid);

  if (options.write_outputs) {
    std::ostringstream jsonl, csv;
    write_axioms_jsonl(jsonl, result.axioms, data.vocab.relations, result.rules.head_coverage);
    write_axioms_csv(csv, result.axioms, data.vocab.relations, result.rules.head_coverage);
    write_text(out / "axioms.jsonl", jsonl.str());
    write_text(out / "axioms.csv", csv.str());

    Json report;
    Json cfg = Json::object();
    for (const auto& [k, v] : config.entries()) {
      if (k != "data" && k != "out") cfg[k] = v;
    }
    report["config"] = cfg;
    report["dataset"] = {{"entities", kg.num_entities()},
                         {"relations", kg.num_relations()},
                         {"train", kg.size()},
                         {"valid", data.valid.size()},
                         {"test", data.test.size()},
                         {"sparse_entities", sparse.size()}};
    report["pool_size"] = result.pool.size();
    report["injected_final"] = result.injected.size();
    report["injected_eval"] = result.eval_injected.size();
    report["plain"] = result.plain ? to_json(*result.plain) : Json(nullptr);
    report["with_axioms"] = result.with_axioms ? to_json(*result.with_axioms) : Json(nullptr);
    report["rules"] = to_json(result.rules);
    Json records = Json::array();
    for (const auto& r : result.records) records.push_back(to_json(r));
    report["iterations"] = records;
    write_text(out / "report.json", report.dump(2) + "\n");
    std::ostringstream flat;
    write_flat_csv(flat, report);
    write_text(out / "report.csv", flat.str());
  }
  return result;
}

}  // namespace itere
