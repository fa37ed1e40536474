#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "itere/axiom.hpp"
#include "itere/checkpoint.hpp"
#include "itere/evaluation.hpp"
#include "itere/kg_store.hpp"
#include "itere/pipeline.hpp"
#include "itere/report.hpp"

namespace fs = std::filesystem;
using namespace itere;

namespace {

void apply_overrides(PipelineConfig& config, const std::vector<std::string>& overrides) {
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

bool same_dir(const fs::path& a, const fs::path& b) {
  std::error_code ec;
  return fs::exists(b) && fs::equivalent(a, b, ec);
}

EmbeddingModel load_model_for(const fs::path& ckpt, const Dataset& data) {
  auto loaded = load_checkpoint(ckpt);
  const auto& m = loaded.model;
  if (m.num_entities() != data.vocab.entities.size() || m.num_relations() != data.vocab.relations.size()) {
    throw Error(ckpt.string() + " holds " + std::to_string(m.num_entities()) + " entities and " +
                std::to_string(m.num_relations()) + " relations; the dataset has " +
                std::to_string(data.vocab.entities.size()) + " and " + std::to_string(data.vocab.relations.size()));
  }
  return std::move(loaded.model);
}

int cmd_sparsify(const fs::path& data_dir, double theta, const fs::path& out_dir) {
  if (same_dir(data_dir, out_dir)) throw Error("--out must differ from --data; input files are never rewritten");
  auto data = load_dataset(data_dir);
  const auto table = entity_sparsity(data.train);
  const auto valid = sparsify_eval_split(table, data.valid, theta);
  const auto test = sparsify_eval_split(table, data.test, theta);
  fs::create_directories(out_dir);
  {
    auto out = open_out(out_dir / "train.txt");
    write_triples(out, data.train.triples(), data.vocab);
  }
  {
    auto out = open_out(out_dir / "valid.txt");
    write_triples(out, valid, data.vocab);
  }
  {
    auto out = open_out(out_dir / "test.txt");
    write_triples(out, test, data.vocab);
  }
  std::cout << "sparse entities: " << sparse_entities(table, theta).size() << " of " << data.vocab.entities.size()
            << "\nvalid: " << valid.size() << " of " << data.valid.size() << "\ntest: " << test.size() << " of "
            << data.test.size() << '\n';
  return 0;
}

int cmd_train(const fs::path& config_path, const std::vector<std::string>& overrides, const std::string& resume) {
  auto config = load_config(config_path);
  apply_overrides(config, overrides);
  config.validate();
  if (config.data_dir.empty()) throw ConfigError("no data directory configured");
  if (config.out_dir.empty()) throw ConfigError("no output directory configured");
  auto data = load_dataset(config.data_dir);
  RunOptions options;
  if (!resume.empty()) options.resume = fs::path(resume);
  auto result = run_iterations(config, data, options);
  for (const auto& r : result.records) {
    std::cout << "iteration " << r.iteration << "  loss " << format_double(r.mean_loss) << "  injected "
              << r.injected_total;
    if (r.metrics) std::cout << "  filter mrr " << format_double(r.metrics->filter.mrr);
    std::cout << '\n';
  }
  if (result.plain) std::cout << "plain filter mrr " << format_double(result.plain->filter.mrr) << '\n';
  if (result.with_axioms) std::cout << "+axioms filter mrr " << format_double(result.with_axioms->filter.mrr) << '\n';
  std::cout << "outputs in " << config.out_dir.string() << '\n';
  return 0;
}

int cmd_rules(const fs::path& ckpt, const fs::path& data_dir, const fs::path& out_path, const std::string& config_path,
              const std::vector<std::string>& overrides) {
  PipelineConfig config;
  if (!config_path.empty()) config = load_config(config_path);
  apply_overrides(config, overrides);
  config.validate();
  auto data = load_dataset(data_dir);
  auto model = load_model_for(ckpt, data);
  // same pool stream as the training run with this seed
  auto rng = stream_rng(config.seed, 0, RngPhase::Pool);
  const auto pool = generate_pool(data.train, config.pool, rng);
  const auto axioms = induce_axioms(model, pool);
  const auto rules = summarize_rules(data.train, axioms, config.hc_threshold, default_score_grid());
  auto out = open_out(out_path);
  if (out_path.extension() == ".csv") {
    write_axioms_csv(out, axioms, data.vocab.relations, rules.head_coverage);
  } else {
    write_axioms_jsonl(out, axioms, data.vocab.relations, rules.head_coverage);
  }
  std::cout << to_json(rules).dump(2) << '\n';
  return 0;
}

int cmd_eval(const fs::path& ckpt, const fs::path& data_dir, const std::string& with_axioms, const std::string& out) {
  auto data = load_dataset(data_dir);
  if (data.test.empty()) throw Error("no test triples in " + data_dir.string());
  auto model = load_model_for(ckpt, data);
  const auto splits = make_evaluation_splits(data.train, data.valid, data.test);
  MetricsReport report;
  if (with_axioms.empty()) {
    report = link_prediction(model, splits, data.test);
  } else {
    const auto injected = read_injected_tsv(fs::path(with_axioms), data.vocab);
    report = link_prediction_with_axioms(model, splits, data.test, injected);
  }
  const auto text = to_json(report).dump(2);
  if (out.empty()) {
    std::cout << text << '\n';
  } else {
    auto f = open_out(out);
    f << text << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative embedding and axiom learning for knowledge graphs"};
  app.require_subcommand(1);

  std::string data_dir, out_dir, config_path, resume, ckpt, out_file, with_axioms;
  std::vector<std::string> overrides;
  double theta = 0.995;

  auto* sparsify = app.add_subcommand("sparsify", "Keep valid/test triples that touch a sparse entity");
  sparsify->add_option("--data", data_dir, "dataset directory with train/valid/test.txt")->required();
  sparsify->add_option("--theta", theta, "sparsity threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  sparsify->add_option("--out", out_dir, "output dataset directory")->required();

  auto* train = app.add_subcommand("train", "Run the iterative training loop");
  train->add_option("--config", config_path, "config file (key = value)")->required()->check(CLI::ExistingFile);
  train->add_option("--resume", resume, "checkpoint to resume from")->check(CLI::ExistingFile);
  train->add_option("--set", overrides, "override a config key, key=value");

  auto* rules = app.add_subcommand("rules", "Score the axiom pool with a trained model");
  rules->add_option("--ckpt", ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  rules->add_option("--data", data_dir, "dataset directory")->required();
  rules->add_option("--out", out_file, "output file (.csv or .jsonl)")->required();
  rules->add_option("--config", config_path, "config for seed and pool settings")->check(CLI::ExistingFile);
  rules->add_option("--set", overrides, "override a config key, key=value");

  auto* eval = app.add_subcommand("eval", "Link prediction metrics for a checkpoint");
  eval->add_option("--ckpt", ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data_dir, "dataset directory")->required();
  eval->add_option("--with-axioms", with_axioms, "injected triples TSV")->check(CLI::ExistingFile);
  eval->add_option("--out", out_file, "write the report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sparsify) return cmd_sparsify(data_dir, theta, out_dir);
    if (*train) return cmd_train(config_path, overrides, resume);
    if (*rules) return cmd_rules(ckpt, data_dir, out_file, config_path, overrides);
    if (*eval) return cmd_eval(ckpt, data_dir, with_axioms, out_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
