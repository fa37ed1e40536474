#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "itere/pipeline.hpp"
#include "itere/report.hpp"
#include "synthetic.hpp"

using namespace itere;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("itere_test_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

// Small and quick; still injects on the synthetic graph.
PipelineConfig quick_config(const fs::path& out) {
  PipelineConfig c = synthetic::recovery_config();
  c.iterations = 3;
  c.train.dim = 8;
  c.train.epochs_per_iteration = 2;
  c.eval_every_iteration = false;
  c.out_dir = out;
  return c;
}

}  // namespace

TEST_CASE("config text parses keys, comments and auto values") {
  std::istringstream in(
      "# comment\n"
      "seed = 9\n"
      "d = 16   # trailing comment\n"
      "\n"
      "scalars = auto\n"
      "lambda = 1e-3\n"
      "k = 4\n"
      "k = auto\n"
      "restrict_to_sparse = no\n"
      "eval_every_iteration = true\n");
  auto c = parse_config(in);
  CHECK(c.seed == 9);
  CHECK(c.train.dim == 16);
  CHECK_FALSE(c.train.scalars.has_value());
  CHECK(c.train.l1 == 1e-3);
  CHECK_FALSE(c.pool.sample_size.has_value());
  CHECK_FALSE(c.injection.restrict_to_sparse);
  CHECK(c.eval_every_iteration);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config errors name the line") {
  std::istringstream unknown("seed = 1\nbogus = 3\n");
  try {
    parse_config(unknown, "cfg.txt");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cfg.txt:2") != std::string::npos);
  }
  std::istringstream bad_number("lr = fast\n");
  CHECK_THROWS_AS(parse_config(bad_number), ConfigError);
  std::istringstream no_equals("seed 1\n");
  CHECK_THROWS_AS(parse_config(no_equals), Error);
}

TEST_CASE("config validation") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.iterations = 1;
  c.hc_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.hc_threshold = 0.5;
  c.train.dim = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("entries round-trip through set") {
  PipelineConfig a;
  a.set("seed", "123");
  a.set("lr", "0.05");
  a.set("theta_score", "0.8");
  a.set("k", "3");
  PipelineConfig b;
  for (const auto& [key, value] : a.entries()) b.set(key, value);
  CHECK(a.entries() == b.entries());
}

TEST_CASE("config file paths resolve against the file's directory") {
  auto dir = fresh_dir("cfgpath");
  {
    std::ofstream f(dir / "run.cfg");
    f << "data = data\nout = /abs/out\n";
  }
  auto c = load_config(dir / "run.cfg");
  CHECK(c.data_dir == dir / "data");
  CHECK(c.out_dir == fs::path("/abs/out"));
}

TEST_CASE("rng streams are independent and reproducible") {
  CHECK(stream_rng(1, 2, RngPhase::Train)() == stream_rng(1, 2, RngPhase::Train)());
  CHECK(stream_rng(1, 2, RngPhase::Train)() != stream_rng(1, 3, RngPhase::Train)());
  CHECK(stream_rng(1, 2, RngPhase::Train)() != stream_rng(1, 2, RngPhase::Pool)());
  CHECK(stream_rng(1, 2, RngPhase::Train)() != stream_rng(2, 2, RngPhase::Train)());
}

TEST_CASE("dataset loading reads splits against the train vocabulary") {
  auto dir = fresh_dir("dataset");
  {
    std::ofstream(dir / "train.txt") << "a\tr\tb\nb\tr\tc\n";
    std::ofstream(dir / "test.txt") << "a\tr\tc\n";
  }
  auto d = load_dataset(dir);
  CHECK(d.train.triples().size() == 2);
  CHECK(d.valid.empty());
  CHECK(d.test.size() == 1);
  std::ofstream(dir / "valid.txt") << "a\tr\tzzz\n";
  CHECK_THROWS_AS(load_dataset(dir), VocabularyError);
  CHECK_THROWS(load_dataset(dir / "missing"));
}

TEST_CASE("identical runs write identical reports") {
  auto g = synthetic::generate();
  auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  run_iterations(quick_config(a), g.data);
  run_iterations(quick_config(b), g.data);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "records.jsonl") == slurp(b / "records.jsonl"));
  CHECK(slurp(a / "ckpt_iter3.bin") == slurp(b / "ckpt_iter3.bin"));
}

TEST_CASE("resuming from a checkpoint matches an uninterrupted run") {
  auto g = synthetic::generate();
  auto full = fresh_dir("resume_full"), part = fresh_dir("resume_part");
  run_iterations(quick_config(full), g.data);

  auto short_cfg = quick_config(part);
  short_cfg.iterations = 2;
  run_iterations(short_cfg, g.data);
  RunOptions opts;
  opts.resume = part / "ckpt_iter2.bin";
  run_iterations(quick_config(part), g.data, opts);

  CHECK(slurp(full / "report.json") == slurp(part / "report.json"));
  CHECK(slurp(full / "records.jsonl") == slurp(part / "records.jsonl"));
  CHECK(slurp(full / "ckpt_iter3.bin") == slurp(part / "ckpt_iter3.bin"));

  RunOptions bad;
  bad.resume = full / "ckpt_iter3.bin";
  auto two = quick_config(fresh_dir("resume_bad"));
  two.iterations = 2;
  CHECK_THROWS_AS(run_iterations(two, g.data, bad), Error);
}

TEST_CASE("union evaluation survives a resume") {
  auto g = synthetic::generate();
  auto full = fresh_dir("union_full"), part = fresh_dir("union_part");
  auto cfg = quick_config(full);
  cfg.axioms_eval_union = true;
  run_iterations(cfg, g.data);

  auto short_cfg = quick_config(part);
  short_cfg.axioms_eval_union = true;
  short_cfg.iterations = 2;
  run_iterations(short_cfg, g.data);
  auto rest = quick_config(part);
  rest.axioms_eval_union = true;
  RunOptions opts;
  opts.resume = part / "ckpt_iter2.bin";
  run_iterations(rest, g.data, opts);
  CHECK(slurp(full / "report.json") == slurp(part / "report.json"));
}

TEST_CASE("score threshold 1 never injects") {
  auto g = synthetic::generate();
  auto out = fresh_dir("noinject");
  auto cfg = quick_config(out);
  cfg.iterations = 1;
  cfg.injection.score_threshold = 1.0;
  auto res = run_iterations(cfg, g.data);
  CHECK(res.injected.empty());
  REQUIRE(res.records.size() == 1);
  CHECK(res.records[0].injected_total == 0);
  CHECK(line_count(out / "injected_iter1.tsv") == 0);
  REQUIRE(res.plain);
  REQUIRE(res.with_axioms);
  CHECK(res.plain->filter.mrr == res.with_axioms->filter.mrr);
}

TEST_CASE("records agree with the dumped files") {
  auto g = synthetic::generate();
  auto out = fresh_dir("records");
  auto cfg = quick_config(out);
  auto res = run_iterations(cfg, g.data);
  REQUIRE(res.records.size() == cfg.iterations);
  for (const auto& r : res.records) {
    const auto path = out / ("injected_iter" + std::to_string(r.iteration) + ".tsv");
    CHECK(line_count(path) == r.injected_total);
    std::size_t by_type = 0;
    for (auto n : r.injected_by_type) by_type += n;
    CHECK(by_type == r.injected_total);
  }
  CHECK(line_count(out / "records.jsonl") == cfg.iterations);
  CHECK(line_count(out / "axioms.jsonl") == res.pool.size());
  for (const char* f : {"report.json", "report.csv", "axioms.csv", "ckpt_iter1.bin", "ckpt_iter3.bin"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  auto report = Json::parse(slurp(out / "report.json"));
  CHECK(report.at("iterations").size() == cfg.iterations);
  CHECK(report.at("injected_final").get<std::size_t>() == res.injected.size());

  std::ifstream rec(out / "records.jsonl");
  std::string line;
  for (const auto& r : res.records) {
    REQUIRE(std::getline(rec, line));
    CHECK(to_json(record_from_json(Json::parse(line))) == to_json(r));
  }
}

TEST_CASE("planted axiom types inject on the synthetic graph") {
  auto g = synthetic::generate();
  auto cfg = synthetic::recovery_config();
  cfg.iterations = 5;
  cfg.eval_every_iteration = false;
  auto res = run_iterations(cfg, g.data, RunOptions{.resume = std::nullopt, .write_outputs = false});
  const auto& last = res.records.back().injected_by_type;
  const std::size_t planted = last[static_cast<std::size_t>(AxiomType::Inverse)] +
                              last[static_cast<std::size_t>(AxiomType::SubPropertyChain)];
  CHECK(planted > 0);
}

TEST_CASE("run errors surface before training") {
  Dataset empty;
  PipelineConfig cfg;
  cfg.out_dir = fresh_dir("errors");
  CHECK_THROWS_AS(run_iterations(cfg, empty), Error);
  cfg.iterations = 0;
  auto g = synthetic::generate();
  CHECK_THROWS_AS(run_iterations(cfg, g.data), ConfigError);
}
