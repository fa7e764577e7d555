#include <catch_amalgamated.hpp>

#include <filesystem>

#include "flew/pipeline.hpp"
#include "flew/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace flew;
namespace fs = std::filesystem;
using testing::read_file;
using testing::TempDir;
using testing::write_file;

namespace {
PipelineConfig toy_config(const fs::path& dir) {
  write_file(dir / "papers.jsonl", R"({"id":"A","title":"a","abstract":"First. We propose a."}
{"id":"B","title":"b","abstract":"Second."}
{"id":"C","title":"c","abstract":""}
)");
  write_file(dir / "citations.jsonl", R"({"citing":"A","cited":"B","intent":"background","context_count":1}
{"citing":"A","cited":"C","intent":"method","context_count":2}
{"citing":"B","cited":"C","intent":"background","context_count":3}
)");
  write_file(dir / "flew.conf", "papers = papers.jsonl\ncitations = citations.jsonl\n");
  return load_config(dir / "flew.conf");
}

PipelineConfig small_synthetic(const fs::path& dir) {
  SyntheticSpec spec;
  spec.papers = 120;
  spec.communities = 4;
  spec.task_queries = 12;
  const auto conf = write_synthetic_corpus(generate_synthetic_corpus(spec), dir);
  auto cfg = load_config(conf);
  cfg.encoder_buckets = 4096;
  cfg.encoder_dim = 16;
  cfg.graph.epochs = 4;
  cfg.graph.dim = 16;
  cfg.grid.step = 0.25;
  return cfg;
}
}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(
      "# comment\npapers = p.jsonl\nseed = 9\ntextual_mode = full\ngraph.dim = 8\n"
      "sampler.hard_lo = 10\nsampler.exclude_cited = true\ngrid.step = 0.1\n"
      "tasks.validation = a.jsonl, b.jsonl\ntrain.learning_rate = 0.5\n",
      "/base");
  CHECK(cfg.papers == fs::path("/base/p.jsonl"));
  CHECK(cfg.stage_dir == fs::path("/base/stages"));
  CHECK(cfg.seed == 9);
  CHECK(cfg.textual_mode == TextualMode::full);
  CHECK(cfg.graph.dim == 8);
  CHECK(cfg.sampler.hard_lo == 10);
  CHECK(cfg.sampler.exclude_cited_from_negatives);
  CHECK(cfg.grid.step == 0.1);
  CHECK(cfg.train.learning_rate == 0.5);
  REQUIRE(cfg.validation_tasks.size() == 2);
  CHECK(cfg.validation_tasks[1] == fs::path("/base/b.jsonl"));
  CHECK_THROWS_AS(parse_config("bogus = 1\n", "/"), Error);
  CHECK_THROWS_AS(parse_config("seed = -3\n", "/"), Error);
  CHECK_THROWS_AS(parse_config("graph.margin = abc\n", "/"), Error);
  CHECK_THROWS_AS(parse_config("no equals sign\n", "/"), Error);
}

TEST_CASE("facets stage partitions the toy graph") {
  TempDir dir("toy");
  const auto cfg = toy_config(dir.path());
  run_stage("ingest", cfg);
  const auto m = run_stage("facets", cfg);
  CHECK(m.outputs.size() == 4);
  std::size_t lines = 0;
  for (const char* f : {"background", "method", "result"}) {
    const auto text = read_file(cfg.stage_dir / "facets" / (std::string(f) + ".tsv"));
    lines += static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  }
  CHECK(lines == 3);
}

TEST_CASE("unchanged stages are skipped and changes rerun them") {
  TempDir dir("skip");
  const auto cfg = toy_config(dir.path());
  CHECK_FALSE(run_stage("ingest", cfg).skipped);
  const auto again = run_stage("ingest", cfg);
  CHECK(again.skipped);
  CHECK_FALSE(again.note.empty());
  write_file(dir.path() / "papers.jsonl", read_file(dir.path() / "papers.jsonl") +
                                              "{\"id\":\"D\",\"title\":\"d\",\"abstract\":\"\"}\n");
  CHECK_FALSE(run_stage("ingest", cfg).skipped);
  // A tampered output also forces a rerun.
  write_file(cfg.stage_dir / "corpus/papers.jsonl", "");
  CHECK_FALSE(run_stage("ingest", cfg).skipped);
}

TEST_CASE("missing upstream artifacts name the stage to run first") {
  TempDir dir("missing");
  const auto cfg = toy_config(dir.path());
  try {
    run_stage("facets", cfg);
    FAIL("expected error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "facets");
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("'ingest'"));
  }
  CHECK_THROWS_AS(run_stage("nonsense", cfg), Error);
}

TEST_CASE("missing citations file fails at ingest with its path") {
  TempDir dir("nocites");
  auto cfg = toy_config(dir.path());
  fs::remove(dir.path() / "citations.jsonl");
  try {
    run_all(cfg);
    FAIL("expected error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "ingest");
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("citations.jsonl"));
  }
}

TEST_CASE("end to end on a small synthetic corpus, and the textual ablation") {
  TempDir dir("e2e");
  auto cfg = small_synthetic(dir.path());
  const auto manifests = run_all(cfg);
  REQUIRE(manifests.size() == stage_names().size());
  CHECK(fs::exists(cfg.stage_dir / "results.json"));
  for (const auto& name : stage_names()) CHECK(fs::exists(cfg.stage_dir / "manifests" / (name + ".json")));

  auto full = cfg;
  full.textual_mode = TextualMode::full;
  full.stage_dir = dir.path() / "stages_full";
  const auto full_manifests = run_all(full);
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const auto& a = manifests[i];
    const auto& b = full_manifests[i];
    if (a.stage == "train") {
      for (const char* enc : {"encoders/FLeW-bg.enc", "encoders/FLeW-mt.enc", "encoders/FLeW-rs.enc"}) {
        CHECK(a.outputs.at(enc) != b.outputs.at(enc));
      }
      break;
    }
    CHECK(a.outputs == b.outputs);
  }

  // A full rerun touches nothing.
  for (const auto& m : run_all(cfg)) CHECK(m.skipped);
}
