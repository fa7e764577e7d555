#include "flew/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "flew/binary_io.hpp"
#include "flew/rng.hpp"
#include "json.hpp"

namespace flew {

namespace fs = std::filesystem;
using nlohmann::json;

// Config ----------------------------------------------------------------------

namespace {

std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw Error("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw Error("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return std::stoull(v);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<fs::path> to_paths(const std::string& v, const fs::path& base) {
  std::vector<fs::path> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim_copy(item);
    if (!item.empty()) out.push_back(base / item);
  }
  return out;
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  PipelineConfig cfg;
  cfg.stage_dir = base_dir / "stages";
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim_copy(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim_copy(line.substr(0, eq));
    const std::string v = trim_copy(line.substr(eq + 1));

    if (key == "papers") cfg.papers = base_dir / v;
    else if (key == "citations") cfg.citations = base_dir / v;
    else if (key == "stage_dir") cfg.stage_dir = base_dir / v;
    else if (key == "tasks.validation") cfg.validation_tasks = to_paths(v, base_dir);
    else if (key == "tasks.test") cfg.test_tasks = to_paths(v, base_dir);
    else if (key == "seed") cfg.seed = to_uint(key, v);
    else if (key == "textual_mode") cfg.textual_mode = parse_textual_mode(v);
    else if (key == "graph.dim") cfg.graph.dim = to_uint(key, v);
    else if (key == "graph.epochs") cfg.graph.epochs = to_uint(key, v);
    else if (key == "graph.learning_rate") cfg.graph.learning_rate = to_double(key, v);
    else if (key == "graph.negatives_per_edge") cfg.graph.negatives_per_edge = to_uint(key, v);
    else if (key == "graph.margin") cfg.graph.margin = to_double(key, v);
    else if (key == "sampler.k_pos") cfg.sampler.k_pos = to_uint(key, v);
    else if (key == "sampler.hard_lo") cfg.sampler.hard_lo = to_uint(key, v);
    else if (key == "sampler.hard_hi") cfg.sampler.hard_hi = to_uint(key, v);
    else if (key == "sampler.triplets_per_query") cfg.sampler.triplets_per_query = to_uint(key, v);
    else if (key == "sampler.hard_fraction") cfg.sampler.hard_fraction = to_double(key, v);
    else if (key == "sampler.exclude_cited") cfg.sampler.exclude_cited_from_negatives = to_bool(key, v);
    else if (key == "sampler.max_redraws") cfg.sampler.max_redraws = to_uint(key, v);
    else if (key == "train.learning_rate") cfg.train.learning_rate = to_double(key, v);
    else if (key == "train.batch_size") cfg.train.batch_size = to_uint(key, v);
    else if (key == "train.epochs") cfg.train.epochs = to_uint(key, v);
    else if (key == "train.margin") cfg.train.margin = to_double(key, v);
    else if (key == "encoder.buckets") cfg.encoder_buckets = to_uint(key, v);
    else if (key == "encoder.dim") cfg.encoder_dim = to_uint(key, v);
    else if (key == "encoder.init_scale") cfg.encoder_init_scale = to_double(key, v);
    else if (key == "grid.step") cfg.grid.step = to_double(key, v);
    else if (key == "combine.normalize") cfg.combine.normalize_facets = to_bool(key, v);
    else if (key == "splitter.fallback") cfg.splitter_fallback = to_bool(key, v);
    else if (key == "llm.endpoint") cfg.llm.endpoint = v;
    else if (key == "llm.model") cfg.llm.model = v;
    else if (key == "llm.timeout_ms") cfg.llm.timeout_ms = static_cast<int>(to_uint(key, v));
    else if (key == "llm.retries") cfg.llm.retries = static_cast<int>(to_uint(key, v));
    else if (key == "llm.max_in_flight") cfg.llm_max_in_flight = to_uint(key, v);
    else throw Error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  cfg.llm = cfg.llm.with_env_overrides();
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error("config file not found: " + path.string());
  return parse_config(io::read_text_file(path), fs::absolute(path).parent_path());
}

// Stages ----------------------------------------------------------------------

namespace {

struct InputSpec {
  fs::path path;
  std::string producer;  // empty: external input
  std::string key;       // name recorded in the manifest
};

struct StageDef {
  std::string name;
  std::function<std::vector<InputSpec>(const PipelineConfig&)> inputs;
  std::function<std::string(const PipelineConfig&)> config_text;
  /// Runs the stage and returns the stage-dir relative output paths.
  std::function<std::vector<std::string>(const PipelineConfig&)> run;
};

InputSpec internal(const PipelineConfig& cfg, const std::string& rel, const std::string& producer) {
  return {cfg.stage_dir / rel, producer, rel};
}

InputSpec external(const fs::path& p) { return {p, "", fs::absolute(p).lexically_normal().string()}; }

std::string facet_file(Facet f, std::string_view dir, std::string_view ext) {
  return std::string(dir) + "/" + std::string(to_string(f)) + std::string(ext);
}

std::string encoder_file(Facet f) { return "encoders/FLeW-" + std::string(short_name(f)) + ".enc"; }
std::string vector_file(std::string_view tag) { return "embeddings/" + std::string(tag) + ".vec"; }

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  return in;
}

template <typename Writer>
void write_file(const fs::path& p, Writer&& writer) {
  std::ostringstream out(std::ios::binary);
  writer(out);
  io::write_text_file(p, out.str());
}

std::string canonical(std::initializer_list<std::pair<std::string_view, std::string>> items) {
  std::string out;
  for (const auto& [k, v] : items) out += std::string(k) + "=" + v + "\n";
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::uint64_t graph_seed(const PipelineConfig& c) { return derive_seed(c.seed, "graph"); }
std::uint64_t sampler_seed(const PipelineConfig& c) { return derive_seed(c.seed, "sampler"); }
std::uint64_t encoder_seed(const PipelineConfig& c) { return derive_seed(c.seed, "encoder-base"); }
std::uint64_t train_seed(const PipelineConfig& c, Facet f) {
  return derive_seed(c.seed, "train-" + std::string(short_name(f)));
}

PaperStore load_papers(const PipelineConfig& cfg) {
  auto in = open_in(cfg.stage_dir / "corpus/papers.jsonl");
  auto result = ingest_papers(in);
  if (!result.errors.empty()) throw Error("canonical papers file is corrupt");
  return std::move(result.store);
}

std::vector<ValidationTask> load_tasks(const std::vector<fs::path>& paths) {
  std::vector<ValidationTask> tasks;
  std::set<std::string> names;
  for (const auto& p : paths) {
    auto in = open_in(p);
    tasks.push_back(read_task(in));
    if (!names.insert(tasks.back().name).second) {
      throw Error("duplicate task name '" + tasks.back().name + "'");
    }
  }
  return tasks;
}

std::string task_name_of(const fs::path& p) {
  auto in = open_in(p);
  std::string header;
  std::getline(in, header);
  return json::parse(header).value("name", std::string("task"));
}

FacetVectorMap load_facet_vectors(const PipelineConfig& cfg) {
  std::array<EmbeddingMap, 3> maps;
  for (Facet f : kFacets) {
    auto in = open_in(cfg.stage_dir / vector_file(short_name(f)));
    maps[index_of(f)] = read_vectors(in);
  }
  FacetVectorMap out;
  for (const auto& [id, v] : maps[0]) {
    auto mt = maps[1].find(id);
    auto rs = maps[2].find(id);
    if (mt == maps[1].end() || rs == maps[2].end()) throw Error("facet vector files disagree on ids");
    out.emplace(id, FacetEmbeddings{v, mt->second, rs->second});
  }
  return out;
}

// -- ingest
std::vector<std::string> run_ingest(const PipelineConfig& cfg) {
  auto papers_in = open_in(cfg.papers);
  auto papers = ingest_papers(papers_in);
  if (papers.store.empty()) throw Error("no valid papers in " + cfg.papers.string());
  auto cites_in = open_in(cfg.citations);
  auto cites = ingest_citations(cites_in, papers.store);

  write_file(cfg.stage_dir / "corpus/papers.jsonl", [&](auto& o) { write_papers_jsonl(o, papers.store); });
  write_file(cfg.stage_dir / "corpus/citations.jsonl", [&](auto& o) { write_citations_jsonl(o, cites.graph); });
  write_file(cfg.stage_dir / "corpus/ingest_report.txt", [&](auto& o) {
    o << "papers " << papers.store.size() << " accepted, " << papers.errors.size() << " rejected\n";
    for (const auto& e : papers.errors) o << "papers.jsonl:" << e.line << ": " << e.message << '\n';
    o << "citations " << cites.graph.edges.size() << " edges, " << cites.errors.size() << " rejected\n";
    for (const auto& e : cites.errors) o << "citations.jsonl:" << e.line << ": " << e.message << '\n';
  });
  return {"corpus/papers.jsonl", "corpus/citations.jsonl", "corpus/ingest_report.txt"};
}

// -- facets
std::vector<std::string> run_facets(const PipelineConfig& cfg) {
  const PaperStore papers = load_papers(cfg);
  auto in = open_in(cfg.stage_dir / "corpus/citations.jsonl");
  auto cites = ingest_citations(in, papers);
  if (!cites.errors.empty()) throw Error("canonical citations file is corrupt");
  std::vector<std::string> outputs;
  json stats = json::object();
  for (Facet f : kFacets) {
    const auto sub = extract_facet_subgraph(cites.graph, f);
    const auto rel = facet_file(f, "facets", ".tsv");
    write_file(cfg.stage_dir / rel, [&](auto& o) { write_subgraph_dump(o, sub); });
    outputs.push_back(rel);
    const auto s = facet_stats(sub);
    stats[std::string(to_string(f))] = {{"nodes", s.node_count}, {"edges", s.edge_count},
                                        {"total_weight", s.total_weight}, {"isolated", s.isolated_count}};
  }
  io::write_text_file(cfg.stage_dir / "facets/stats.json", stats.dump(2) + "\n");
  outputs.push_back("facets/stats.json");
  return outputs;
}

WeightedFacetSubgraph load_subgraph(const PipelineConfig& cfg, Facet f, const std::vector<PaperId>& nodes) {
  auto in = open_in(cfg.stage_dir / facet_file(f, "facets", ".tsv"));
  return read_subgraph_dump(in, f, nodes);
}

// -- embed-graph
std::vector<std::string> run_embed_graph(const PipelineConfig& cfg) {
  const auto nodes = load_papers(cfg).ids();
  GraphTrainConfig gcfg = cfg.graph;
  gcfg.seed = graph_seed(cfg);
  std::vector<std::string> outputs;
  for (Facet f : kFacets) {
    const auto sub = load_subgraph(cfg, f, nodes);
    const auto edges = expand_weighted_edges(sub);
    const auto table = train_node_embeddings(edges, nodes, gcfg, f);
    const auto rel = facet_file(f, "graph", ".emb");
    write_file(cfg.stage_dir / rel, [&](auto& o) { write_embedding_table(o, table); });
    outputs.push_back(rel);
  }
  return outputs;
}

// -- sample
std::vector<std::string> run_sample(const PipelineConfig& cfg) {
  const auto nodes = load_papers(cfg).ids();
  SamplerPolicy policy = cfg.sampler;
  policy.seed = sampler_seed(cfg);
  std::vector<FacetTriplet> triplets;
  std::ostringstream skips;
  for (Facet f : kFacets) {
    const auto sub = load_subgraph(cfg, f, nodes);
    auto in = open_in(cfg.stage_dir / facet_file(f, "graph", ".emb"));
    const auto table = read_embedding_table(in);
    // Queries are the papers with at least one citation of this intent.
    std::set<PaperId> touched;
    for (const auto& e : sub.edges) {
      touched.insert(e.citing);
      touched.insert(e.cited);
    }
    const std::vector<PaperId> queries(touched.begin(), touched.end());
    auto result = sample_triplets(table, queries, policy, &sub);
    triplets.insert(triplets.end(), result.triplets.begin(), result.triplets.end());
    for (const auto& s : result.skips) skips << to_string(f) << '\t' << s.query << '\t' << s.reason << '\n';
  }
  write_file(cfg.stage_dir / "triplets/triplets.jsonl", [&](auto& o) { write_triplets_jsonl(o, triplets); });
  io::write_text_file(cfg.stage_dir / "triplets/skips.txt", skips.str());
  return {"triplets/triplets.jsonl", "triplets/skips.txt"};
}

// -- split-text
std::vector<std::string> run_split_text(const PipelineConfig& cfg) {
  const PaperStore papers = load_papers(cfg);
  std::vector<PaperId> ids;
  std::vector<std::string> abstracts;
  std::vector<SplitRecord> records;
  for (const auto& [id, p] : papers) {
    if (normalize_whitespace(p.abstract).empty()) {
      records.push_back({id, {{}, SplitProvenance::fallback, "empty abstract"}});
      continue;
    }
    ids.push_back(id);
    abstracts.push_back(p.abstract);
  }
  std::vector<ServiceSplit> splits;
  if (cfg.llm.configured()) {
    HttpLlmClient client(cfg.llm);
    splits = split_many(abstracts, client, cfg.splitter_fallback, cfg.llm_max_in_flight);
  } else {
    for (const auto& a : abstracts) splits.push_back({heuristic_split(a), SplitProvenance::fallback, "no service configured"});
  }
  for (std::size_t i = 0; i < ids.size(); ++i) records.push_back({ids[i], std::move(splits[i])});
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  write_file(cfg.stage_dir / "splits/splits.jsonl", [&](auto& o) { write_splits_jsonl(o, records); });
  return {"splits/splits.jsonl"};
}

EncoderParams base_encoder(const PipelineConfig& cfg) {
  return initialize_encoder(cfg.encoder_buckets, cfg.encoder_dim, encoder_seed(cfg), cfg.encoder_init_scale);
}

// -- train
std::vector<std::string> run_train(const PipelineConfig& cfg) {
  const PaperStore papers = load_papers(cfg);
  auto tin = open_in(cfg.stage_dir / "triplets/triplets.jsonl");
  const auto triplets = read_triplets_jsonl(tin);
  SplitStore splits;
  if (cfg.textual_mode == TextualMode::faceted) {
    auto sin = open_in(cfg.stage_dir / "splits/splits.jsonl");
    splits = to_split_store(read_splits_jsonl(sin));
  }
  const EncoderParams base = base_encoder(cfg);
  std::vector<std::string> outputs;
  std::vector<FacetTextTriplet> all_text;
  json report = json::object();
  for (Facet f : kFacets) {
    std::vector<FacetTextTriplet> text;
    for (const auto& t : triplets) {
      if (t.facet == f) text.push_back(materialize_triplet(t, papers, cfg.textual_mode, splits));
    }
    if (text.empty()) throw Error("no " + std::string(to_string(f)) + " triplets to train on");
    TrainConfig tcfg = cfg.train;
    tcfg.seed = train_seed(cfg, f);
    const auto result = train_encoder(text, tcfg, base);
    write_file(cfg.stage_dir / encoder_file(f), [&](auto& o) { write_encoder(o, result.params); });
    outputs.push_back(encoder_file(f));
    json epochs = json::array();
    for (const auto& e : result.report.epochs) {
      epochs.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"violation_rate", e.violation_rate}});
    }
    report["FLeW-" + std::string(short_name(f))] = {
        {"triplets", text.size()},
        {"initial", {{"mean_loss", result.report.initial.mean_loss}, {"violation_rate", result.report.initial.violation_rate}}},
        {"final", {{"mean_loss", result.report.final.mean_loss}, {"violation_rate", result.report.final.violation_rate}}},
        {"epochs", epochs}};
    all_text.insert(all_text.end(), text.begin(), text.end());
  }
  write_file(cfg.stage_dir / "encoders/materialized.jsonl", [&](auto& o) { write_text_triplets_jsonl(o, all_text); });
  report["textual_mode"] = to_string(cfg.textual_mode);
  io::write_text_file(cfg.stage_dir / "encoders/train_report.json", report.dump(2) + "\n");
  outputs.push_back("encoders/materialized.jsonl");
  outputs.push_back("encoders/train_report.json");
  return outputs;
}

// -- encode
std::vector<std::string> run_encode(const PipelineConfig& cfg) {
  const PaperStore papers = load_papers(cfg);
  std::array<EncoderParams, 3> enc;
  for (Facet f : kFacets) {
    auto in = open_in(cfg.stage_dir / encoder_file(f));
    enc[index_of(f)] = read_encoder(in);
  }
  const EncoderParams base = base_encoder(cfg);
  std::array<EmbeddingMap, 3> facet_maps;
  EmbeddingMap base_map;
  for (const auto& [id, paper] : papers) {
    auto fe = facet_embeddings(enc[0], enc[1], enc[2], paper);
    facet_maps[0].emplace(id, std::move(fe.background));
    facet_maps[1].emplace(id, std::move(fe.method));
    facet_maps[2].emplace(id, std::move(fe.result));
    base_map.emplace(id, encode(base, encoder_input(paper)));
  }
  std::vector<std::string> outputs;
  for (Facet f : kFacets) {
    const auto rel = vector_file(short_name(f));
    write_file(cfg.stage_dir / rel, [&](auto& o) { write_vectors(o, facet_maps[index_of(f)]); });
    outputs.push_back(rel);
  }
  write_file(cfg.stage_dir / vector_file("base"), [&](auto& o) { write_vectors(o, base_map); });
  outputs.push_back(vector_file("base"));
  return outputs;
}

// -- search-weights
std::vector<std::string> run_search_weights(const PipelineConfig& cfg) {
  if (cfg.validation_tasks.empty()) throw Error("no validation tasks configured (tasks.validation)");
  const auto vectors = load_facet_vectors(cfg);
  const auto grid = weight_grid(cfg.grid);
  std::vector<std::string> outputs;
  for (const auto& task : load_tasks(cfg.validation_tasks)) {
    const auto result = grid_search(grid, task, vectors, cfg.combine);
    const std::string rel = "weights/" + task.name + ".json";
    write_file(cfg.stage_dir / rel, [&](auto& o) { write_weights_json(o, task.name, cfg.grid, result); });
    outputs.push_back(rel);
  }
  return outputs;
}

// -- evaluate
std::vector<std::string> run_evaluate(const PipelineConfig& cfg) {
  const auto vectors = load_facet_vectors(cfg);
  auto bin = open_in(cfg.stage_dir / vector_file("base"));
  const EmbeddingMap base = read_vectors(bin);
  std::array<EmbeddingMap, 3> singles;
  for (Facet f : kFacets) singles[index_of(f)] = single_facet(f, vectors);

  json results = json::array();
  auto evaluate_split = [&](const std::vector<fs::path>& paths, const char* split) {
    for (const auto& task : load_tasks(paths)) {
      auto win = open_in(cfg.stage_dir / ("weights/" + task.name + ".json"));
      const WeightVector w = read_best_weight(win);
      json scores = json::object();
      const auto weighted = run_task(task, combine_all(w, vectors, cfg.combine));
      scores["FLeW"] = weighted.value;
      for (Facet f : kFacets) {
        scores["FLeW-" + std::string(short_name(f))] = run_task(task, singles[index_of(f)]).value;
      }
      scores["base"] = run_task(task, base).value;
      results.push_back({{"task", task.name},
                         {"split", split},
                         {"kind", to_string(task.kind)},
                         {"metric", weighted.metric},
                         {"support", weighted.support},
                         {"weights", {{"background", w.bg()}, {"method", w.mt()}, {"result", w.rs()}}},
                         {"scores", scores}});
    }
  };
  evaluate_split(cfg.validation_tasks, "validation");
  evaluate_split(cfg.test_tasks, "test");
  const json doc{{"textual_mode", to_string(cfg.textual_mode)}, {"results", results}};
  io::write_text_file(cfg.stage_dir / "results.json", doc.dump(2) + "\n");
  return {"results.json"};
}

std::vector<InputSpec> facet_inputs(const PipelineConfig& cfg, std::string_view dir, std::string_view ext,
                                    const std::string& producer) {
  std::vector<InputSpec> out;
  for (Facet f : kFacets) out.push_back(internal(cfg, facet_file(f, dir, ext), producer));
  return out;
}

const std::vector<StageDef>& stage_defs() {
  static const std::vector<StageDef> defs = [] {
    std::vector<StageDef> d;
    d.push_back({"ingest",
                 [](const PipelineConfig& c) { return std::vector<InputSpec>{external(c.papers), external(c.citations)}; },
                 [](const PipelineConfig&) { return std::string(); }, run_ingest});
    d.push_back({"facets",
                 [](const PipelineConfig& c) {
                   return std::vector<InputSpec>{internal(c, "corpus/papers.jsonl", "ingest"),
                                                 internal(c, "corpus/citations.jsonl", "ingest")};
                 },
                 [](const PipelineConfig&) { return std::string(); }, run_facets});
    d.push_back({"embed-graph",
                 [](const PipelineConfig& c) {
                   auto in = facet_inputs(c, "facets", ".tsv", "facets");
                   in.push_back(internal(c, "corpus/papers.jsonl", "ingest"));
                   return in;
                 },
                 [](const PipelineConfig& c) {
                   return canonical({{"dim", std::to_string(c.graph.dim)},
                                     {"epochs", std::to_string(c.graph.epochs)},
                                     {"learning_rate", num(c.graph.learning_rate)},
                                     {"negatives_per_edge", std::to_string(c.graph.negatives_per_edge)},
                                     {"margin", num(c.graph.margin)},
                                     {"seed", std::to_string(graph_seed(c))}});
                 },
                 run_embed_graph});
    d.push_back({"sample",
                 [](const PipelineConfig& c) {
                   auto in = facet_inputs(c, "graph", ".emb", "embed-graph");
                   auto sub = facet_inputs(c, "facets", ".tsv", "facets");
                   in.insert(in.end(), sub.begin(), sub.end());
                   in.push_back(internal(c, "corpus/papers.jsonl", "ingest"));
                   return in;
                 },
                 [](const PipelineConfig& c) {
                   const auto& p = c.sampler;
                   return canonical({{"k_pos", std::to_string(p.k_pos)},
                                     {"hard_lo", std::to_string(p.hard_lo)},
                                     {"hard_hi", std::to_string(p.hard_hi)},
                                     {"triplets_per_query", std::to_string(p.triplets_per_query)},
                                     {"hard_fraction", num(p.hard_fraction)},
                                     {"exclude_cited", p.exclude_cited_from_negatives ? "true" : "false"},
                                     {"max_redraws", std::to_string(p.max_redraws)},
                                     {"seed", std::to_string(sampler_seed(c))}});
                 },
                 run_sample});
    d.push_back({"split-text",
                 [](const PipelineConfig& c) { return std::vector<InputSpec>{internal(c, "corpus/papers.jsonl", "ingest")}; },
                 [](const PipelineConfig& c) {
                   return canonical({{"endpoint", c.llm.endpoint},
                                     {"model", c.llm.model},
                                     {"fallback", c.splitter_fallback ? "true" : "false"}});
                 },
                 run_split_text});
    d.push_back({"train",
                 [](const PipelineConfig& c) {
                   std::vector<InputSpec> in{internal(c, "corpus/papers.jsonl", "ingest"),
                                             internal(c, "triplets/triplets.jsonl", "sample")};
                   if (c.textual_mode == TextualMode::faceted) in.push_back(internal(c, "splits/splits.jsonl", "split-text"));
                   return in;
                 },
                 [](const PipelineConfig& c) {
                   return canonical({{"textual_mode", std::string(to_string(c.textual_mode))},
                                     {"learning_rate", num(c.train.learning_rate)},
                                     {"batch_size", std::to_string(c.train.batch_size)},
                                     {"epochs", std::to_string(c.train.epochs)},
                                     {"margin", num(c.train.margin)},
                                     {"buckets", std::to_string(c.encoder_buckets)},
                                     {"dim", std::to_string(c.encoder_dim)},
                                     {"init_scale", num(c.encoder_init_scale)},
                                     {"seed", std::to_string(c.seed)}});
                 },
                 run_train});
    d.push_back({"encode",
                 [](const PipelineConfig& c) {
                   std::vector<InputSpec> in{internal(c, "corpus/papers.jsonl", "ingest")};
                   for (Facet f : kFacets) in.push_back(internal(c, encoder_file(f), "train"));
                   return in;
                 },
                 [](const PipelineConfig& c) {
                   return canonical({{"buckets", std::to_string(c.encoder_buckets)},
                                     {"dim", std::to_string(c.encoder_dim)},
                                     {"init_scale", num(c.encoder_init_scale)},
                                     {"seed", std::to_string(c.seed)}});
                 },
                 run_encode});
    d.push_back({"search-weights",
                 [](const PipelineConfig& c) {
                   std::vector<InputSpec> in;
                   for (Facet f : kFacets) in.push_back(internal(c, vector_file(short_name(f)), "encode"));
                   for (const auto& t : c.validation_tasks) in.push_back(external(t));
                   return in;
                 },
                 [](const PipelineConfig& c) {
                   return canonical({{"step", num(c.grid.step)},
                                     {"normalize", c.combine.normalize_facets ? "true" : "false"}});
                 },
                 run_search_weights});
    d.push_back({"evaluate",
                 [](const PipelineConfig& c) {
                   std::vector<InputSpec> in;
                   for (Facet f : kFacets) in.push_back(internal(c, vector_file(short_name(f)), "encode"));
                   in.push_back(internal(c, vector_file("base"), "encode"));
                   for (const auto& t : c.validation_tasks) in.push_back(external(t));
                   for (const auto& t : c.test_tasks) in.push_back(external(t));
                   for (const auto& t : c.validation_tasks) {
                     if (fs::exists(t)) in.push_back(internal(c, "weights/" + task_name_of(t) + ".json", "search-weights"));
                   }
                   return in;
                 },
                 [](const PipelineConfig& c) {
                   return canonical({{"normalize", c.combine.normalize_facets ? "true" : "false"},
                                     {"textual_mode", std::string(to_string(c.textual_mode))}});
                 },
                 run_evaluate});
    return d;
  }();
  return defs;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json manifest_json(const StageManifest& m) {
  return {{"stage", m.stage},     {"inputs", m.inputs},       {"outputs", m.outputs},
          {"config_digest", m.config_digest}, {"timestamp", m.timestamp}, {"note", m.note}};
}

std::optional<StageManifest> read_manifest(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  const json j = json::parse(io::read_text_file(p), nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  StageManifest m;
  m.stage = j.value("stage", "");
  m.inputs = j.value("inputs", std::map<std::string, std::string>{});
  m.outputs = j.value("outputs", std::map<std::string, std::string>{});
  m.config_digest = j.value("config_digest", "");
  m.timestamp = j.value("timestamp", "");
  m.note = j.value("note", "");
  return m;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& d : stage_defs()) n.push_back(d.name);
    return n;
  }();
  return names;
}

StageManifest run_stage(std::string_view name, const PipelineConfig& cfg) {
  const auto& defs = stage_defs();
  auto it = std::find_if(defs.begin(), defs.end(), [&](const StageDef& d) { return d.name == name; });
  if (it == defs.end()) throw Error("unknown stage '" + std::string(name) + "'");
  const StageDef& def = *it;
  const std::string stage(name);

  try {
    StageManifest m;
    m.stage = stage;
    for (const auto& in : def.inputs(cfg)) {
      if (!fs::exists(in.path)) {
        if (in.producer.empty()) throw PipelineError(stage, "missing input file " + in.path.string());
        throw PipelineError(stage, "missing " + in.key + "; run stage '" + in.producer + "' first");
      }
      m.inputs[in.key] = io::sha256_file(in.path);
    }
    m.config_digest = io::sha256_hex(def.config_text(cfg));

    const fs::path manifest_path = cfg.stage_dir / "manifests" / (stage + ".json");
    if (auto prev = read_manifest(manifest_path);
        prev && prev->inputs == m.inputs && prev->config_digest == m.config_digest && !prev->outputs.empty()) {
      const bool outputs_intact = std::all_of(prev->outputs.begin(), prev->outputs.end(), [&](const auto& kv) {
        const fs::path p = cfg.stage_dir / kv.first;
        return fs::exists(p) && io::sha256_file(p) == kv.second;
      });
      if (outputs_intact) {
        prev->skipped = true;
        prev->note = "up to date; skipped";
        return *prev;
      }
    }

    fs::create_directories(cfg.stage_dir);
    for (const auto& rel : def.run(cfg)) m.outputs[rel] = io::sha256_file(cfg.stage_dir / rel);
    m.timestamp = utc_timestamp();
    m.note = "ran";
    io::write_text_file(manifest_path, manifest_json(m).dump(2) + "\n");
    return m;
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

std::vector<StageManifest> run_all(const PipelineConfig& cfg) {
  std::vector<StageManifest> out;
  for (const auto& name : stage_names()) out.push_back(run_stage(name, cfg));
  return out;
}

}  // namespace flew
