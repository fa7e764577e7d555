#pragma once

// Stage wiring for the full pipeline: structural sampling (ingest, facets,
// embed-graph, sample), textual splitting (split-text), pre-training (train)
// and inference (encode, search-weights, evaluate). Stages hand off through
// plain files under a stage directory and record digest manifests so an
// unchanged stage is skipped on rerun.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "flew/combiner.hpp"
#include "flew/encoder.hpp"
#include "flew/graph_embed.hpp"
#include "flew/llm_client.hpp"
#include "flew/triplet_sampler.hpp"

namespace flew {

struct PipelineConfig {
  std::filesystem::path papers;
  std::filesystem::path citations;
  std::filesystem::path stage_dir;
  std::vector<std::filesystem::path> validation_tasks;
  std::vector<std::filesystem::path> test_tasks;
  std::uint64_t seed = 1;
  TextualMode textual_mode = TextualMode::faceted;

  GraphTrainConfig graph;
  SamplerPolicy sampler;
  TrainConfig train;
  std::size_t encoder_buckets = 1u << 16;
  std::size_t encoder_dim = 64;
  double encoder_init_scale = kDefaultInitScale;
  GridSpec grid;
  CombineOptions combine;

  LlmClientConfig llm;
  bool splitter_fallback = true;
  std::size_t llm_max_in_flight = 4;
};

/// Flat "key = value" file; '#' starts a comment. Relative paths resolve
/// against the config file's directory. LLM settings then take environment
/// overrides (see LlmClientConfig::with_env_overrides).
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);

struct StageManifest {
  std::string stage;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // stage-dir relative path -> sha256
  std::string config_digest;
  std::string timestamp;
  bool skipped = false;
  std::string note;
};

class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : Error("[stage " + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Stage names in dependency order.
const std::vector<std::string>& stage_names();

StageManifest run_stage(std::string_view name, const PipelineConfig& cfg);
/// Runs every stage in order; the first failure propagates.
std::vector<StageManifest> run_all(const PipelineConfig& cfg);

}  // namespace flew
