#pragma once

// Generator for small corpora with planted facet communities: every paper
// belongs to one background, one method and one result community, its
// abstract has one cue-marked section per facet drawn from that community's
// vocabulary, and its citations of each intent stay inside the matching
// community. Planted evaluation tasks are derived from the communities.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flew/corpus.hpp"
#include "flew/evalharness.hpp"

namespace flew {

struct SyntheticSpec {
  std::size_t papers = 300;
  std::size_t communities = 15;        // per facet
  std::size_t words_per_community = 8;
  std::size_t sentences_per_section = 2;
  std::size_t citations_per_facet = 4;  // out-edges per paper and intent
  double off_community_rate = 0.05;     // fraction of citations leaving the community
  std::size_t task_queries = 40;        // per task and split
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  PaperStore papers;
  /// Citation records as they would appear in a dump; some pairs are split
  /// over several lines.
  std::vector<CitationEdge> citation_records;
  /// community[facet][paper index]
  std::array<std::vector<std::size_t>, 3> community;
  std::vector<PaperId> ids;
  /// Planted tasks, validation then test: one proximity task per facet
  /// ("<facet>_prx"), a mixed-facet nDCG task ("mixed_prx"), a method-label
  /// classification task and a citation-count regression probe.
  std::vector<ValidationTask> validation_tasks;
  std::vector<ValidationTask> test_tasks;
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec);

/// Writes papers.jsonl, citations.jsonl, tasks/<name>.{val,test}.jsonl and a
/// flew.conf that points at them. Returns the config path.
std::filesystem::path write_synthetic_corpus(const SyntheticCorpus& corpus,
                                             const std::filesystem::path& dir);

}  // namespace flew
