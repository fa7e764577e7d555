#pragma once

// Paper metadata and intent-labeled citation ingestion from JSON-lines dumps.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "flew/types.hpp"

namespace flew {

struct Paper {
  PaperId id;
  std::string title;
  std::string abstract;

  bool operator==(const Paper&) const = default;
};

/// Per-line ingestion problem. Line numbers are 1-based.
struct LineError {
  std::size_t line = 0;
  std::string message;
};

/// Immutable-after-ingestion paper store, ordered by id.
class PaperStore {
 public:
  /// Returns false (and leaves the store unchanged) if the id is taken.
  bool insert(Paper paper);

  const Paper* find(std::string_view id) const;
  const Paper& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return papers_.size(); }
  bool empty() const { return papers_.empty(); }

  std::vector<PaperId> ids() const;
  auto begin() const { return papers_.begin(); }
  auto end() const { return papers_.end(); }

  bool operator==(const PaperStore&) const = default;

 private:
  std::map<PaperId, Paper, std::less<>> papers_;
};

struct CitationEdge {
  PaperId citing;
  PaperId cited;
  Facet intent = Facet::background;
  std::uint64_t context_count = 1;

  bool operator==(const CitationEdge&) const = default;
};

/// Nodes are sorted; edges are sorted by (citing, cited, intent) and unique
/// on that key.
struct CitationGraph {
  std::vector<PaperId> nodes;
  std::vector<CitationEdge> edges;

  bool operator==(const CitationGraph&) const = default;
};

struct PaperIngestResult {
  PaperStore store;
  std::vector<LineError> errors;
};

struct CitationIngestResult {
  CitationGraph graph;
  std::vector<LineError> errors;
};

/// One JSON object per line with string fields id, title, abstract. Blank
/// lines are skipped. Invalid lines are reported and skipped; the first
/// occurrence of an id wins.
PaperIngestResult ingest_papers(std::istream& in);

/// One JSON object per line with citing, cited, intent, context_count.
/// Repeated (citing, cited, intent) records are merged by summing counts.
/// The graph's node set is every paper in `papers`.
CitationIngestResult ingest_citations(std::istream& in, const PaperStore& papers);

/// "title[SEP]abstract", or the bare title when the abstract is empty.
std::string encoder_input(std::string_view title, std::string_view abstract);
inline std::string encoder_input(const Paper& paper) {
  return encoder_input(paper.title, paper.abstract);
}

inline constexpr std::string_view kSeparatorToken = "[SEP]";

void write_papers_jsonl(std::ostream& out, const PaperStore& store);
void write_citations_jsonl(std::ostream& out, const CitationGraph& graph);

}  // namespace flew
