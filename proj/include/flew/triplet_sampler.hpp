#pragma once

// Neighborhood sampling of (query, positive, negative) triplets in a facet's
// structural embedding space, and their conversion to text triplets.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flew/corpus.hpp"
#include "flew/facet_graph.hpp"
#include "flew/graph_embed.hpp"
#include "flew/text_splitter.hpp"

namespace flew {

/// Rank windows are 1-based positions in a query's cosine-distance ranking.
struct SamplerPolicy {
  std::size_t k_pos = 5;
  std::size_t hard_lo = 20;
  std::size_t hard_hi = 25;
  std::size_t triplets_per_query = 10;
  double hard_fraction = 0.5;
  /// Redraw negatives the query cites in the facet subgraph (needs the subgraph).
  bool exclude_cited_from_negatives = false;
  std::size_t max_redraws = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FacetTriplet {
  Facet facet = Facet::background;
  PaperId query;
  PaperId positive;
  PaperId negative;

  bool operator==(const FacetTriplet&) const = default;
};

struct SampleSkip {
  PaperId query;
  std::string reason;
};

struct SampleResult {
  std::vector<FacetTriplet> triplets;
  std::vector<SampleSkip> skips;
};

/// Per query, `triplets_per_query` draws: positive uniform from ranks
/// [1, k_pos]; negative uniform from [hard_lo, hard_hi] with probability
/// hard_fraction, else from ranks above hard_hi (hard window when that range
/// is empty). A draw whose negative is not strictly farther than the
/// positive is redrawn up to max_redraws times, then skipped with a report.
/// Each query uses its own stream keyed by (seed, facet, query id).
SampleResult sample_triplets(const NodeEmbeddingTable& table, std::span<const PaperId> queries,
                             const SamplerPolicy& policy,
                             const WeightedFacetSubgraph* citations = nullptr);

enum class TextualMode { full, faceted };
std::string_view to_string(TextualMode mode);
TextualMode parse_textual_mode(std::string_view text);

struct TextRole {
  PaperId id;
  std::string title;
  std::string text;
  bool empty_section = false;

  bool operator==(const TextRole&) const = default;
};

struct FacetTextTriplet {
  Facet facet = Facet::background;
  TextualMode mode = TextualMode::faceted;
  TextRole query;
  TextRole positive;
  TextRole negative;

  bool operator==(const FacetTextTriplet&) const = default;
};

/// full: each role's text is the whole abstract. faceted: the role's split
/// section for the triplet's facet (possibly empty, then flagged).
FacetTextTriplet materialize_triplet(const FacetTriplet& triplet, const PaperStore& papers,
                                     TextualMode mode, const SplitStore& splits);

void write_triplets_jsonl(std::ostream& out, std::span<const FacetTriplet> triplets);
std::vector<FacetTriplet> read_triplets_jsonl(std::istream& in);
void write_text_triplets_jsonl(std::ostream& out, std::span<const FacetTextTriplet> triplets);

}  // namespace flew
