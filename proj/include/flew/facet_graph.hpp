#pragma once

// Intent-specific projections of the citation graph, weighted by the number
// of citation contexts carrying that intent.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "flew/corpus.hpp"

namespace flew {

struct WeightedEdge {
  PaperId citing;
  PaperId cited;
  std::uint64_t weight = 1;

  bool operator==(const WeightedEdge&) const = default;
};

/// Directed (citing -> cited) edge without a weight.
struct DirectedEdge {
  PaperId source;
  PaperId target;

  bool operator==(const DirectedEdge&) const = default;
  auto operator<=>(const DirectedEdge&) const = default;
};

/// Node set is always the full parent node set, isolated nodes included.
struct WeightedFacetSubgraph {
  Facet facet = Facet::background;
  std::vector<PaperId> nodes;
  std::vector<WeightedEdge> edges;

  bool operator==(const WeightedFacetSubgraph&) const = default;
};

struct FacetStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::uint64_t total_weight = 0;
  std::size_t isolated_count = 0;
};

WeightedFacetSubgraph extract_facet_subgraph(const CitationGraph& graph, Facet facet);

/// Each edge (s, t, w) repeated w times, sorted by (s, t) with repeats adjacent.
std::vector<DirectedEdge> expand_weighted_edges(const WeightedFacetSubgraph& subgraph);

FacetStats facet_stats(const WeightedFacetSubgraph& subgraph);

/// Tab-separated dump, one weighted edge per line: facet, citing, cited, weight.
void write_subgraph_dump(std::ostream& out, const WeightedFacetSubgraph& subgraph);
WeightedFacetSubgraph read_subgraph_dump(std::istream& in, Facet facet,
                                         std::span<const PaperId> nodes);

}  // namespace flew
