#include "flew/facet_graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

namespace flew {

WeightedFacetSubgraph extract_facet_subgraph(const CitationGraph& graph, Facet facet) {
  WeightedFacetSubgraph sub;
  sub.facet = facet;
  sub.nodes = graph.nodes;
  for (const auto& e : graph.edges) {
    if (e.intent == facet) sub.edges.push_back({e.citing, e.cited, e.context_count});
  }
  return sub;
}

std::vector<DirectedEdge> expand_weighted_edges(const WeightedFacetSubgraph& subgraph) {
  std::vector<const WeightedEdge*> order;
  order.reserve(subgraph.edges.size());
  std::uint64_t total = 0;
  for (const auto& e : subgraph.edges) {
    order.push_back(&e);
    total += e.weight;
  }
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return std::tie(a->citing, a->cited) < std::tie(b->citing, b->cited);
  });
  std::vector<DirectedEdge> out;
  out.reserve(total);
  for (const auto* e : order) {
    for (std::uint64_t i = 0; i < e->weight; ++i) out.push_back({e->citing, e->cited});
  }
  return out;
}

FacetStats facet_stats(const WeightedFacetSubgraph& subgraph) {
  FacetStats stats;
  stats.node_count = subgraph.nodes.size();
  stats.edge_count = subgraph.edges.size();
  std::set<std::string_view> touched;
  for (const auto& e : subgraph.edges) {
    stats.total_weight += e.weight;
    touched.insert(e.citing);
    touched.insert(e.cited);
  }
  for (const auto& id : subgraph.nodes) {
    if (!touched.contains(id)) ++stats.isolated_count;
  }
  return stats;
}

void write_subgraph_dump(std::ostream& out, const WeightedFacetSubgraph& subgraph) {
  for (const auto& e : subgraph.edges) {
    out << to_string(subgraph.facet) << '\t' << e.citing << '\t' << e.cited << '\t'
        << e.weight << '\n';
  }
}

WeightedFacetSubgraph read_subgraph_dump(std::istream& in, Facet facet,
                                         std::span<const PaperId> nodes) {
  WeightedFacetSubgraph sub;
  sub.facet = facet;
  sub.nodes.assign(nodes.begin(), nodes.end());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string facet_text;
    WeightedEdge e;
    if (!std::getline(fields, facet_text, '\t') || !std::getline(fields, e.citing, '\t') ||
        !std::getline(fields, e.cited, '\t') || !(fields >> e.weight) || e.weight < 1) {
      throw Error("subgraph dump line " + std::to_string(lineno) + ": malformed record");
    }
    if (parse_facet(facet_text) != facet) {
      throw Error("subgraph dump line " + std::to_string(lineno) + ": facet mismatch");
    }
    sub.edges.push_back(std::move(e));
  }
  return sub;
}

}  // namespace flew
