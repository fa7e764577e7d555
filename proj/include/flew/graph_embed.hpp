#pragma once

// Shallow structural node embeddings trained on a facet subgraph's edge
// multiset with a dot-product margin ranking objective, plus cosine
// nearest-neighbor queries over the resulting table.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "flew/facet_graph.hpp"

namespace flew {

struct GraphTrainConfig {
  std::size_t dim = 32;
  std::size_t epochs = 10;
  double learning_rate = 0.05;
  std::size_t negatives_per_edge = 5;
  double margin = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One float vector per node, ids sorted ascending.
class NodeEmbeddingTable {
 public:
  NodeEmbeddingTable() = default;
  NodeEmbeddingTable(Facet facet, std::size_t dim, std::uint64_t seed, std::vector<PaperId> ids,
                     std::vector<float> values);

  Facet facet() const { return facet_; }
  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<PaperId>& ids() const { return ids_; }
  const std::vector<float>& values() const { return values_; }

  /// Row index of an id, or size() when absent.
  std::size_t index_of(std::string_view id) const;
  bool contains(std::string_view id) const { return index_of(id) < size(); }
  std::span<const float> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<float> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  std::span<const float> vector(std::string_view id) const;

  /// Copy with every coordinate multiplied by `factor`.
  NodeEmbeddingTable scaled(float factor) const;

  bool operator==(const NodeEmbeddingTable&) const = default;

 private:
  Facet facet_ = Facet::background;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<PaperId> ids_;
  std::vector<float> values_;
};

/// Seeded initialization: each coordinate uniform in [-1/sqrt(dim), 1/sqrt(dim)],
/// keyed by (seed, node id, coordinate) so it is independent of node order.
NodeEmbeddingTable initial_node_embeddings(std::span<const PaperId> nodes, Facet facet,
                                           std::size_t dim, std::uint64_t seed);

/// Per-edge SGD in a shuffled order keyed by (seed, epoch). For each positive
/// edge (s, t) and each of `negatives_per_edge` corrupted targets n != t, one
/// subgradient step on max(0, margin - s.t + s.n).
NodeEmbeddingTable train_node_embeddings(std::span<const DirectedEdge> edges,
                                         std::span<const PaperId> nodes,
                                         const GraphTrainConfig& cfg,
                                         Facet facet = Facet::background);

struct Neighbor {
  PaperId id;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

/// 1 - cosine similarity; 1 when either vector is zero.
double cosine_distance(std::span<const float> a, std::span<const float> b);

/// All other nodes ordered by ascending cosine distance to `query_index`,
/// ties by ascending id. Returned as row indices.
std::vector<std::size_t> rank_by_distance(const NodeEmbeddingTable& table,
                                          std::size_t query_index);

/// The min(k, n-1) nearest nodes to `query`, excluding itself.
std::vector<Neighbor> nearest_neighbors(const NodeEmbeddingTable& table,
                                        std::string_view query, std::size_t k);

void write_embedding_table(std::ostream& out, const NodeEmbeddingTable& table);
NodeEmbeddingTable read_embedding_table(std::istream& in);

}  // namespace flew
