#include "flew/graph_embed.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "flew/binary_io.hpp"
#include "flew/rng.hpp"

namespace flew {

namespace {

constexpr std::uint32_t kTableVersion = 1;

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

}  // namespace

void GraphTrainConfig::validate() const {
  if (dim == 0 || epochs == 0 || negatives_per_edge == 0 || !(learning_rate > 0.0) ||
      !(margin > 0.0)) {
    throw Error("graph training config: dim, epochs, learning_rate, negatives_per_edge "
                "and margin must all be positive");
  }
}

NodeEmbeddingTable::NodeEmbeddingTable(Facet facet, std::size_t dim, std::uint64_t seed,
                                       std::vector<PaperId> ids, std::vector<float> values)
    : facet_(facet), dim_(dim), seed_(seed), ids_(std::move(ids)), values_(std::move(values)) {
  if (values_.size() != ids_.size() * dim_) throw Error("embedding table: size mismatch");
  if (!std::is_sorted(ids_.begin(), ids_.end()) ||
      std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
    throw Error("embedding table: ids must be unique and sorted");
  }
}

std::size_t NodeEmbeddingTable::index_of(std::string_view id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id,
                             [](const PaperId& a, std::string_view b) { return a < b; });
  if (it == ids_.end() || *it != id) return ids_.size();
  return static_cast<std::size_t>(it - ids_.begin());
}

std::span<const float> NodeEmbeddingTable::vector(std::string_view id) const {
  const std::size_t i = index_of(id);
  if (i == size()) throw Error("embedding table: unknown id '" + std::string(id) + "'");
  return row(i);
}

NodeEmbeddingTable NodeEmbeddingTable::scaled(float factor) const {
  NodeEmbeddingTable copy = *this;
  for (float& v : copy.values_) v *= factor;
  return copy;
}

NodeEmbeddingTable initial_node_embeddings(std::span<const PaperId> nodes, Facet facet,
                                           std::size_t dim, std::uint64_t seed) {
  std::vector<PaperId> ids(nodes.begin(), nodes.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<float> values(ids.size() * dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::uint64_t node_key = combine_keys(seed, fnv1a64(ids[i]));
    for (std::size_t j = 0; j < dim; ++j) {
      values[i * dim + j] =
          static_cast<float>(bound * counter_uniform_symmetric(combine_keys(node_key, j)));
    }
  }
  return NodeEmbeddingTable(facet, dim, seed, std::move(ids), std::move(values));
}

NodeEmbeddingTable train_node_embeddings(std::span<const DirectedEdge> edges,
                                         std::span<const PaperId> nodes,
                                         const GraphTrainConfig& cfg, Facet facet) {
  cfg.validate();
  if (nodes.empty()) throw Error("train_node_embeddings: empty node set");
  NodeEmbeddingTable table = initial_node_embeddings(nodes, facet, cfg.dim, cfg.seed);
  const std::size_t n = table.size();
  const std::size_t dim = cfg.dim;

  std::vector<std::pair<std::size_t, std::size_t>> resolved;
  resolved.reserve(edges.size());
  for (const auto& e : edges) {
    const std::size_t s = table.index_of(e.source);
    const std::size_t t = table.index_of(e.target);
    if (s == n || t == n) {
      throw Error("train_node_embeddings: edge endpoint not in node set (" + e.source + " -> " +
                  e.target + ")");
    }
    resolved.emplace_back(s, t);
  }
  if (resolved.empty() || n < 2) return table;

  const float lr = static_cast<float>(cfg.learning_rate);
  std::vector<float> src(dim), tgt(dim), neg(dim);
  std::vector<std::size_t> order(resolved.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(combine_keys(cfg.seed, epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    for (std::size_t position : order) {
      const auto [s, t] = resolved[position];
      for (std::size_t k = 0; k < cfg.negatives_per_edge; ++k) {
        std::size_t v = static_cast<std::size_t>(rng.uniform_index(n - 1));
        if (v >= t) ++v;
        auto sr = table.row(s), tr = table.row(t), nr = table.row(v);
        const double loss = cfg.margin - dot(sr, tr) + dot(sr, nr);
        if (loss <= 0.0) continue;
        // Gradients are taken at the pre-step values; s and n may alias.
        std::copy(sr.begin(), sr.end(), src.begin());
        std::copy(tr.begin(), tr.end(), tgt.begin());
        std::copy(nr.begin(), nr.end(), neg.begin());
        for (std::size_t j = 0; j < dim; ++j) {
          sr[j] -= lr * (neg[j] - tgt[j]);
          tr[j] += lr * src[j];
          nr[j] -= lr * src[j];
        }
        for (std::size_t j = 0; j < dim; ++j) {
          if (!std::isfinite(sr[j]) || !std::isfinite(tr[j]) || !std::isfinite(nr[j])) {
            throw Error("train_node_embeddings: non-finite update at epoch " +
                        std::to_string(epoch) + ", edge " + table.ids()[s] + " -> " +
                        table.ids()[t]);
          }
        }
      }
    }
  }
  return table;
}

double cosine_distance(std::span<const float> a, std::span<const float> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - dot(a, b) / (na * nb);
}

std::vector<std::size_t> rank_by_distance(const NodeEmbeddingTable& table,
                                          std::size_t query_index) {
  const auto q = table.row(query_index);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i == query_index) continue;
    scored.emplace_back(cosine_distance(q, table.row(i)), i);
  }
  // Row order equals id order, so the index is the id tie-break.
  std::sort(scored.begin(), scored.end());
  std::vector<std::size_t> out;
  out.reserve(scored.size());
  for (const auto& [_, i] : scored) out.push_back(i);
  return out;
}

std::vector<Neighbor> nearest_neighbors(const NodeEmbeddingTable& table,
                                        std::string_view query, std::size_t k) {
  if (k == 0) throw Error("nearest_neighbors: k must be >= 1");
  const std::size_t qi = table.index_of(query);
  if (qi == table.size()) {
    throw Error("nearest_neighbors: unknown query id '" + std::string(query) + "'");
  }
  const auto ranked = rank_by_distance(table, qi);
  std::vector<Neighbor> out;
  for (std::size_t r = 0; r < ranked.size() && r < k; ++r) {
    out.push_back({table.ids()[ranked[r]], cosine_distance(table.row(qi), table.row(ranked[r]))});
  }
  return out;
}

void write_embedding_table(std::ostream& out, const NodeEmbeddingTable& table) {
  io::write_magic(out, "FLGE");
  io::write_u32(out, kTableVersion);
  io::write_u8(out, static_cast<std::uint8_t>(table.facet()));
  io::write_u32(out, static_cast<std::uint32_t>(table.dim()));
  io::write_u64(out, table.size());
  io::write_u64(out, table.seed());
  for (std::size_t i = 0; i < table.size(); ++i) {
    io::write_string(out, table.ids()[i]);
    for (float v : table.row(i)) io::write_f32(out, v);
  }
}

NodeEmbeddingTable read_embedding_table(std::istream& in) {
  io::expect_magic(in, "FLGE");
  if (io::read_u32(in) != kTableVersion) throw Error("embedding table: unsupported version");
  const auto facet_code = io::read_u8(in);
  if (facet_code > 2) throw Error("embedding table: bad facet code");
  const std::size_t dim = io::read_u32(in);
  const std::uint64_t count = io::read_u64(in);
  const std::uint64_t seed = io::read_u64(in);
  std::vector<PaperId> ids;
  std::vector<float> values;
  ids.reserve(count);
  values.reserve(count * dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    ids.push_back(io::read_string(in));
    for (std::size_t j = 0; j < dim; ++j) values.push_back(io::read_f32(in));
  }
  return NodeEmbeddingTable(static_cast<Facet>(facet_code), dim, seed, std::move(ids),
                            std::move(values));
}

}  // namespace flew
