#pragma once

// Strictly positive simplex weights over the three facet embeddings, and the
// exhaustive lattice search that picks them per task.

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "flew/encoder.hpp"
#include "flew/evalharness.hpp"

namespace flew {

/// (w_bg, w_mt, w_rs) with each weight > 0 and sum 1 within 1e-12. Lattice
/// points also carry their integer numerators over the common denominator.
class WeightVector {
 public:
  static WeightVector from_numerators(int bg, int mt, int rs);
  static WeightVector from_reals(double bg, double mt, double rs);

  double bg() const { return w_[0]; }
  double mt() const { return w_[1]; }
  double rs() const { return w_[2]; }
  double get(Facet facet) const { return w_[index_of(facet)]; }
  const std::array<double, 3>& values() const { return w_; }
  const std::optional<std::array<int, 3>>& numerators() const { return numerators_; }
  int denominator() const;

  bool operator==(const WeightVector&) const = default;

 private:
  std::array<double, 3> w_{};
  std::optional<std::array<int, 3>> numerators_;
};

struct GridSpec {
  double step = 0.05;

  /// m = 1/step; throws unless m is an integer >= 3.
  int divisions() const;
};

/// All (a, b, c)/m with positive integers a + b + c = m, lexicographic in (a, b).
std::vector<WeightVector> weight_grid(const GridSpec& spec);

struct CombineOptions {
  /// L2-normalize each facet vector before weighting.
  bool normalize_facets = false;
};

Embedding combine(const WeightVector& w, std::span<const double> e_bg,
                  std::span<const double> e_mt, std::span<const double> e_rs,
                  const CombineOptions& options = {});

using FacetVectorMap = std::map<PaperId, FacetEmbeddings, std::less<>>;

EmbeddingMap combine_all(const WeightVector& w, const FacetVectorMap& vectors,
                         const CombineOptions& options = {});
/// Only the given facet's vectors.
EmbeddingMap single_facet(Facet facet, const FacetVectorMap& vectors);

struct GridPoint {
  WeightVector weight;
  double score = 0.0;
};

struct GridSearchResult {
  WeightVector best;
  double best_score = 0.0;
  std::vector<GridPoint> table;  // grid enumeration order
};

/// Scores every grid point with run_task; the first maximum wins.
GridSearchResult grid_search(std::span<const WeightVector> grid, const ValidationTask& task,
                             const FacetVectorMap& vectors, const CombineOptions& options = {});

void write_weights_json(std::ostream& out, const std::string& task_id, const GridSpec& spec,
                        const GridSearchResult& result);
/// Reads back the best weight triple of a weights.json document.
WeightVector read_best_weight(std::istream& in);

/// Embedding vectors keyed by document id: magic "FLEV", version, dim, count,
/// then (id, dim little-endian float32) per document in id order.
void write_vectors(std::ostream& out, const EmbeddingMap& vectors);
EmbeddingMap read_vectors(std::istream& in);

}  // namespace flew
