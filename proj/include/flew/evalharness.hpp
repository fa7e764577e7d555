#pragma once

// Ranking, correlation and classification metrics plus the task runners used
// for weight search and final evaluation.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "flew/types.hpp"

namespace flew {

using EmbeddingMap = std::map<PaperId, std::vector<double>, std::less<>>;

// Metrics ---------------------------------------------------------------------

/// Linear gains, log2(rank + 1) discount, normalized by the ideal ordering.
/// 0 when every relevance is 0.
double ndcg(std::span<const double> ranked_relevances);

/// Mean of precision@i over relevant positions i; 0 without relevant items.
double average_precision(std::span<const int> ranked_binary);

/// |top-k n relevant| / |relevant|. Throws on an empty relevant set.
double recall_at_k(std::span<const PaperId> ranked, const std::set<PaperId>& relevant,
                   std::size_t k);

/// Tau-b, O(n log n). Throws on length mismatch, n < 2 or an all-tie input.
double kendall_tau(std::span<const double> x, std::span<const double> y);

struct F1Scores {
  double macro = 0.0;
  double weighted = 0.0;
};

/// Labels absent from both gold and predictions are excluded from the macro
/// average; the weighted average uses gold support.
F1Scores f1_scores(std::span<const std::string> predicted, std::span<const std::string> gold,
                   std::span<const std::string> label_set);

// Heads -----------------------------------------------------------------------

struct LabeledPoint {
  PaperId id;
  std::vector<double> vector;
  std::string label;
};

/// Cosine k-NN majority vote. Neighbors are ordered by distance then id; a
/// vote tie goes to the tied label whose nearest member ranks first.
std::vector<std::string> knn_classify(std::span<const LabeledPoint> train,
                                      std::span<const std::vector<double>> test, std::size_t k);

/// Affine least squares with ridge damping on the centered normal equations.
std::vector<double> linear_probe(std::span<const std::vector<double>> train_x,
                                 std::span<const double> train_y,
                                 std::span<const std::vector<double>> test_x,
                                 double ridge = 1e-6);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Tasks -----------------------------------------------------------------------

enum class TaskKind { proximity, classification, regression_probe, retrieval };
std::string_view to_string(TaskKind kind);

struct RankedCandidate {
  PaperId id;
  double relevance = 0.0;
};

struct ProximityQuery {
  PaperId query;
  std::vector<RankedCandidate> candidates;
};

struct RetrievalQuery {
  PaperId query;
  std::vector<PaperId> positives;
  std::vector<PaperId> candidates;  // empty: every other id of the task
};

enum class Split { train, test };

struct LabeledDoc {
  PaperId id;
  std::string label;
  Split split = Split::train;
};

struct TargetDoc {
  PaperId id;
  double target = 0.0;
  Split split = Split::train;
};

/// metric: proximity "map" | "ndcg"; retrieval "map" | "recall@k";
/// classification "macro_f1" | "weighted_f1"; regression "kendall_tau".
struct ValidationTask {
  std::string name;
  TaskKind kind = TaskKind::proximity;
  std::string metric;
  std::size_t k = 5;  // recall@k cutoff, or neighbors for classification
  std::vector<ProximityQuery> proximity;
  std::vector<RetrievalQuery> retrieval;
  std::vector<LabeledDoc> labeled;
  std::vector<TargetDoc> targets;

  /// Every id the task needs an embedding for, sorted.
  std::vector<PaperId> referenced_ids() const;
  void validate() const;
};

struct MetricResult {
  std::string metric;
  double value = 0.0;
  std::size_t support = 0;
};

/// Candidates ranked by descending cosine similarity, ties by ascending id.
std::vector<PaperId> rank_candidates(std::span<const double> query,
                                     std::span<const PaperId> candidates,
                                     const EmbeddingMap& embeddings);

MetricResult run_task(const ValidationTask& task, const EmbeddingMap& embeddings);

/// JSON lines: a header {"kind", "name", "metric", "k"} then one payload
/// object per line.
ValidationTask read_task(std::istream& in);
void write_task(std::ostream& out, const ValidationTask& task);

}  // namespace flew
