#pragma once

// Hashing bag-of-words encoder with a trainable linear projection, trained
// per facet with the triplet margin loss over L2 distances.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "flew/corpus.hpp"
#include "flew/triplet_sampler.hpp"

namespace flew {

/// L2-normalized token-count vector; indices ascending and unique.
struct SparseFeatures {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  bool empty() const { return index.empty(); }
  SparseFeatures scaled(double factor) const;
};

/// Lowercases ASCII, splits on runs of ASCII non-alphanumerics (bytes >= 0x80
/// are token characters), hashes each token with FNV-1a 64 modulo `buckets`.
SparseFeatures featurize(std::string_view text, std::size_t buckets);

using Embedding = std::vector<double>;

/// Row-major dim x buckets projection. Weights are kept float32-representable
/// so the on-disk format round-trips exactly.
struct EncoderParams {
  std::size_t buckets = 1u << 16;
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  std::vector<double> weights;

  double& at(std::size_t row, std::size_t col) { return weights[row * buckets + col]; }
  double at(std::size_t row, std::size_t col) const { return weights[row * buckets + col]; }

  /// Checks shape, power-of-two buckets and finiteness.
  void validate() const;
  bool operator==(const EncoderParams&) const = default;
};

inline constexpr double kDefaultInitScale = 0.05;

/// Seeded base parameters: weight (r, c) is uniform in
/// [-init_scale/sqrt(dim), init_scale/sqrt(dim)] keyed by (seed, r, c).
EncoderParams initialize_encoder(std::size_t buckets, std::size_t dim, std::uint64_t seed,
                                 double init_scale = kDefaultInitScale);

Embedding encode_features(const EncoderParams& params, const SparseFeatures& features);
/// weights . featurize(text); no output normalization.
Embedding encode(const EncoderParams& params, std::string_view text);

double l2_distance(std::span<const double> a, std::span<const double> b);

/// max(|q - p| - |q - n| + margin, 0).
double triplet_loss(std::span<const double> q, std::span<const double> p,
                    std::span<const double> n, double margin);

/// Column-sparse gradient: for each touched bucket column, `dim` values.
struct SparseGradient {
  std::size_t dim = 0;
  std::vector<std::uint32_t> columns;  // ascending
  std::vector<double> values;          // columns.size() * dim, column blocks

  bool is_zero() const;
  /// Dense dim x buckets row-major matrix (same layout as the weights).
  std::vector<double> to_dense(std::size_t buckets) const;
  double get(std::size_t row, std::uint32_t column) const;
};

struct TripletFeatures {
  SparseFeatures query;
  SparseFeatures positive;
  SparseFeatures negative;
};

/// Encoder inputs ("title[SEP]text") of a text triplet, featurized.
TripletFeatures featurize_triplet(const FacetTextTriplet& triplet, std::size_t buckets);

/// Subgradient of triplet_loss(encode(q), encode(p), encode(n)) with respect to
/// the weights. Zero when the hinge is inactive (loss <= 0); a distance term
/// whose distance is exactly zero contributes nothing.
SparseGradient triplet_gradient(const EncoderParams& params, const TripletFeatures& features,
                                double margin);
SparseGradient triplet_loss_gradient(const EncoderParams& params,
                                     const FacetTextTriplet& triplet, double margin);

struct TrainConfig {
  double learning_rate = 1.0 / 32.0;
  std::size_t batch_size = 10;
  std::size_t epochs = 2;
  double margin = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TripletStats {
  double mean_loss = 0.0;
  double violation_rate = 0.0;  // fraction of triplets with positive loss
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;       // running mean over the epoch's pre-update losses
  double violation_rate = 0.0;
};

struct TrainReport {
  TripletStats initial;
  TripletStats final;
  std::vector<EpochStats> epochs;
};

struct TrainResult {
  EncoderParams params;
  TrainReport report;
};

TripletStats evaluate_triplets(const EncoderParams& params,
                               std::span<const TripletFeatures> triplets, double margin);

/// Mini-batch SGD with the mean gradient per batch, order shuffled per epoch
/// with a stream keyed by (seed, epoch).
TrainResult train_encoder(std::span<const FacetTextTriplet> triplets, const TrainConfig& cfg,
                          EncoderParams init);

struct FacetEmbeddings {
  Embedding background;
  Embedding method;
  Embedding result;

  const Embedding& get(Facet facet) const;
  bool operator==(const FacetEmbeddings&) const = default;
};

/// Inference always encodes "title[SEP]full abstract" with each facet encoder.
FacetEmbeddings facet_embeddings(const EncoderParams& bg, const EncoderParams& mt,
                                 const EncoderParams& rs, const Paper& paper);

void write_encoder(std::ostream& out, const EncoderParams& params);
EncoderParams read_encoder(std::istream& in);

}  // namespace flew
