#include "flew/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "flew/binary_io.hpp"
#include "flew/rng.hpp"

namespace flew {

namespace {

constexpr std::uint32_t kEncoderVersion = 1;

bool is_token_char(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

double round_to_float(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

SparseFeatures SparseFeatures::scaled(double factor) const {
  SparseFeatures out = *this;
  for (double& v : out.value) v *= factor;
  return out;
}

SparseFeatures featurize(std::string_view text, std::size_t buckets) {
  std::map<std::uint32_t, double> counts;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    counts[static_cast<std::uint32_t>(fnv1a64(token) % buckets)] += 1.0;
    token.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_char(c)) {
      token += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    } else {
      flush();
    }
  }
  flush();

  SparseFeatures out;
  double norm_sq = 0.0;
  for (const auto& [i, v] : counts) norm_sq += v * v;
  const double norm = std::sqrt(norm_sq);
  for (const auto& [i, v] : counts) {
    out.index.push_back(i);
    out.value.push_back(v / norm);
  }
  return out;
}

void EncoderParams::validate() const {
  if (buckets == 0 || (buckets & (buckets - 1)) != 0) {
    throw Error("encoder params: buckets must be a power of two");
  }
  if (dim == 0) throw Error("encoder params: dim must be positive");
  if (weights.size() != buckets * dim) throw Error("encoder params: weight shape mismatch");
  if (!std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); })) {
    throw Error("encoder params: non-finite weight");
  }
}

EncoderParams initialize_encoder(std::size_t buckets, std::size_t dim, std::uint64_t seed,
                                 double init_scale) {
  EncoderParams p;
  p.buckets = buckets;
  p.dim = dim;
  p.seed = seed;
  p.weights.assign(buckets * dim, 0.0);
  const double bound = init_scale / std::sqrt(static_cast<double>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    const std::uint64_t row_key = combine_keys(seed, r);
    for (std::size_t c = 0; c < buckets; ++c) {
      p.at(r, c) = round_to_float(bound * counter_uniform_symmetric(combine_keys(row_key, c)));
    }
  }
  p.validate();
  return p;
}

Embedding encode_features(const EncoderParams& params, const SparseFeatures& features) {
  Embedding out(params.dim, 0.0);
  for (std::size_t k = 0; k < features.index.size(); ++k) {
    const std::uint32_t c = features.index[k];
    const double x = features.value[k];
    for (std::size_t r = 0; r < params.dim; ++r) out[r] += params.at(r, c) * x;
  }
  return out;
}

Embedding encode(const EncoderParams& params, std::string_view text) {
  return encode_features(params, featurize(text, params.buckets));
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double triplet_loss(std::span<const double> q, std::span<const double> p,
                    std::span<const double> n, double margin) {
  if (q.size() != p.size() || q.size() != n.size()) {
    throw Error("triplet_loss: dimension mismatch");
  }
  return std::max(l2_distance(q, p) - l2_distance(q, n) + margin, 0.0);
}

bool SparseGradient::is_zero() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

std::vector<double> SparseGradient::to_dense(std::size_t buckets) const {
  std::vector<double> dense(dim * buckets, 0.0);
  for (std::size_t k = 0; k < columns.size(); ++k) {
    for (std::size_t r = 0; r < dim; ++r) dense[r * buckets + columns[k]] = values[k * dim + r];
  }
  return dense;
}

double SparseGradient::get(std::size_t row, std::uint32_t column) const {
  auto it = std::lower_bound(columns.begin(), columns.end(), column);
  if (it == columns.end() || *it != column) return 0.0;
  return values[static_cast<std::size_t>(it - columns.begin()) * dim + row];
}

TripletFeatures featurize_triplet(const FacetTextTriplet& triplet, std::size_t buckets) {
  auto f = [&](const TextRole& r) { return featurize(encoder_input(r.title, r.text), buckets); };
  return {f(triplet.query), f(triplet.positive), f(triplet.negative)};
}

SparseGradient triplet_gradient(const EncoderParams& params, const TripletFeatures& features,
                                double margin) {
  const Embedding q = encode_features(params, features.query);
  const Embedding p = encode_features(params, features.positive);
  const Embedding n = encode_features(params, features.negative);

  SparseGradient grad;
  grad.dim = params.dim;
  if (triplet_loss(q, p, n, margin) <= 0.0) return grad;

  // dL/dq = u_p - u_n, dL/dp = -u_p, dL/dn = u_n with unit directions
  // u_p = (q - p)/|q - p| and u_n = (q - n)/|q - n|.
  const double dp = l2_distance(q, p);
  const double dn = l2_distance(q, n);
  Embedding up(params.dim, 0.0), un(params.dim, 0.0);
  for (std::size_t r = 0; r < params.dim; ++r) {
    if (dp > 0.0) up[r] = (q[r] - p[r]) / dp;
    if (dn > 0.0) un[r] = (q[r] - n[r]) / dn;
  }

  std::map<std::uint32_t, std::vector<double>> cols;
  auto accumulate = [&](const SparseFeatures& x, auto&& coeff) {
    for (std::size_t k = 0; k < x.index.size(); ++k) {
      auto& col = cols[x.index[k]];
      if (col.empty()) col.assign(params.dim, 0.0);
      for (std::size_t r = 0; r < params.dim; ++r) col[r] += coeff(r) * x.value[k];
    }
  };
  accumulate(features.query, [&](std::size_t r) { return up[r] - un[r]; });
  accumulate(features.positive, [&](std::size_t r) { return -up[r]; });
  accumulate(features.negative, [&](std::size_t r) { return un[r]; });

  grad.columns.reserve(cols.size());
  grad.values.reserve(cols.size() * params.dim);
  for (auto& [c, v] : cols) {
    grad.columns.push_back(c);
    grad.values.insert(grad.values.end(), v.begin(), v.end());
  }
  return grad;
}

SparseGradient triplet_loss_gradient(const EncoderParams& params,
                                     const FacetTextTriplet& triplet, double margin) {
  return triplet_gradient(params, featurize_triplet(triplet, params.buckets), margin);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || batch_size == 0 || epochs == 0 || !(margin > 0.0)) {
    throw Error("train config: learning_rate, batch_size, epochs and margin must be positive");
  }
}

TripletStats evaluate_triplets(const EncoderParams& params,
                               std::span<const TripletFeatures> triplets, double margin) {
  TripletStats stats;
  if (triplets.empty()) return stats;
  std::size_t violations = 0;
  for (const auto& t : triplets) {
    const double loss = triplet_loss(encode_features(params, t.query),
                                     encode_features(params, t.positive),
                                     encode_features(params, t.negative), margin);
    stats.mean_loss += loss;
    violations += loss > 0.0;
  }
  stats.mean_loss /= static_cast<double>(triplets.size());
  stats.violation_rate = static_cast<double>(violations) / static_cast<double>(triplets.size());
  return stats;
}

TrainResult train_encoder(std::span<const FacetTextTriplet> triplets, const TrainConfig& cfg,
                          EncoderParams init) {
  cfg.validate();
  init.validate();
  if (triplets.empty()) throw Error("train_encoder: no triplets");

  std::vector<TripletFeatures> features;
  features.reserve(triplets.size());
  for (const auto& t : triplets) features.push_back(featurize_triplet(t, init.buckets));

  TrainResult result{std::move(init), {}};
  EncoderParams& params = result.params;
  result.report.initial = evaluate_triplets(params, features, cfg.margin);

  std::vector<std::size_t> order(features.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(combine_keys(cfg.seed, epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t violations = 0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::size_t stop = std::min(start + cfg.batch_size, order.size());
      std::map<std::uint32_t, std::vector<double>> accum;
      for (std::size_t i = start; i < stop; ++i) {
        const auto& f = features[order[i]];
        const double loss = triplet_loss(encode_features(params, f.query),
                                         encode_features(params, f.positive),
                                         encode_features(params, f.negative), cfg.margin);
        if (!std::isfinite(loss)) {
          throw Error("train_encoder: non-finite loss at epoch " + std::to_string(epoch) +
                      ", batch " + std::to_string(batch));
        }
        loss_sum += loss;
        violations += loss > 0.0;
        const SparseGradient g = triplet_gradient(params, f, cfg.margin);
        for (std::size_t k = 0; k < g.columns.size(); ++k) {
          auto& col = accum[g.columns[k]];
          if (col.empty()) col.assign(params.dim, 0.0);
          for (std::size_t r = 0; r < params.dim; ++r) col[r] += g.values[k * params.dim + r];
        }
      }
      const double step = cfg.learning_rate / static_cast<double>(stop - start);
      for (const auto& [c, col] : accum) {
        for (std::size_t r = 0; r < params.dim; ++r) {
          const double w = round_to_float(params.at(r, c) - step * col[r]);
          if (!std::isfinite(w)) {
            throw Error("train_encoder: non-finite weight at epoch " + std::to_string(epoch) +
                        ", batch " + std::to_string(batch));
          }
          params.at(r, c) = w;
        }
      }
    }
    const auto count = static_cast<double>(order.size());
    result.report.epochs.push_back(
        {epoch, loss_sum / count, static_cast<double>(violations) / count});
  }
  result.report.final = evaluate_triplets(params, features, cfg.margin);
  return result;
}

const Embedding& FacetEmbeddings::get(Facet facet) const {
  switch (facet) {
    case Facet::background: return background;
    case Facet::method: return method;
    case Facet::result: return result;
  }
  return background;
}

FacetEmbeddings facet_embeddings(const EncoderParams& bg, const EncoderParams& mt,
                                 const EncoderParams& rs, const Paper& paper) {
  if (bg.dim != mt.dim || bg.dim != rs.dim) {
    throw Error("facet_embeddings: facet encoders have different dimensions");
  }
  const std::string input = encoder_input(paper);
  return {encode(bg, input), encode(mt, input), encode(rs, input)};
}

void write_encoder(std::ostream& out, const EncoderParams& params) {
  io::write_magic(out, "FLEN");
  io::write_u32(out, kEncoderVersion);
  io::write_u64(out, params.buckets);
  io::write_u32(out, static_cast<std::uint32_t>(params.dim));
  io::write_u64(out, params.seed);
  for (double w : params.weights) io::write_f32(out, static_cast<float>(w));
}

EncoderParams read_encoder(std::istream& in) {
  io::expect_magic(in, "FLEN");
  if (io::read_u32(in) != kEncoderVersion) throw Error("encoder file: unsupported version");
  EncoderParams p;
  p.buckets = io::read_u64(in);
  p.dim = io::read_u32(in);
  p.seed = io::read_u64(in);
  p.weights.resize(p.buckets * p.dim);
  for (double& w : p.weights) w = io::read_f32(in);
  p.validate();
  return p;
}

}  // namespace flew
