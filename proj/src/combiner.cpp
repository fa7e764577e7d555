#include "flew/combiner.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "flew/binary_io.hpp"
#include "json.hpp"

namespace flew {

using nlohmann::json;

WeightVector WeightVector::from_numerators(int bg, int mt, int rs) {
  if (bg <= 0 || mt <= 0 || rs <= 0) throw Error("weight numerators must be positive");
  const int m = bg + mt + rs;
  WeightVector w;
  w.w_ = {static_cast<double>(bg) / m, static_cast<double>(mt) / m, static_cast<double>(rs) / m};
  w.numerators_ = std::array<int, 3>{bg, mt, rs};
  return w;
}

WeightVector WeightVector::from_reals(double bg, double mt, double rs) {
  if (!(bg > 0.0 && mt > 0.0 && rs > 0.0)) throw Error("weights must be strictly positive");
  if (std::abs(bg + mt + rs - 1.0) > 1e-12) throw Error("weights must sum to 1");
  WeightVector w;
  w.w_ = {bg, mt, rs};
  return w;
}

int WeightVector::denominator() const {
  if (!numerators_) throw Error("weight vector is not a lattice point");
  return (*numerators_)[0] + (*numerators_)[1] + (*numerators_)[2];
}

int GridSpec::divisions() const {
  if (!(step > 0.0 && step <= 0.5)) throw Error("grid step must lie in (0, 0.5]");
  const double inv = 1.0 / step;
  const long m = std::lround(inv);
  if (std::abs(inv - static_cast<double>(m)) > 1e-9) {
    throw Error("grid step must divide 1 into an integer number of parts");
  }
  if (m < 3) throw Error("grid step too coarse: no strictly positive weight triple exists");
  return static_cast<int>(m);
}

std::vector<WeightVector> weight_grid(const GridSpec& spec) {
  const int m = spec.divisions();
  std::vector<WeightVector> out;
  out.reserve(static_cast<std::size_t>((m - 1) * (m - 2) / 2));
  for (int a = 1; a <= m - 2; ++a) {
    for (int b = 1; b <= m - 1 - a; ++b) out.push_back(WeightVector::from_numerators(a, b, m - a - b));
  }
  return out;
}

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Embedding combine(const WeightVector& w, std::span<const double> e_bg,
                  std::span<const double> e_mt, std::span<const double> e_rs,
                  const CombineOptions& options) {
  if (e_bg.size() != e_mt.size() || e_bg.size() != e_rs.size()) {
    throw Error("combine: dimension mismatch");
  }
  double s_bg = 1.0, s_mt = 1.0, s_rs = 1.0;
  if (options.normalize_facets) {
    auto inv = [](double n) { return n > 0.0 ? 1.0 / n : 0.0; };
    s_bg = inv(norm(e_bg));
    s_mt = inv(norm(e_mt));
    s_rs = inv(norm(e_rs));
  }
  Embedding out(e_bg.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = w.bg() * (s_bg * e_bg[i]) + w.mt() * (s_mt * e_mt[i]) + w.rs() * (s_rs * e_rs[i]);
  }
  return out;
}

EmbeddingMap combine_all(const WeightVector& w, const FacetVectorMap& vectors,
                         const CombineOptions& options) {
  EmbeddingMap out;
  for (const auto& [id, f] : vectors) {
    out.emplace(id, combine(w, f.background, f.method, f.result, options));
  }
  return out;
}

EmbeddingMap single_facet(Facet facet, const FacetVectorMap& vectors) {
  EmbeddingMap out;
  for (const auto& [id, f] : vectors) out.emplace(id, f.get(facet));
  return out;
}

GridSearchResult grid_search(std::span<const WeightVector> grid, const ValidationTask& task,
                             const FacetVectorMap& vectors, const CombineOptions& options) {
  if (grid.empty()) throw Error("grid_search: empty grid");
  GridSearchResult result{grid.front(), 0.0, {}};
  result.table.reserve(grid.size());
  for (const auto& w : grid) {
    double score = 0.0;
    try {
      score = run_task(task, combine_all(w, vectors, options)).value;
    } catch (const Error& e) {
      throw Error("grid_search: task '" + task.name + "' failed at weights (" +
                  std::to_string(w.bg()) + ", " + std::to_string(w.mt()) + ", " +
                  std::to_string(w.rs()) + "): " + e.what());
    }
    if (result.table.empty() || score > result.best_score) {
      result.best = w;
      result.best_score = score;
    }
    result.table.push_back({w, score});
  }
  return result;
}

void write_weights_json(std::ostream& out, const std::string& task_id, const GridSpec& spec,
                        const GridSearchResult& result) {
  auto weight_json = [](const WeightVector& w) {
    json j{{"background", w.bg()}, {"method", w.mt()}, {"result", w.rs()}};
    if (w.numerators()) {
      j["numerators"] = *w.numerators();
      j["denominator"] = w.denominator();
    }
    return j;
  };
  json table = json::array();
  for (const auto& p : result.table) {
    json row = weight_json(p.weight);
    row["score"] = p.score;
    table.push_back(row);
  }
  out << json{{"task", task_id},
              {"step", spec.step},
              {"best", weight_json(result.best)},
              {"best_score", result.best_score},
              {"table", table}}
             .dump(2)
      << '\n';
}

WeightVector read_best_weight(std::istream& in) {
  const json doc = json::parse(in);
  const json& best = doc.at("best");
  if (best.contains("numerators")) {
    const auto n = best.at("numerators").get<std::array<int, 3>>();
    return WeightVector::from_numerators(n[0], n[1], n[2]);
  }
  return WeightVector::from_reals(best.at("background").get<double>(),
                                  best.at("method").get<double>(),
                                  best.at("result").get<double>());
}

void write_vectors(std::ostream& out, const EmbeddingMap& vectors) {
  const std::size_t dim = vectors.empty() ? 0 : vectors.begin()->second.size();
  io::write_magic(out, "FLEV");
  io::write_u32(out, 1);
  io::write_u32(out, static_cast<std::uint32_t>(dim));
  io::write_u64(out, vectors.size());
  for (const auto& [id, v] : vectors) {
    if (v.size() != dim) throw Error("write_vectors: ragged embeddings");
    io::write_string(out, id);
    for (double x : v) io::write_f32(out, static_cast<float>(x));
  }
}

EmbeddingMap read_vectors(std::istream& in) {
  io::expect_magic(in, "FLEV");
  if (io::read_u32(in) != 1) throw Error("vector file: unsupported version");
  const std::size_t dim = io::read_u32(in);
  const std::uint64_t count = io::read_u64(in);
  EmbeddingMap out;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id = io::read_string(in);
    std::vector<double> v(dim);
    for (double& x : v) x = io::read_f32(in);
    out.emplace(std::move(id), std::move(v));
  }
  return out;
}

}  // namespace flew
