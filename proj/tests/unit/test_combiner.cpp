#include <catch_amalgamated.hpp>

#include <sstream>

#include "flew/combiner.hpp"
#include "flew/rng.hpp"

using namespace flew;

TEST_CASE("combine examples") {
  const std::vector<double> v{0.3, -1.5};
  const auto third = WeightVector::from_numerators(1, 1, 1);
  const auto same = combine(third, v, v, v);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(same[i] == Catch::Approx(v[i]));

  const std::vector<double> e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};
  CHECK(combine(WeightVector::from_numerators(2, 1, 1), e1, e2, e3) == std::vector<double>{0.5, 0.25, 0.25});

  const auto r = combine(WeightVector::from_numerators(2, 3, 5), std::vector<double>{1, 0},
                         std::vector<double>{0, 1}, std::vector<double>{1, 1});
  CHECK(r[0] == Catch::Approx(0.7));
  CHECK(r[1] == Catch::Approx(0.8));
}

TEST_CASE("weight vectors enforce the simplex constraints") {
  CHECK_THROWS_AS(WeightVector::from_reals(0.5, 0.5, 0.0), Error);
  CHECK_THROWS_AS(WeightVector::from_reals(0.5, 0.5, 0.1), Error);
  CHECK_THROWS_AS(WeightVector::from_numerators(0, 1, 1), Error);
  CHECK(WeightVector::from_reals(0.2, 0.3, 0.5).bg() == 0.2);
  CHECK(WeightVector::from_numerators(1, 2, 1).denominator() == 4);
}

TEST_CASE("weight grid enumeration") {
  const auto g = weight_grid({0.25});
  REQUIRE(g.size() == 3);
  CHECK(g[0].values() == std::array<double, 3>{0.25, 0.25, 0.5});
  CHECK(g[1].values() == std::array<double, 3>{0.25, 0.5, 0.25});
  CHECK(g[2].values() == std::array<double, 3>{0.5, 0.25, 0.25});
  CHECK(weight_grid({0.2}).size() == 6);
  CHECK(weight_grid({0.05}).size() == 171);
  CHECK_THROWS_AS(weight_grid({0.5}), Error);
  CHECK_THROWS_AS(weight_grid({0.3}), Error);
}

TEST_CASE("combine is permutation equivariant and linear") {
  Rng rng(3);
  std::vector<double> a(4), b(4), c(4);
  for (auto* v : {&a, &b, &c}) {
    for (auto& x : *v) x = rng.uniform01();
  }
  const auto w = WeightVector::from_numerators(3, 5, 12);
  const auto w2 = WeightVector::from_numerators(12, 3, 5);
  const auto x = combine(w, a, b, c);
  const auto y = combine(w2, c, a, b);
  for (std::size_t i = 0; i < 4; ++i) CHECK(x[i] == Catch::Approx(y[i]));
  std::vector<double> a2 = a;
  for (auto& v : a2) v *= 2;
  const auto z = combine(w, a2, b, c);
  for (std::size_t i = 0; i < 4; ++i) CHECK(z[i] - x[i] == Catch::Approx(w.bg() * a[i]));
}

namespace {
// Background vectors separate two groups; method and result vectors are the
// same per-document noise.
FacetVectorMap bg_signal(double scale = 1.0) {
  FacetVectorMap m;
  Rng rng(41);
  for (int i = 0; i < 8; ++i) {
    const double g = i < 4 ? 1.0 : -1.0;
    std::vector<double> noise{0, 0, 0};
    for (auto& v : noise) v = scale * (rng.uniform01() * 6 - 3);
    FacetEmbeddings e{{scale * g, 0, 0}, noise, noise};
    m.emplace("d" + std::to_string(i), e);
  }
  return m;
}

ValidationTask group_task() {
  ValidationTask t;
  t.name = "grp";
  t.kind = TaskKind::proximity;
  t.metric = "map";
  for (int q = 0; q < 8; ++q) {
    ProximityQuery pq{"d" + std::to_string(q), {}};
    for (int c = 0; c < 8; ++c) {
      if (c != q) pq.candidates.push_back({"d" + std::to_string(c), (c < 4) == (q < 4) ? 1.0 : 0.0});
    }
    t.proximity.push_back(pq);
  }
  return t;
}

FacetVectorMap swap_bg_mt(const FacetVectorMap& in) {
  FacetVectorMap out;
  for (const auto& [id, e] : in) out.emplace(id, FacetEmbeddings{e.method, e.background, e.result});
  return out;
}
}  // namespace

TEST_CASE("grid search finds the signal-carrying facet") {
  const auto grid = weight_grid({0.1});
  const auto r = grid_search(grid, group_task(), bg_signal());
  CHECK(r.best.bg() == Catch::Approx(0.8));
  REQUIRE(r.table.size() == grid.size());
  for (const auto& p : r.table) {
    if (p.weight.bg() < 0.75) CHECK(p.score < r.best_score);
  }
  double max_score = 0.0;
  for (const auto& p : r.table) max_score = std::max(max_score, p.score);
  CHECK(r.best_score == max_score);
}

TEST_CASE("grid search returns the first point on a constant metric") {
  FacetVectorMap flat;
  for (int i = 0; i < 8; ++i) flat.emplace("d" + std::to_string(i), FacetEmbeddings{{1, 0}, {1, 0}, {1, 0}});
  const auto grid = weight_grid({0.2});
  CHECK(grid_search(grid, group_task(), flat).best == grid.front());
}

TEST_CASE("swapping facet roles swaps the best weights") {
  const auto grid = weight_grid({0.1});
  const auto a = grid_search(grid, group_task(), bg_signal());
  const auto b = grid_search(grid, group_task(), swap_bg_mt(bg_signal()));
  CHECK(b.best.mt() == Catch::Approx(a.best.bg()));
}

TEST_CASE("uniform scaling leaves the argmax unchanged") {
  const auto grid = weight_grid({0.1});
  CHECK(grid_search(grid, group_task(), bg_signal()).best == grid_search(grid, group_task(), bg_signal(3.5)).best);
}

TEST_CASE("grid search reports the failing grid point") {
  auto vectors = bg_signal();
  vectors.erase("d3");
  try {
    grid_search(weight_grid({0.25}), group_task(), vectors);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("0.25"));
  }
}

TEST_CASE("weights json and vector files round-trip") {
  const auto grid = weight_grid({0.25});
  const auto r = grid_search(grid, group_task(), bg_signal());
  std::ostringstream out;
  write_weights_json(out, "grp", {0.25}, r);
  std::istringstream in(out.str());
  CHECK(read_best_weight(in).values() == r.best.values());

  EmbeddingMap m{{"a", {1.5, -2.0}}, {"b", {0.25, 8.0}}};
  std::ostringstream vo;
  write_vectors(vo, m);
  std::istringstream vi(vo.str());
  CHECK(read_vectors(vi) == m);
}

TEST_CASE("normalized combination is scale free per facet") {
  CombineOptions opts{true};
  const auto w = WeightVector::from_numerators(1, 1, 2);
  const std::vector<double> a{3, 4}, b{0, 2}, c{1, 0};
  const std::vector<double> a10{30, 40};
  CHECK(combine(w, a, b, c, opts) == combine(w, a10, b, c, opts));
}
