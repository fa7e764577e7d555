#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "flew/rng.hpp"
#include "flew/types.hpp"

using namespace flew;

TEST_CASE("fnv1a64 matches published vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("Rng streams are reproducible and keyed") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
}

TEST_CASE("uniform_index stays in range and covers it") {
  Rng rng(3);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.uniform_index(7);
    REQUIRE(v < 7);
    ++seen[v];
  }
  for (int s : seen) CHECK(s > 800);
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(9);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  rng.shuffle(w);
  CHECK(w != v);
  std::sort(w.begin(), w.end());
  CHECK(w == v);
}

TEST_CASE("counter_uniform_symmetric lies in [-1, 1)") {
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const double v = counter_uniform_symmetric(k);
    REQUIRE(v >= -1.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("facet names parse in full and short form") {
  for (Facet f : kFacets) {
    CHECK(parse_facet(to_string(f)) == f);
    CHECK(parse_facet(short_name(f)) == f);
  }
  CHECK_FALSE(parse_facet("Background").has_value());
  CHECK(index_of(Facet::result) == 2);
}
