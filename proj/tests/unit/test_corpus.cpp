#include <catch_amalgamated.hpp>

#include <sstream>

#include "flew/corpus.hpp"

using namespace flew;

namespace {
PaperIngestResult ingest(const std::string& text) {
  std::istringstream in(text);
  return ingest_papers(in);
}

PaperStore abc() {
  return ingest(R"({"id":"A","title":"a","abstract":"x"}
{"id":"B","title":"b","abstract":"y"}
{"id":"C","title":"c","abstract":""}
)").store;
}

CitationIngestResult cites(const std::string& text, const PaperStore& store) {
  std::istringstream in(text);
  return ingest_citations(in, store);
}
}  // namespace

TEST_CASE("ingest_papers accepts distinct records") {
  auto r = ingest(R"({"id":"A","title":"T1","abstract":"x"}
{"id":"B","title":"T2","abstract":"y"})");
  CHECK(r.store.size() == 2);
  CHECK(r.errors.empty());
  CHECK(r.store.at("B").title == "T2");
}

TEST_CASE("ingest_papers rejects duplicates after the first") {
  auto r = ingest(R"({"id":"A","title":"first","abstract":""}
{"id":"A","title":"second","abstract":""})");
  CHECK(r.store.size() == 1);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].line == 2);
  CHECK(r.store.at("A").title == "first");
}

TEST_CASE("ingest_papers rejects an empty title") {
  auto r = ingest(R"({"id":"A","title":"","abstract":"x"})");
  CHECK(r.store.size() == 0);
  CHECK(r.errors.size() == 1);
}

TEST_CASE("ingest_papers reports malformed lines and keeps going") {
  auto r = ingest("{not json}\n\n{\"id\":\"A\",\"title\":\"t\"}\n{\"title\":\"no id\"}\n");
  CHECK(r.store.size() == 1);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0].line == 1);
  CHECK(r.errors[1].line == 4);
  CHECK(r.store.at("A").abstract.empty());
}

TEST_CASE("ingesting the same stream twice is idempotent and order independent") {
  const std::string a = R"({"id":"A","title":"a","abstract":"x"})";
  const std::string b = R"({"id":"B","title":"b","abstract":"y"})";
  CHECK(ingest(a + "\n" + b).store == ingest(a + "\n" + b).store);
  CHECK(ingest(a + "\n" + b).store == ingest(b + "\n" + a).store);
}

TEST_CASE("ingest_citations keeps a valid edge with its count") {
  auto r = cites(R"({"citing":"A","cited":"B","intent":"background","context_count":2})", abc());
  REQUIRE(r.graph.edges.size() == 1);
  CHECK(r.graph.edges[0].context_count == 2);
  CHECK(r.graph.edges[0].intent == Facet::background);
  CHECK(r.errors.empty());
}

TEST_CASE("ingest_citations drops dangling endpoints") {
  auto r = cites(R"({"citing":"A","cited":"Z","intent":"method","context_count":1})", abc());
  CHECK(r.graph.edges.empty());
  CHECK(r.errors.size() == 1);
}

TEST_CASE("ingest_citations merges repeated lines by summing") {
  auto r = cites(R"({"citing":"A","cited":"B","intent":"result","context_count":1}
{"citing":"A","cited":"B","intent":"result","context_count":1})",
                 abc());
  REQUIRE(r.graph.edges.size() == 1);
  CHECK(r.graph.edges[0].context_count == 2);
}

TEST_CASE("ingest_citations rejects bad intents, counts and self loops") {
  auto r = cites(R"({"citing":"A","cited":"B","intent":"uses","context_count":1}
{"citing":"A","cited":"B","intent":"method","context_count":0}
{"citing":"A","cited":"A","intent":"method","context_count":1}
{"citing":"A","cited":"B","intent":"method","context_count":1.5}
{"citing":"A","cited":"C","intent":"method","context_count":3})",
                 abc());
  CHECK(r.errors.size() == 4);
  REQUIRE(r.graph.edges.size() == 1);
  CHECK(r.graph.edges[0].cited == "C");
}

TEST_CASE("the same pair may carry several intents") {
  auto r = cites(R"({"citing":"A","cited":"B","intent":"result","context_count":1}
{"citing":"A","cited":"B","intent":"method","context_count":1})",
                 abc());
  CHECK(r.graph.edges.size() == 2);
}

TEST_CASE("citation graph invariants hold") {
  const std::string text = R"({"citing":"A","cited":"B","intent":"result","context_count":1}
{"citing":"B","cited":"C","intent":"method","context_count":4}
{"citing":"C","cited":"Q","intent":"method","context_count":4})";
  auto r = cites(text, abc());
  CHECK(r.graph.edges.size() <= 3);
  CHECK(r.graph.nodes == std::vector<PaperId>{"A", "B", "C"});
  for (const auto& e : r.graph.edges) {
    CHECK(std::binary_search(r.graph.nodes.begin(), r.graph.nodes.end(), e.citing));
    CHECK(std::binary_search(r.graph.nodes.begin(), r.graph.nodes.end(), e.cited));
  }
}

TEST_CASE("encoder_input joins title and abstract with the separator") {
  CHECK(encoder_input("Deep Nets", "We study X.") == "Deep Nets[SEP]We study X.");
  CHECK(encoder_input("T", "") == "T");
  CHECK(encoder_input("A[SEP]B", "C") == "A[SEP]B[SEP]C");
}

TEST_CASE("encoder_input is injective for separator-free titles") {
  CHECK(encoder_input("ab", "c") != encoder_input("a", "bc"));
  CHECK(encoder_input("a", "") != encoder_input("a", "x"));
}

TEST_CASE("canonical jsonl writers round-trip") {
  const PaperStore store = abc();
  std::ostringstream out;
  write_papers_jsonl(out, store);
  CHECK(ingest(out.str()).store == store);

  auto r = cites(R"({"citing":"A","cited":"B","intent":"result","context_count":3})", store);
  std::ostringstream cout_;
  write_citations_jsonl(cout_, r.graph);
  CHECK(cites(cout_.str(), store).graph == r.graph);
}
