#include <catch_amalgamated.hpp>

#include "flew/rng.hpp"
#include "flew/text_splitter.hpp"

using namespace flew;

TEST_CASE("prompt carries the instruction text verbatim") {
  const auto p = build_split_prompt("A. B.");
  CHECK_THAT(p, Catch::Matchers::ContainsSubstring("split the text into three distinct sections"));
  CHECK_THAT(p, Catch::Matchers::ContainsSubstring(
                    "Here is the abstract of a scientific paper. Your task is to split the text into three "
                    "distinct sections based on the content of sentences:"));
  CHECK_THAT(p, Catch::Matchers::ContainsSubstring(
                    "1.Background: The context or previous knowledge related to the topic."));
  CHECK_THAT(p, Catch::Matchers::ContainsSubstring(
                    "2.Method: The methodology, approach, or contribution proposed in the paper."));
  CHECK_THAT(p, Catch::Matchers::ContainsSubstring(
                    "3.Result: The findings, outcomes, or conclusions derived from experiments or analysis."));
  CHECK_THAT(p, Catch::Matchers::ContainsSubstring(
                    "Please return the output in a structured JSON format, as shown below:"));
  CHECK_THAT(p, Catch::Matchers::ContainsSubstring(
                    "Ensure that the original text remains intact in each section and that every sentence is "
                    "categorized appropriately."));
  CHECK_THAT(p, Catch::Matchers::ContainsSubstring("A. B."));
  CHECK_THAT(p, !Catch::Matchers::ContainsSubstring("[abstract]"));
}

TEST_CASE("prompt preserves quotes and differs only in the input") {
  const auto p = build_split_prompt("He said \"hi\".");
  CHECK_THAT(p, Catch::Matchers::ContainsSubstring("He said \"hi\"."));
  const auto a = build_split_prompt("First.");
  const auto b = build_split_prompt("Second.");
  const auto pos = a.find("First.");
  REQUIRE(pos != std::string::npos);
  CHECK(a.substr(0, pos) == b.substr(0, pos));
  CHECK(a.substr(pos + 6) == b.substr(pos + 7));
  CHECK_THROWS_AS(build_split_prompt(""), Error);
}

TEST_CASE("parse_split_response happy path and wrappers") {
  const FacetedAbstract expected{"a", "b", "c"};
  CHECK(parse_split_response(R"({"background":"a","method":"b","result":"c"})") == expected);
  CHECK(parse_split_response("  \n{\"background\":\"a\",\"method\":\"b\",\"result\":\"c\"}\n ") == expected);
  CHECK(parse_split_response("```json\n{\"background\":\"a\",\"method\":\"b\",\"result\":\"c\"}\n```") == expected);
  CHECK(parse_split_response("```\n{\"background\":\"a\",\"method\":\"b\",\"result\":\"c\"}```") == expected);
}

TEST_CASE("parse_split_response names the offending key") {
  auto key_of = [](const std::string& raw) {
    try {
      parse_split_response(raw);
    } catch (const SplitSchemaError& e) {
      return e.key();
    }
    return std::string("<accepted>");
  };
  CHECK(key_of(R"({"background":"a","method":"b"})") == "result");
  CHECK(key_of(R"({"background":"a","method":"b","result":"c","extra":1})") == "extra");
  CHECK(key_of(R"({"background":"a","method":2,"result":"c"})") == "method");
  CHECK(key_of(R"({"background":null,"method":"b","result":"c"})") == "background");
  CHECK_THROWS_AS(parse_split_response("not json"), SplitSchemaError);
  CHECK_THROWS_AS(parse_split_response(R"(["a","b","c"])"), SplitSchemaError);
}

TEST_CASE("parse after serialize is the identity") {
  const FacetedAbstract s{"Quote \" and\nnewline.", "", "Unicode caf\xc3\xa9."};
  CHECK(parse_split_response(serialize_split(s)) == s);
}

TEST_CASE("sentence segmentation") {
  CHECK(segment_sentences("A. B. C.") == std::vector<std::string>{"A.", "B.", "C."});
  CHECK(segment_sentences("We use e.g. this. Then 3 more! Why? yes.") ==
        std::vector<std::string>{"We use e.g. this.", "Then 3 more!", "Why? yes."});
  CHECK(segment_sentences("  ").empty());
}

TEST_CASE("validate_split examples") {
  CHECK(validate_split("A. B. C.", {"A.", "B.", "C."}).ok());
  const auto missing = validate_split("A. B. C.", {"A.", "", "C."});
  CHECK_FALSE(missing.intact);
  CHECK_FALSE(missing.diagnostics.empty());
  const auto twice = validate_split("A. B. C.", {"A. B.", "B. C.", ""});
  CHECK_FALSE(twice.coverage);
  CHECK(validate_split("A.  B.\n C.", {" A.", "B.\tC.", ""}).ok());
}

TEST_CASE("report is ok exactly when diagnostics are empty") {
  for (const FacetedAbstract& s : {FacetedAbstract{"A.", "B.", "C."}, FacetedAbstract{"A.", "C.", "B."},
                                   FacetedAbstract{"A.", "", ""}, FacetedAbstract{"A. B. C.", "", ""}}) {
    const auto r = validate_split("A. B. C.", s);
    CHECK(r.ok() == r.diagnostics.empty());
  }
}

TEST_CASE("heuristic_split examples") {
  CHECK(heuristic_split("X matters. We propose Y. Results show Z.") ==
        FacetedAbstract{"X matters.", "We propose Y.", "Results show Z."});
  CHECK(heuristic_split("One here. Two here. Three here.") == FacetedAbstract{"One here.", "Two here.", "Three here."});
  CHECK(heuristic_split("We propose Y.") == FacetedAbstract{"", "We propose Y.", ""});
  CHECK_THROWS_AS(heuristic_split(""), Error);
}

TEST_CASE("heuristic positional thirds use ceilings") {
  const auto s = heuristic_split("A1. A2. A3. A4. A5.");
  CHECK(s == FacetedAbstract{"A1. A2.", "A3. A4.", "A5."});
}

TEST_CASE("heuristic_split conserves sentences and validates on random abstracts") {
  const std::vector<std::string> pool{"Prior work is limited.", "We propose a model.", "Results show gains.",
                                      "Our method is simple.", "We find that it helps.", "Data are scarce.",
                                      "It outperforms baselines.", "We present two variants.", "See 3 cases."};
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    std::string abstract;
    const auto n = 1 + rng.uniform_index(9);
    for (std::size_t i = 0; i < n; ++i) abstract += pool[rng.uniform_index(pool.size())] + " ";
    const auto split = heuristic_split(abstract);
    REQUIRE(validate_split(abstract, split).ok());
    std::size_t count = 0;
    for (Facet f : kFacets) count += segment_sentences(split.section(f)).size();
    CHECK(count == segment_sentences(abstract).size());
  }
}
