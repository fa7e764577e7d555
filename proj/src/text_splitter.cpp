#include "flew/text_splitter.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <utility>

#include "json.hpp"

namespace flew {

using nlohmann::json;

const std::string& FacetedAbstract::section(Facet facet) const {
  switch (facet) {
    case Facet::background: return background;
    case Facet::method: return method;
    case Facet::result: return result;
  }
  return background;
}

std::string& FacetedAbstract::section(Facet facet) {
  return const_cast<std::string&>(std::as_const(*this).section(facet));
}

namespace {

constexpr std::string_view kPromptTemplate =
    "Instruction: Here is the abstract of a scientific paper. Your task is to split the text into three "
    "distinct sections based on the content of sentences:\n"
    "1.Background: The context or previous knowledge related to the topic.\n"
    "2.Method: The methodology, approach, or contribution proposed in the paper.\n"
    "3.Result: The findings, outcomes, or conclusions derived from experiments or analysis.\n"
    "Please return the output in a structured JSON format, as shown below:\n"
    "{\"background\": \"xxx\",\"method\": \"xxx\",\"result\": \"xxx\"}\n"
    "Ensure that the original text remains intact in each section and that every sentence is "
    "categorized appropriately.\n"
    "Input: \"[abstract]\"\n"
    "Output:";

constexpr std::string_view kAbstractSlot = "[abstract]";

constexpr std::array<std::string_view, 5> kMethodCues{"we propose", "we present", "we introduce",
                                                      "our approach", "our method"};
constexpr std::array<std::string_view, 5> kResultCues{"results show", "experiments demonstrate",
                                                      "we achieve", "we find", "outperform"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

template <std::size_t N>
bool has_cue(const std::string& lowered, const std::array<std::string_view, N>& cues) {
  return std::any_of(cues.begin(), cues.end(), [&](std::string_view cue) {
    return lowered.find(cue) != std::string::npos;
  });
}

// [begin, end) byte ranges of trimmed sentences.
std::vector<std::pair<std::size_t, std::size_t>> sentence_spans(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  auto push = [&](std::size_t b, std::size_t e) {
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    if (b < e) spans.emplace_back(b, e);
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    if (j >= text.size() || !is_space(text[j])) continue;
    while (j < text.size() && is_space(text[j])) ++j;
    if (j >= text.size()) continue;
    const auto next = static_cast<unsigned char>(text[j]);
    if (std::isupper(next) || std::isdigit(next)) {
      push(start, i + 1);
      start = j;
      i = j - 1;
    }
  }
  push(start, text.size());
  return spans;
}

std::string join_sections(const FacetedAbstract& split) {
  std::string joined;
  for (const std::string* s : {&split.background, &split.method, &split.result}) {
    if (trim(*s).empty()) continue;
    if (!joined.empty()) joined += ' ';
    joined += *s;
  }
  return joined;
}

std::string_view strip_fence(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.size() >= 6 && s.substr(0, 3) == "```" && s.substr(s.size() - 3) == "```") {
    s.remove_suffix(3);
    const auto newline = s.find('\n');
    // The opening fence may carry a language tag, e.g. ```json.
    s = newline == std::string_view::npos ? s.substr(3) : s.substr(newline + 1);
    s = trim(s);
  }
  return s;
}

}  // namespace

std::string build_split_prompt(std::string_view abstract) {
  if (trim(abstract).empty()) throw Error("build_split_prompt: empty abstract");
  std::string prompt(kPromptTemplate);
  prompt.replace(prompt.find(kAbstractSlot), kAbstractSlot.size(), abstract);
  return prompt;
}

FacetedAbstract parse_split_response(std::string_view raw) {
  const std::string_view body = strip_fence(raw);
  json obj = json::parse(body.begin(), body.end(), nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded()) throw SplitSchemaError("", "split response is not valid JSON");
  if (!obj.is_object()) throw SplitSchemaError("", "split response is not a JSON object");
  FacetedAbstract out;
  for (Facet f : kFacets) {
    const std::string key(to_string(f));
    auto it = obj.find(key);
    if (it == obj.end()) throw SplitSchemaError(key, "split response missing key '" + key + "'");
    if (!it->is_string()) {
      throw SplitSchemaError(key, "split response key '" + key + "' is not a string");
    }
    out.section(f) = it->get<std::string>();
  }
  for (const auto& [key, _] : obj.items()) {
    if (!parse_facet(key) || key != to_string(*parse_facet(key))) {
      throw SplitSchemaError(key, "split response has unexpected key '" + key + "'");
    }
  }
  return out;
}

std::string serialize_split(const FacetedAbstract& split) {
  return json{{"background", split.background},
              {"method", split.method},
              {"result", split.result}}
      .dump();
}

std::vector<std::string> segment_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (auto [b, e] : sentence_spans(text)) out.emplace_back(text.substr(b, e - b));
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(text)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

SplitReport validate_split(std::string_view abstract, const FacetedAbstract& split) {
  SplitReport report;
  report.intact = normalize_whitespace(join_sections(split)) == normalize_whitespace(abstract);
  if (!report.intact) {
    report.diagnostics.push_back(
        "not intact: concatenated sections differ from the abstract after whitespace "
        "normalization");
  }

  std::map<std::string, int> expected;
  for (const auto& s : segment_sentences(abstract)) ++expected[normalize_whitespace(s)];
  std::map<std::string, int> found;
  for (Facet f : kFacets) {
    for (const auto& s : segment_sentences(split.section(f))) {
      ++found[normalize_whitespace(s)];
    }
  }
  report.coverage = true;
  for (const auto& [sentence, count] : expected) {
    const int got = found.contains(sentence) ? found.at(sentence) : 0;
    if (got != count) {
      report.coverage = false;
      report.diagnostics.push_back("sentence assigned " + std::to_string(got) +
                                   " time(s), expected " + std::to_string(count) + ": \"" +
                                   sentence + "\"");
    }
  }
  for (const auto& [sentence, _] : found) {
    if (!expected.contains(sentence)) {
      report.coverage = false;
      report.diagnostics.push_back("sentence not in abstract: \"" + sentence + "\"");
    }
  }
  return report;
}

FacetedAbstract heuristic_split(std::string_view abstract) {
  const auto spans = sentence_spans(abstract);
  if (spans.empty()) throw Error("heuristic_split: empty abstract");
  const std::size_t n = spans.size();

  enum class Cue { none, method, result };
  std::vector<Cue> cues(n, Cue::none);
  bool any_cue = false;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string lowered = lowercase(abstract.substr(spans[i].first,
                                                          spans[i].second - spans[i].first));
    if (has_cue(lowered, kMethodCues)) {
      cues[i] = Cue::method;
    } else if (has_cue(lowered, kResultCues)) {
      cues[i] = Cue::result;
    }
    any_cue = any_cue || cues[i] != Cue::none;
  }

  // Sections are contiguous: [0, a) background, [a, b) method, [b, n) result.
  std::size_t a = 0, b = 0;
  if (!any_cue) {
    const std::size_t third = (n + 2) / 3;
    a = std::min(third, n);
    b = std::min(a + third, n);
  } else {
    // Choose the cut points that place the most cued sentences in their own
    // section. Ties prefer the latest cuts, so cue-free sentences before the
    // first method sentence stay background and cue-free sentences only move
    // into the result section when a result cue follows them.
    std::vector<std::size_t> method_prefix(n + 1, 0), result_prefix(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      method_prefix[i + 1] = method_prefix[i] + (cues[i] == Cue::method);
      result_prefix[i + 1] = result_prefix[i] + (cues[i] == Cue::result);
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = i; j <= n; ++j) {
        const std::size_t score = (method_prefix[j] - method_prefix[i]) +
                                  (result_prefix[n] - result_prefix[j]);
        if (score >= best) {
          best = score;
          a = i;
          b = j;
        }
      }
    }
  }

  auto slice = [&](std::size_t from, std::size_t to) -> std::string {
    if (from >= to) return {};
    return std::string(abstract.substr(spans[from].first, spans[to - 1].second - spans[from].first));
  };
  return {slice(0, a), slice(a, b), slice(b, n)};
}

}  // namespace flew
