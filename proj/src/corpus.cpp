#include "flew/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <tuple>

#include "json.hpp"

namespace flew {

using nlohmann::json;

bool PaperStore::insert(Paper paper) {
  auto id = paper.id;
  return papers_.emplace(std::move(id), std::move(paper)).second;
}

const Paper* PaperStore::find(std::string_view id) const {
  auto it = papers_.find(id);
  return it == papers_.end() ? nullptr : &it->second;
}

const Paper& PaperStore::at(std::string_view id) const {
  const Paper* p = find(id);
  if (!p) throw Error("unknown paper id '" + std::string(id) + "'");
  return *p;
}

std::vector<PaperId> PaperStore::ids() const {
  std::vector<PaperId> out;
  out.reserve(papers_.size());
  for (const auto& [id, _] : papers_) out.push_back(id);
  return out;
}

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

// Parses one line into an object, or records why it could not.
bool parse_object(const std::string& line, std::size_t lineno, json& out,
                  std::vector<LineError>& errors) {
  out = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (out.is_discarded()) {
    errors.push_back({lineno, "malformed JSON"});
    return false;
  }
  if (!out.is_object()) {
    errors.push_back({lineno, "record is not a JSON object"});
    return false;
  }
  return true;
}

bool string_field(const json& obj, const char* key, std::size_t lineno, std::string& out,
                  std::vector<LineError>& errors, bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (!required) {
      out.clear();
      return true;
    }
    errors.push_back({lineno, std::string("missing field '") + key + "'"});
    return false;
  }
  if (!it->is_string()) {
    errors.push_back({lineno, std::string("field '") + key + "' must be a string"});
    return false;
  }
  out = it->get<std::string>();
  return true;
}

}  // namespace

PaperIngestResult ingest_papers(std::istream& in) {
  PaperIngestResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json obj;
    if (!parse_object(line, lineno, obj, result.errors)) continue;
    Paper paper;
    if (!string_field(obj, "id", lineno, paper.id, result.errors) ||
        !string_field(obj, "title", lineno, paper.title, result.errors) ||
        !string_field(obj, "abstract", lineno, paper.abstract, result.errors,
                      /*required=*/false)) {
      continue;
    }
    if (paper.id.empty()) {
      result.errors.push_back({lineno, "empty id"});
      continue;
    }
    if (paper.title.empty()) {
      result.errors.push_back({lineno, "empty title for id '" + paper.id + "'"});
      continue;
    }
    const std::string id = paper.id;
    if (!result.store.insert(std::move(paper))) {
      result.errors.push_back({lineno, "duplicate id '" + id + "'"});
    }
  }
  return result;
}

CitationIngestResult ingest_citations(std::istream& in, const PaperStore& papers) {
  CitationIngestResult result;
  std::map<std::tuple<PaperId, PaperId, Facet>, std::uint64_t> merged;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json obj;
    if (!parse_object(line, lineno, obj, result.errors)) continue;
    std::string citing, cited, intent_text;
    if (!string_field(obj, "citing", lineno, citing, result.errors) ||
        !string_field(obj, "cited", lineno, cited, result.errors) ||
        !string_field(obj, "intent", lineno, intent_text, result.errors)) {
      continue;
    }
    auto count_it = obj.find("context_count");
    if (count_it == obj.end() || !count_it->is_number_integer()) {
      result.errors.push_back({lineno, "context_count must be an integer"});
      continue;
    }
    const auto count = count_it->get<std::int64_t>();
    if (count < 1) {
      result.errors.push_back({lineno, "context_count must be >= 1"});
      continue;
    }
    // Only the three full intent names are accepted in input records.
    auto intent = parse_facet(intent_text);
    if (!intent || intent_text != to_string(*intent)) {
      result.errors.push_back({lineno, "invalid intent '" + intent_text + "'"});
      continue;
    }
    if (citing == cited) {
      result.errors.push_back({lineno, "self-citation '" + citing + "'"});
      continue;
    }
    if (!papers.contains(citing) || !papers.contains(cited)) {
      const std::string& missing = papers.contains(citing) ? cited : citing;
      result.errors.push_back({lineno, "dangling endpoint '" + missing + "'"});
      continue;
    }
    merged[{citing, cited, *intent}] += static_cast<std::uint64_t>(count);
  }
  result.graph.nodes = papers.ids();
  result.graph.edges.reserve(merged.size());
  for (auto& [key, count] : merged) {
    result.graph.edges.push_back(
        {std::get<0>(key), std::get<1>(key), std::get<2>(key), count});
  }
  return result;
}

std::string encoder_input(std::string_view title, std::string_view abstract) {
  std::string out(title);
  if (!abstract.empty()) {
    out += kSeparatorToken;
    out += abstract;
  }
  return out;
}

void write_papers_jsonl(std::ostream& out, const PaperStore& store) {
  for (const auto& [id, paper] : store) {
    out << json{{"id", paper.id}, {"title", paper.title}, {"abstract", paper.abstract}}.dump()
        << '\n';
  }
}

void write_citations_jsonl(std::ostream& out, const CitationGraph& graph) {
  for (const auto& e : graph.edges) {
    out << json{{"citing", e.citing},
                {"cited", e.cited},
                {"intent", to_string(e.intent)},
                {"context_count", e.context_count}}
               .dump()
        << '\n';
  }
}

}  // namespace flew
