#pragma once

// Splitting abstracts into background / method / result sections: the LLM
// instruction prompt, a strict parser for the JSON reply, an intactness and
// coverage validator, and an offline cue-based splitter.

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "flew/types.hpp"

namespace flew {

struct FacetedAbstract {
  std::string background;
  std::string method;
  std::string result;

  const std::string& section(Facet facet) const;
  std::string& section(Facet facet);
  bool operator==(const FacetedAbstract&) const = default;
};

using SplitStore = std::map<PaperId, FacetedAbstract, std::less<>>;

struct SplitReport {
  bool intact = false;
  bool coverage = false;
  std::vector<std::string> diagnostics;

  bool ok() const { return intact && coverage; }
};

/// Raised when a reply does not match the three-string-field schema.
class SplitSchemaError : public Error {
 public:
  SplitSchemaError(const std::string& key, const std::string& message)
      : Error(message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// The instruction text with the abstract substituted for the input slot.
std::string build_split_prompt(std::string_view abstract);

/// Accepts exactly {"background": str, "method": str, "result": str}, optionally
/// surrounded by whitespace or wrapped in a ``` fenced block.
FacetedAbstract parse_split_response(std::string_view raw);
std::string serialize_split(const FacetedAbstract& split);

/// Splits after '.', '!' or '?' when followed by whitespace and then an
/// uppercase ASCII letter or a digit. Sentences are trimmed.
std::vector<std::string> segment_sentences(std::string_view text);

/// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

SplitReport validate_split(std::string_view abstract, const FacetedAbstract& split);

/// Cue-lexicon splitter; the output always validates against its input.
FacetedAbstract heuristic_split(std::string_view abstract);

}  // namespace flew
