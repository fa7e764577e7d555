#include "flew/triplet_sampler.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "flew/rng.hpp"
#include "json.hpp"

namespace flew {

using nlohmann::json;

void SamplerPolicy::validate() const {
  if (!(k_pos >= 1 && k_pos < hard_lo && hard_lo <= hard_hi)) {
    throw Error("sampler policy: require 1 <= k_pos < hard_lo <= hard_hi");
  }
  if (triplets_per_query < 1) throw Error("sampler policy: triplets_per_query must be >= 1");
  if (!(hard_fraction >= 0.0 && hard_fraction <= 1.0)) {
    throw Error("sampler policy: hard_fraction must lie in [0, 1]");
  }
}

SampleResult sample_triplets(const NodeEmbeddingTable& table, std::span<const PaperId> queries,
                             const SamplerPolicy& policy,
                             const WeightedFacetSubgraph* citations) {
  policy.validate();
  SampleResult result;
  if (queries.empty()) return result;
  if (table.size() <= policy.hard_hi) {
    throw Error("sample_triplets: table has " + std::to_string(table.size()) +
                " nodes but the rank windows need more than " + std::to_string(policy.hard_hi) +
                " (short by " + std::to_string(policy.hard_hi + 1 - table.size()) + ")");
  }
  if (policy.exclude_cited_from_negatives && citations == nullptr) {
    throw Error("sample_triplets: exclude_cited_from_negatives requires the facet subgraph");
  }

  std::set<std::pair<std::string_view, std::string_view>> cited;
  if (policy.exclude_cited_from_negatives) {
    for (const auto& e : citations->edges) cited.emplace(e.citing, e.cited);
  }

  const auto& ids = table.ids();
  for (const auto& query : queries) {
    const std::size_t qi = table.index_of(query);
    if (qi == table.size()) {
      throw Error("sample_triplets: query '" + query + "' not in embedding table");
    }
    const auto ranked = rank_by_distance(table, qi);
    const std::size_t others = ranked.size();
    const auto q = table.row(qi);
    Rng rng(combine_keys(combine_keys(policy.seed, index_of(table.facet())), fnv1a64(query)));

    // Draws a 1-based rank uniformly from [lo, hi].
    auto draw_rank = [&](std::size_t lo, std::size_t hi) {
      return lo + static_cast<std::size_t>(rng.uniform_index(hi - lo + 1));
    };

    for (std::size_t t = 0; t < policy.triplets_per_query; ++t) {
      bool emitted = false;
      for (std::size_t attempt = 0; attempt <= policy.max_redraws && !emitted; ++attempt) {
        const std::size_t pos = ranked[draw_rank(1, policy.k_pos) - 1];
        const bool hard = policy.hard_hi >= others || rng.uniform01() < policy.hard_fraction;
        const std::size_t neg_rank =
            hard ? draw_rank(policy.hard_lo, policy.hard_hi) : draw_rank(policy.hard_hi + 1, others);
        const std::size_t neg = ranked[neg_rank - 1];
        if (pos == neg) continue;
        if (!(cosine_distance(q, table.row(pos)) < cosine_distance(q, table.row(neg)))) continue;
        if (policy.exclude_cited_from_negatives && cited.contains({query, ids[neg]})) continue;
        result.triplets.push_back({table.facet(), query, ids[pos], ids[neg]});
        emitted = true;
      }
      if (!emitted) {
        result.skips.push_back({query, "no valid negative after " +
                                           std::to_string(policy.max_redraws + 1) + " draws"});
      }
    }
  }
  return result;
}

std::string_view to_string(TextualMode mode) {
  return mode == TextualMode::full ? "full" : "faceted";
}

TextualMode parse_textual_mode(std::string_view text) {
  if (text == "full") return TextualMode::full;
  if (text == "faceted") return TextualMode::faceted;
  throw Error("unknown textual mode '" + std::string(text) + "' (expected full or faceted)");
}

FacetTextTriplet materialize_triplet(const FacetTriplet& triplet, const PaperStore& papers,
                                     TextualMode mode, const SplitStore& splits) {
  auto role = [&](const PaperId& id) {
    const Paper* paper = papers.find(id);
    if (!paper) throw Error("materialize_triplet: no metadata for '" + id + "'");
    TextRole r{id, paper->title, paper->abstract, false};
    if (mode == TextualMode::faceted) {
      auto it = splits.find(id);
      if (it == splits.end()) throw Error("materialize_triplet: no split for '" + id + "'");
      r.text = it->second.section(triplet.facet);
      r.empty_section = r.text.empty();
    }
    return r;
  };
  return {triplet.facet, mode, role(triplet.query), role(triplet.positive),
          role(triplet.negative)};
}

void write_triplets_jsonl(std::ostream& out, std::span<const FacetTriplet> triplets) {
  for (const auto& t : triplets) {
    out << json{{"facet", to_string(t.facet)},
                {"query", t.query},
                {"positive", t.positive},
                {"negative", t.negative}}
               .dump()
        << '\n';
  }
}

std::vector<FacetTriplet> read_triplets_jsonl(std::istream& in) {
  std::vector<FacetTriplet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json obj = json::parse(line);
      auto facet = parse_facet(obj.at("facet").get<std::string>());
      if (!facet) throw Error("bad facet");
      out.push_back({*facet, obj.at("query").get<std::string>(),
                     obj.at("positive").get<std::string>(),
                     obj.at("negative").get<std::string>()});
    } catch (const std::exception& e) {
      throw Error("triplets line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_text_triplets_jsonl(std::ostream& out, std::span<const FacetTextTriplet> triplets) {
  auto role = [](const TextRole& r) {
    return json{{"id", r.id}, {"title", r.title}, {"text", r.text}, {"empty_section", r.empty_section}};
  };
  for (const auto& t : triplets) {
    out << json{{"facet", to_string(t.facet)},
                {"mode", to_string(t.mode)},
                {"query", role(t.query)},
                {"positive", role(t.positive)},
                {"negative", role(t.negative)}}
               .dump()
        << '\n';
  }
}

}  // namespace flew
