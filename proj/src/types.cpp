#include "flew/types.hpp"

namespace flew {

std::string_view to_string(Facet facet) {
  switch (facet) {
    case Facet::background: return "background";
    case Facet::method: return "method";
    case Facet::result: return "result";
  }
  return "unknown";
}

std::string_view short_name(Facet facet) {
  switch (facet) {
    case Facet::background: return "bg";
    case Facet::method: return "mt";
    case Facet::result: return "rs";
  }
  return "??";
}

std::optional<Facet> parse_facet(std::string_view text) {
  for (Facet f : kFacets) {
    if (text == to_string(f) || text == short_name(f)) return f;
  }
  return std::nullopt;
}

}  // namespace flew
