#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flew {

using PaperId = std::string;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Citation intent / document facet. The enumerator order is the canonical
/// iteration order (background < method < result).
enum class Facet : std::uint8_t { background = 0, method = 1, result = 2 };

inline constexpr std::array<Facet, 3> kFacets{Facet::background, Facet::method,
                                              Facet::result};

std::string_view to_string(Facet facet);
/// Two-letter tag used in file names and output model names ("bg", "mt", "rs").
std::string_view short_name(Facet facet);
std::optional<Facet> parse_facet(std::string_view text);

inline std::size_t index_of(Facet facet) { return static_cast<std::size_t>(facet); }

}  // namespace flew
