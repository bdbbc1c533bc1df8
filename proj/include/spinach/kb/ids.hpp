#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "spinach/common/error.hpp"

namespace spinach::kb {

class InvalidId : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

namespace detail {
bool matches_id_pattern(std::string_view s, char prefix);
}

/// Identifier of the form `<Prefix><digits>`, e.g. Q7604 or P184.
template <char Prefix>
class WikidataId {
public:
    static std::optional<WikidataId> parse(std::string_view s)
    {
        if (!detail::matches_id_pattern(s, Prefix)) {
            return std::nullopt;
        }
        return WikidataId(s);
    }

    /// Throws InvalidId when `s` is not pattern-valid.
    explicit WikidataId(std::string_view s) : value_(s)
    {
        if (!detail::matches_id_pattern(s, Prefix)) {
            throw InvalidId("not a valid " + std::string(1, Prefix) + "-identifier: '" + std::string(s) + "'");
        }
    }

    const std::string& str() const noexcept { return value_; }

    auto operator<=>(const WikidataId&) const = default;

private:
    std::string value_;
};

using EntityId = WikidataId<'Q'>;
using PropertyId = WikidataId<'P'>;

/// Extracts the identifier from `http://www.wikidata.org/entity/Q42` style URIs
/// (also the `prop/direct/` and `prop/` families). Returns nullopt for other URIs.
std::optional<std::string> id_from_uri(std::string_view uri);

} // namespace spinach::kb
