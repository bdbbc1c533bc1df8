#include "spinach/kb/ids.hpp"

#include <array>
#include <cctype>

namespace spinach::kb {

namespace detail {
bool matches_id_pattern(std::string_view s, char prefix)
{
    if (s.size() < 2 || s.front() != prefix || s[1] == '0') {
        return false;
    }
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            return false;
        }
    }
    return true;
}
} // namespace detail

std::optional<std::string> id_from_uri(std::string_view uri)
{
    static constexpr std::array<std::string_view, 2> hosts{"http://www.wikidata.org/", "https://www.wikidata.org/"};
    for (auto host : hosts) {
        if (uri.substr(0, host.size()) != host) {
            continue;
        }
        auto slash = uri.rfind('/');
        auto id = uri.substr(slash + 1);
        if (detail::matches_id_pattern(id, 'Q') || detail::matches_id_pattern(id, 'P')
            || detail::matches_id_pattern(id, 'L')) {
            return std::string(id);
        }
        return std::nullopt;
    }
    return std::nullopt;
}

} // namespace spinach::kb
