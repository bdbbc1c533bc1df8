#include "spinach/agent/action.hpp"

#include "spinach/common/error.hpp"
#include "spinach/common/text.hpp"

namespace spinach::agent {

namespace {

template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

std::string strip_wd_prefix(std::string_view s)
{
    if (text::starts_with_icase(s, "wd:")) {
        s.remove_prefix(3);
    }
    return std::string(text::trim(s));
}

} // namespace

std::string_view action_name(const Action& action)
{
    return std::visit(overloaded{
                          [](const SearchWikidata&) { return std::string_view("search_wikidata"); },
                          [](const GetWikidataEntry&) { return std::string_view("get_wikidata_entry"); },
                          [](const GetPropertyExamples&) { return std::string_view("get_property_examples"); },
                          [](const ExecuteSparql&) { return std::string_view("execute_sparql"); },
                          [](const Stop&) { return std::string_view("stop"); },
                      },
                      action);
}

std::string action_argument(const Action& action)
{
    return std::visit(overloaded{
                          [](const SearchWikidata& a) { return a.query; },
                          [](const GetWikidataEntry& a) { return a.id.str(); },
                          [](const GetPropertyExamples& a) { return a.id.str(); },
                          [](const ExecuteSparql& a) { return a.query; },
                          [](const Stop&) { return std::string(); },
                      },
                      action);
}

Action make_action(std::string_view name, std::string_view argument)
{
    auto arg = std::string(text::trim(argument));
    if (name == "stop") {
        if (!arg.empty()) {
            throw InvalidArgument("stop() takes no argument");
        }
        return Stop{};
    }
    if (arg.empty()) {
        throw InvalidArgument(std::string(name) + " needs an argument");
    }
    if (name == "search_wikidata") {
        return SearchWikidata{text::collapse_whitespace(arg)};
    }
    if (name == "execute_sparql") {
        return ExecuteSparql{arg};
    }
    if (name == "get_wikidata_entry") {
        return GetWikidataEntry{kb::EntityId(strip_wd_prefix(arg))};
    }
    if (name == "get_property_examples") {
        return GetPropertyExamples{kb::PropertyId(strip_wd_prefix(arg))};
    }
    throw InvalidArgument("unknown action: " + std::string(name));
}

std::string render_action(const Action& action)
{
    auto arg = action_argument(action);
    if (std::holds_alternative<SearchWikidata>(action)) {
        arg = "\"" + arg + "\"";
    }
    return std::string(action_name(action)) + "(" + arg + ")";
}

std::string repetition_key(const Action& action)
{
    auto arg = action_argument(action);
    if (std::holds_alternative<ExecuteSparql>(action)) {
        arg = text::collapse_whitespace(arg);
    }
    return std::string(action_name(action)) + "\n" + arg;
}

} // namespace spinach::agent
