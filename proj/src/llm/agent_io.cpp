#include "spinach/llm/agent_io.hpp"

#include <regex>
#include <set>

#include "spinach/common/text.hpp"
#include "spinach/kb/render.hpp"

namespace spinach::llm {

namespace {

/// Drops markdown decoration around a line's label: leading "> ", "**", "-", "#", backticks.
std::string_view strip_decoration(std::string_view line)
{
    while (!line.empty() && std::string_view(" \t>*_#`-").find(line.front()) != std::string_view::npos) {
        line.remove_prefix(1);
    }
    return line;
}

/// If `line` starts with `label:` (ignoring decoration and case), returns the text after the colon.
std::optional<std::string_view> after_label(std::string_view line, std::string_view label)
{
    auto s = strip_decoration(line);
    if (!text::starts_with_icase(s, label)) {
        return std::nullopt;
    }
    s.remove_prefix(label.size());
    while (!s.empty() && (s.front() == '*' || s.front() == '_' || s.front() == ' ')) {
        s.remove_prefix(1);
    }
    if (s.empty() || s.front() != ':') {
        return std::nullopt;
    }
    s.remove_prefix(1);
    while (!s.empty() && std::string_view(" \t*_").find(s.front()) != std::string_view::npos) {
        s.remove_prefix(1);
    }
    return s;
}

std::string strip_fences(std::string_view s)
{
    auto t = std::string(text::trim(s));
    if (t.starts_with("```")) {
        auto nl = t.find('\n');
        t = nl == std::string::npos ? t.substr(3) : t.substr(nl + 1);
        auto end = t.rfind("```");
        if (end != std::string::npos) {
            t = t.substr(0, end);
        }
    } else if (t.size() >= 2 && t.front() == '`' && t.back() == '`') {
        t = t.substr(1, t.size() - 2);
    }
    return std::string(text::trim(t));
}

std::string strip_outer_quotes(std::string s)
{
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

/// Locates "name(" for one of the five actions; returns name and the offset just past '('.
std::optional<std::pair<std::string, std::size_t>> find_call(std::string_view s)
{
    static const std::regex call(
        R"((search_wikidata|get_wikidata_entry|get_property_examples|execute_sparql|stop)\s*\()",
        std::regex::icase);
    std::string str(s);
    std::smatch m;
    if (!std::regex_search(str, m, call)) {
        return std::nullopt;
    }
    return std::pair{text::to_lower(m[1].str()), static_cast<std::size_t>(m.position(0) + m.length(0))};
}

} // namespace

std::string render_policy_prompt(std::string_view question, const agent::AgentState& state)
{
    return policy_request(question, state).render();
}

LlmRequest policy_request(std::string_view question, const agent::AgentState& state)
{
    return LlmRequest::policy(std::string(question), agent::render_history(state));
}

ParsedAgentOutput parse_agent_output(std::string_view raw)
{
    auto lines = text::split_lines(raw);
    // Everything the model invents after its action is discarded.
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (after_label(lines[i], "Observation")) {
            lines.resize(i);
            break;
        }
    }

    std::optional<std::size_t> thought_line;
    std::optional<std::size_t> action_line;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!thought_line && !action_line && after_label(lines[i], "Thought")) {
            thought_line = i;
        }
        if (!action_line && after_label(lines[i], "Action")) {
            action_line = i;
        }
    }

    // The action text: from the "Action:" label, or from the first call-looking line.
    std::string tail;
    std::size_t tail_start = lines.size();
    if (action_line) {
        tail_start = *action_line;
        tail = std::string(*after_label(lines[*action_line], "Action"));
        for (std::size_t i = *action_line + 1; i < lines.size(); ++i) {
            tail += "\n" + lines[i];
        }
    } else {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (find_call(lines[i])) {
                tail_start = i;
                for (std::size_t j = i; j < lines.size(); ++j) {
                    tail += (j == i ? "" : "\n") + lines[j];
                }
                break;
            }
        }
    }
    auto call = find_call(tail);
    if (!call) {
        throw UnparseableOutput("no action found in model output");
    }
    const auto& [name, open] = *call;

    std::string argument;
    if (name == "execute_sparql") {
        auto close = tail.rfind(')');
        if (close == std::string::npos || close < open) {
            throw UnparseableOutput("unterminated execute_sparql argument");
        }
        argument = strip_fences(std::string_view(tail).substr(open, close - open));
    } else {
        auto line_end = tail.find('\n', open);
        auto line = std::string_view(tail).substr(open, line_end == std::string::npos ? std::string::npos
                                                                                     : line_end - open);
        auto close = line.rfind(')');
        if (close == std::string_view::npos) {
            throw UnparseableOutput("unterminated " + name + " argument");
        }
        argument = strip_outer_quotes(strip_fences(line.substr(0, close)));
    }

    ParsedAgentOutput out;
    try {
        out.action = agent::make_action(name, argument);
    } catch (const InvalidArgument& e) {
        throw UnparseableOutput(std::string("invalid action: ") + e.what());
    }

    std::string thought;
    if (thought_line) {
        thought = std::string(*after_label(lines[*thought_line], "Thought"));
        for (std::size_t i = *thought_line + 1; i < tail_start; ++i) {
            thought += "\n" + lines[i];
        }
    } else {
        for (std::size_t i = 0; i < tail_start; ++i) {
            thought += (i == 0 ? "" : "\n") + lines[i];
        }
    }
    out.thought = std::string(text::trim(thought));
    return out;
}

std::string render_agent_output(const ParsedAgentOutput& output)
{
    return "Thought: " + output.thought + "\nAction: " + agent::render_action(output.action);
}

kb::EntityEntry apply_prune_reply(std::string_view reply, const kb::EntityEntry& entry)
{
    auto body = strip_fences(reply);
    auto first = body.find('{');
    auto last = body.rfind('}');
    if (first == std::string::npos || last == std::string::npos || last < first) {
        return entry;
    }
    body = body.substr(first, last - first + 1);

    // The few-shot examples elide content with "..." lines and leave trailing commas.
    std::string cleaned;
    for (const auto& line : text::split_lines(body)) {
        auto t = text::trim(line);
        if (t == "..." || t == "...,") {
            continue;
        }
        cleaned += line;
        cleaned += '\n';
    }
    static const std::regex trailing_comma(R"(,(\s*[\}\]]))");
    cleaned = std::regex_replace(cleaned, trailing_comma, "$1");

    nlohmann::ordered_json kept;
    try {
        kept = nlohmann::ordered_json::parse(cleaned);
    } catch (const nlohmann::json::exception&) {
        return entry;
    }
    if (!kept.is_object()) {
        return entry;
    }

    auto selected_texts = [](const nlohmann::ordered_json& v) {
        std::set<std::string> texts;
        if (v.is_string()) {
            texts.insert(v.get<std::string>());
        } else if (v.is_object()) {
            for (const auto& [k, _] : v.items()) {
                texts.insert(k);
            }
        } else if (v.is_array()) {
            for (const auto& e : v) {
                if (e.is_string()) {
                    texts.insert(e.get<std::string>());
                }
            }
        }
        return texts;
    };

    kb::EntityEntry pruned = entry;
    pruned.claims.clear();
    for (const auto& claim : entry.claims) {
        auto key = kb::claim_key(claim);
        auto it = kept.find(key);
        if (it == kept.end()) {
            continue;
        }
        auto texts = selected_texts(*it);
        kb::Claim filtered = claim;
        filtered.values.clear();
        for (const auto& v : claim.values) {
            if (texts.contains(kb::datum_text(v.datum))) {
                filtered.values.push_back(v);
            }
        }
        // A reply that reformats the values still selects the claim as a whole.
        pruned.claims.push_back(filtered.values.empty() ? claim : filtered);
    }
    return pruned;
}

kb::EntityEntry prune_entry(LlmGateway& gateway, std::string_view question, const kb::EntityEntry& entry)
{
    if (entry.claims.empty()) {
        return entry;
    }
    try {
        auto reply = gateway.complete(LlmRequest::prune(std::string(question), kb::entity_and_description(entry),
                                                        kb::entry_claims_json(entry).dump(2)));
        return apply_prune_reply(reply, entry);
    } catch (const Error&) {
        return entry;
    }
}

} // namespace spinach::llm
