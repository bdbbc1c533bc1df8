#include "spinach/llm/templates.hpp"

#include <algorithm>
#include <regex>

#include "spinach/common/text.hpp"

namespace spinach::llm {

namespace embedded {
extern const std::string_view policy_prompt;
extern const std::string_view prune_prompt;
} // namespace embedded

namespace {
const std::regex& slot_pattern()
{
    static const std::regex re(R"(\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\})");
    return re;
}
} // namespace

std::string_view to_string(TemplateId id) { return id == TemplateId::policy ? "policy" : "prune"; }

std::string_view template_text(TemplateId id)
{
    return id == TemplateId::policy ? embedded::policy_prompt : embedded::prune_prompt;
}

std::vector<std::string> template_slots(std::string_view text)
{
    std::vector<std::string> slots;
    std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), slot_pattern()); it != std::sregex_iterator(); ++it) {
        auto name = (*it)[1].str();
        if (std::find(slots.begin(), slots.end(), name) == slots.end()) {
            slots.push_back(name);
        }
    }
    return slots;
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& variables)
{
    std::string s(text);
    std::string out;
    std::size_t last = 0;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), slot_pattern()); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        auto found = variables.find(m[1].str());
        if (found == variables.end()) {
            throw UnboundSlot("template slot '" + m[1].str() + "' is not bound");
        }
        out.append(s, last, static_cast<std::size_t>(m.position(0)) - last);
        out += found->second;
        last = static_cast<std::size_t>(m.position(0) + m.length(0));
    }
    out.append(s, last);
    return out;
}

std::vector<ChatMessage> split_messages(std::string_view rendered)
{
    std::vector<ChatMessage> messages;
    std::string role;
    std::string body;
    auto flush = [&] {
        auto content = std::string(text::trim(body));
        if (!role.empty() && !content.empty()) {
            messages.push_back({role, content});
        }
        body.clear();
    };
    for (const auto& line : text::split_lines(rendered)) {
        std::string_view l = line;
        if (l.starts_with("# ")) {
            auto header = text::to_lower(std::string(text::trim(l.substr(2))));
            std::string next;
            if (header == "instruction") {
                next = "system";
            } else if (header.ends_with("input")) {
                next = "user";
            } else if (header.ends_with("output")) {
                next = "assistant";
            }
            if (!next.empty()) {
                flush();
                role = next;
                continue;
            }
        }
        if (role.empty()) {
            role = "user";
        }
        body += line;
        body += '\n';
    }
    flush();
    return messages;
}

} // namespace spinach::llm
