#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spinach/common/error.hpp"

namespace spinach::llm {

enum class TemplateId { policy, prune };

std::string_view to_string(TemplateId id);

/// The shipped template text (embedded from assets/prompts at build time).
std::string_view template_text(TemplateId id);

/// Slot names referenced as `{{ name }}`, in first-appearance order.
std::vector<std::string> template_slots(std::string_view text);

class UnboundSlot : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Substitutes every slot. Throws UnboundSlot when a slot has no binding.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& variables);

struct ChatMessage {
    std::string role;
    std::string content;
    bool operator==(const ChatMessage&) const = default;
};

/// Splits a rendered prompt on its `# ...` section headers: "instruction"
/// becomes a system message, headers ending in "input" user messages and
/// headers ending in "output" assistant messages. Header lines are dropped.
std::vector<ChatMessage> split_messages(std::string_view rendered);

} // namespace spinach::llm
