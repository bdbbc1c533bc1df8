#include "spinach/agent/agent.hpp"

#include <fmt/format.h>

#include "spinach/llm/agent_io.hpp"

namespace spinach::agent {

void AgentConfig::validate() const
{
    if (max_steps < 1) {
        throw InvalidArgument("max_steps must be at least 1");
    }
    if (max_resets < 0 || max_parse_retries < 0) {
        throw InvalidArgument("max_resets and max_parse_retries must be non-negative");
    }
}

nlohmann::json AgentConfig::to_json() const
{
    return {{"max_steps", max_steps},
            {"max_resets", max_resets},
            {"max_parse_retries", max_parse_retries},
            {"action_timeout_ms", action_timeout.count()},
            {"prune_entries", prune_entries}};
}

std::string_view to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::stopped:
        return "stopped";
    case StopReason::budget_exhausted:
        return "budget_exhausted";
    case StopReason::reset_limit:
        return "reset_limit";
    }
    return "unknown";
}

std::string_view to_string(ResetReason reason)
{
    return reason == ResetReason::repetition ? "repetition" : "empty_stop";
}

std::optional<std::size_t> detect_repetition(const AgentState& state, const Action& next)
{
    if (state.steps.empty() || std::holds_alternative<Stop>(next)) {
        return std::nullopt;
    }
    const auto key = repetition_key(next);
    if (repetition_key(state.steps.back().action) != key) {
        return std::nullopt;
    }
    for (std::size_t i = 0; i < state.steps.size(); ++i) {
        if (repetition_key(state.steps[i].action) == key) {
            return i;
        }
    }
    return std::nullopt;
}

AgentState reset_state(const AgentState& state, std::size_t to_index)
{
    if (to_index > state.steps.size()) {
        throw IndexOutOfRange(fmt::format("reset index {} beyond {} steps", to_index, state.steps.size()));
    }
    AgentState out;
    out.steps.assign(state.steps.begin(), state.steps.begin() + static_cast<std::ptrdiff_t>(to_index));
    out.resets = state.resets + 1;
    return out;
}

namespace {

const Step* last_sparql_step(const std::vector<Step>& steps)
{
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        if (std::holds_alternative<ExecuteSparql>(it->action)) {
            return &*it;
        }
    }
    return nullptr;
}

const kb::SparqlResponse* sparql_payload(const Step& step)
{
    if (!step.payload) {
        return nullptr;
    }
    return std::get_if<kb::SparqlResponse>(&*step.payload);
}

} // namespace

StopVerdict validate_stop(const AgentState& state)
{
    const auto* step = last_sparql_step(state.steps);
    if (step == nullptr) {
        return StopVerdict::reset_to_beginning;
    }
    const auto* response = sparql_payload(*step);
    return response != nullptr && response->has_answer() ? StopVerdict::accept : StopVerdict::reset_to_beginning;
}

Observation apply_action(const Action& action, kb::KnowledgeBase& kb, llm::LlmGateway* pruner,
                         std::string_view question)
{
    try {
        return std::visit(
            [&](const auto& a) -> Observation {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, SearchWikidata>) {
                    auto r = kb.search_items(a.query);
                    return {kb::render_observation(r), r};
                } else if constexpr (std::is_same_v<T, GetWikidataEntry>) {
                    auto entry = kb.fetch_entity_entry(a.id);
                    if (pruner != nullptr) {
                        entry = llm::prune_entry(*pruner, question, entry);
                    }
                    return {kb::render_observation(entry), entry};
                } else if constexpr (std::is_same_v<T, GetPropertyExamples>) {
                    auto r = kb.fetch_property_examples(a.id);
                    return {kb::render_observation(r), r};
                } else if constexpr (std::is_same_v<T, ExecuteSparql>) {
                    auto r = kb.run_sparql(a.query);
                    return {kb::render_observation(r), r};
                } else {
                    return {"", std::nullopt};
                }
            },
            action);
    } catch (const llm::BudgetExceeded&) {
        throw;
    } catch (const Error& e) {
        return {std::string("Error: ") + e.what(), std::nullopt};
    }
}

AgentOutcome run_agent(std::string_view question, const AgentConfig& config, llm::LlmGateway& gateway,
                       kb::KnowledgeBase& kb)
{
    config.validate();
    if (question.empty()) {
        throw InvalidArgument("question must not be empty");
    }
    AgentOutcome out;
    out.question = std::string(question);
    out.config = config;
    AgentState state;
    // Best answer seen anywhere in the run, including steps later discarded.
    std::optional<Step> best;
    int parse_failures = 0;

    auto finish = [&](StopReason reason) {
        out.stop_reason = reason;
        out.trace = state;
        if (reason == StopReason::stopped) {
            const auto* step = last_sparql_step(state.steps);
            out.final_sparql = std::get<ExecuteSparql>(step->action).query;
            out.final_result = *sparql_payload(*step);
        } else if (best) {
            out.final_sparql = std::get<ExecuteSparql>(best->action).query;
            out.final_result = *sparql_payload(*best);
        }
        return out;
    };

    auto reset = [&](ResetReason reason, std::size_t to_index, Step trigger) {
        ResetEvent event{reason, to_index, std::move(trigger), {}};
        event.discarded.assign(state.steps.begin() + static_cast<std::ptrdiff_t>(to_index), state.steps.end());
        out.resets.push_back(std::move(event));
        state = reset_state(state, to_index);
        return state.resets > config.max_resets;
    };

    while (out.actions_taken < config.max_steps) {
        auto raw = gateway.complete(llm::policy_request(question, state));
        llm::ParsedAgentOutput parsed;
        try {
            parsed = llm::parse_agent_output(raw);
        } catch (const llm::UnparseableOutput& e) {
            out.unparseable.emplace_back(static_cast<std::size_t>(out.actions_taken), raw);
            if (++parse_failures > config.max_parse_retries) {
                throw PolicyFailure(fmt::format("{} consecutive unparseable policy outputs; last: {}", parse_failures,
                                                e.what()));
            }
            continue;
        }
        parse_failures = 0;
        Step step{parsed.thought, parsed.action, "", std::nullopt, static_cast<std::size_t>(out.actions_taken)};
        ++out.actions_taken;

        if (std::holds_alternative<Stop>(step.action)) {
            if (validate_stop(state) == StopVerdict::accept) {
                state.steps.push_back(std::move(step));
                return finish(StopReason::stopped);
            }
            if (reset(ResetReason::empty_stop, 0, std::move(step))) {
                return finish(StopReason::reset_limit);
            }
            continue;
        }
        if (auto first = detect_repetition(state, step.action)) {
            if (reset(ResetReason::repetition, *first, std::move(step))) {
                return finish(StopReason::reset_limit);
            }
            continue;
        }
        auto obs = apply_action(step.action, kb, config.prune_entries ? &gateway : nullptr, question);
        step.observation = std::move(obs.text);
        step.payload = std::move(obs.payload);
        if (const auto* r = sparql_payload(step); r != nullptr && r->has_answer()) {
            best = step;
        }
        state.steps.push_back(std::move(step));
    }
    return finish(StopReason::budget_exhausted);
}

} // namespace spinach::agent
