#include <map>

#include "spinach/agent/agent.hpp"
#include "spinach/kb/json.hpp"
#include "spinach/llm/agent_io.hpp"

namespace spinach::agent {

namespace {

using ojson = nlohmann::ordered_json;

ojson payload_json(const kb::ObservationPayload& payload)
{
    return std::visit(
        [](const auto& v) -> ojson {
            using T = std::decay_t<decltype(v)>;
            std::string type;
            if constexpr (std::is_same_v<T, kb::SearchResult>) {
                type = "search";
            } else if constexpr (std::is_same_v<T, kb::EntityEntry>) {
                type = "entry";
            } else if constexpr (std::is_same_v<T, kb::PropertyExamples>) {
                type = "examples";
            } else {
                type = "sparql";
            }
            return ojson{{"type", type}, {"value", ojson::parse(kb::encode(v).dump())}};
        },
        payload);
}

ojson step_json(const Step& step, bool with_observation = true)
{
    ojson j{{"action_index", step.action_index},
            {"thought", step.thought},
            {"action", {{"name", std::string(action_name(step.action))}, {"argument", action_argument(step.action)}}}};
    if (with_observation) {
        j["observation"] = step.observation;
        j["payload"] = step.payload ? payload_json(*step.payload) : ojson(nullptr);
    }
    return j;
}

Step step_from_json(const ojson& j)
{
    Step s{j.at("thought").get<std::string>(),
           make_action(j.at("action").at("name").get<std::string>(), j.at("action").at("argument").get<std::string>()),
           j.value("observation", ""), std::nullopt, j.at("action_index").get<std::size_t>()};
    return s;
}

} // namespace

nlohmann::ordered_json trace_to_json(const AgentOutcome& outcome)
{
    ojson steps = ojson::array();
    for (const auto& s : outcome.trace.steps) {
        steps.push_back(step_json(s));
    }
    ojson resets = ojson::array();
    for (const auto& r : outcome.resets) {
        ojson discarded = ojson::array();
        for (const auto& s : r.discarded) {
            discarded.push_back(step_json(s));
        }
        resets.push_back({{"reason", std::string(to_string(r.reason))},
                          {"to_index", r.to_index},
                          {"trigger", step_json(r.trigger, false)},
                          {"discarded", discarded}});
    }
    ojson unparseable = ojson::array();
    for (const auto& [index, raw] : outcome.unparseable) {
        unparseable.push_back({{"before_action_index", index}, {"raw", raw}});
    }
    ojson result_json = nullptr;
    if (outcome.final_result) {
        result_json = ojson::parse(kb::encode(*outcome.final_result).dump());
    }
    return ojson{{"question", outcome.question},
                 {"config", ojson::parse(outcome.config.to_json().dump())},
                 {"steps", steps},
                 {"resets", resets},
                 {"unparseable", unparseable},
                 {"outcome",
                  {{"stop_reason", std::string(to_string(outcome.stop_reason))},
                   {"actions_taken", outcome.actions_taken},
                   {"final_sparql", outcome.final_sparql ? ojson(*outcome.final_sparql) : ojson(nullptr)},
                   {"final_result", result_json}}}};
}

std::vector<std::string> reconstruct_policy_prompts(const nlohmann::ordered_json& trace)
{
    const auto question = trace.at("question").get<std::string>();
    // What happened at each action index: a step that entered the state, or a reset.
    std::map<std::size_t, Step> entered;
    std::map<std::size_t, std::size_t> reset_to;
    for (const auto& s : trace.at("steps")) {
        auto step = step_from_json(s);
        entered.emplace(step.action_index, std::move(step));
    }
    for (const auto& r : trace.at("resets")) {
        reset_to[r.at("trigger").at("action_index").get<std::size_t>()] = r.at("to_index").get<std::size_t>();
        for (const auto& s : r.at("discarded")) {
            auto step = step_from_json(s);
            entered.emplace(step.action_index, std::move(step));
        }
    }
    std::map<std::size_t, int> failures;
    for (const auto& u : trace.at("unparseable")) {
        ++failures[u.at("before_action_index").get<std::size_t>()];
    }

    std::vector<std::string> prompts;
    AgentState state;
    const auto actions = trace.at("outcome").at("actions_taken").get<std::size_t>();
    for (std::size_t i = 0; i < actions; ++i) {
        const auto prompt = llm::render_policy_prompt(question, state);
        for (int k = 0; k <= failures[i]; ++k) {
            prompts.push_back(prompt);
        }
        if (auto r = reset_to.find(i); r != reset_to.end()) {
            state = reset_state(state, r->second);
        } else if (auto e = entered.find(i); e != entered.end()) {
            state.steps.push_back(e->second);
        } else {
            throw InvalidArgument("trace has no record of action " + std::to_string(i));
        }
    }
    return prompts;
}

} // namespace spinach::agent
