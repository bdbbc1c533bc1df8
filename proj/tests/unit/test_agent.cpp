#include <doctest.h>

#include <random>

#include "scripted.hpp"
#include "spinach/agent/agent.hpp"
#include "spinach/llm/agent_io.hpp"

using namespace spinach;
using namespace spinach::agent;
using testing::QueuedPolicy;

namespace {

const std::string humans = "SELECT ?x WHERE { ?x wdt:P31 wd:Q5 }";
const std::string nothing = "SELECT ?x WHERE { ?x wdt:P31 wd:Q0 }";

std::string out(const std::string& thought, const std::string& action)
{
    return "Thought: " + thought + "\nAction: " + action;
}

std::shared_ptr<kb::RecordedKnowledgeBase> small_kb()
{
    auto kb = std::make_shared<kb::RecordedKnowledgeBase>();
    kb::SearchResult euler{{{kb::EntityId("Q7604"), "Leonhard Euler", "Swiss mathematician"}},
                           {{kb::PropertyId("P184"), "doctoral advisor", "person who supervised"}}};
    kb->put("search", "Euler", kb::encode(euler));
    testing::record_sparql(*kb, humans, testing::entity_table("x", {"Q1", "Q2", "Q3", "Q4"}));
    testing::record_sparql(*kb, nothing, testing::entity_table("x", {}));
    testing::record_sparql(*kb, "ASK { wd:Q1 wdt:P31 wd:Q5 }", kb::SparqlResponse(false));
    kb::EntityEntry entry{kb::EntityId("Q7604"), "Leonhard Euler", "Swiss mathematician", {}};
    entry.claims.push_back({kb::PropertyId("P184"), "doctoral advisor", {{{kb::ValueKind::entity, "Q6195", "Johann Bernoulli"}, {}}}});
    entry.claims.push_back({kb::PropertyId("P21"), "sex or gender", {{{kb::ValueKind::entity, "Q6581097", "male"}, {}}}});
    kb->put("entry", "Q7604", kb::encode(entry));
    return kb;
}

struct Run {
    AgentOutcome outcome;
    std::shared_ptr<QueuedPolicy> policy;
};

Run run(const std::vector<std::string>& outputs, AgentConfig config = {}, std::string prune_reply = "{}")
{
    auto policy = std::make_shared<QueuedPolicy>(outputs, prune_reply);
    llm::LlmGateway gateway(policy, llm::GatewayConfig{0, {}, {}});
    auto kb = small_kb();
    return {run_agent("Which items are humans?", config, gateway, *kb), policy};
}

AgentState states(std::initializer_list<Action> actions)
{
    AgentState s;
    std::size_t i = 0;
    for (const auto& a : actions) {
        s.steps.push_back({"t", a, "o", std::nullopt, i++});
    }
    return s;
}

} // namespace

TEST_CASE("search, query, stop ends with the query as the answer")
{
    auto r = run({out("find", "search_wikidata(\"Euler\")"), out("query", "execute_sparql(" + humans + ")"),
                  out("done", "stop()")});
    CHECK(r.outcome.stop_reason == StopReason::stopped);
    CHECK(r.outcome.actions_taken == 3);
    REQUIRE(r.outcome.final_sparql);
    CHECK(*r.outcome.final_sparql == humans);
    CHECK(r.outcome.final_result->table().rows.size() == 4);
    CHECK(r.outcome.trace.steps.size() == 3);
}

TEST_CASE("a policy that never stops is cut off at exactly 30 actions")
{
    std::vector<std::string> outputs;
    for (int i = 0; i < 40; ++i) {
        outputs.push_back(out("again", "search_wikidata(\"term " + std::to_string(i) + "\")"));
    }
    auto r = run(outputs);
    CHECK(r.outcome.stop_reason == StopReason::budget_exhausted);
    CHECK(r.outcome.actions_taken == 30);
    CHECK(r.outcome.trace.steps.size() == 30);
    CHECK_FALSE(r.outcome.final_sparql);
    CHECK(r.policy->requests.size() == 30);
}

TEST_CASE("budget exhaustion reports the last query with results")
{
    std::vector<std::string> outputs{out("q", "execute_sparql(" + humans + ")")};
    for (int i = 0; i < 10; ++i) {
        outputs.push_back(out("s", "search_wikidata(\"x" + std::to_string(i) + "\")"));
    }
    outputs.push_back(out("q", "execute_sparql(" + nothing + ")"));
    AgentConfig cfg;
    cfg.max_steps = 12;
    auto r = run(outputs, cfg);
    CHECK(r.outcome.stop_reason == StopReason::budget_exhausted);
    REQUIRE(r.outcome.final_sparql);
    CHECK(*r.outcome.final_sparql == humans);
}

TEST_CASE("a repeated action rolls back to before its first occurrence")
{
    const auto a = out("a", "search_wikidata(\"Euler\")");
    const auto b = out("b", "execute_sparql(" + humans + ")");
    auto r = run({b, a, a, out("c", "search_wikidata(\"other\")"), out("d", "stop()")});
    // b, a, then a again: the repeated search is rejected and the state rolls back to [b].
    REQUIRE(r.outcome.resets.size() == 1);
    const auto& reset = r.outcome.resets[0];
    CHECK(reset.reason == ResetReason::repetition);
    CHECK(reset.to_index == 1);
    REQUIRE(reset.discarded.size() == 1);
    CHECK(reset.discarded[0].action_index == 1);
    CHECK(reset.trigger.action_index == 2);
    CHECK(r.outcome.stop_reason == StopReason::stopped);
    CHECK(r.outcome.actions_taken == 5);
    REQUIRE(r.outcome.trace.steps.size() == 3);
    CHECK(r.outcome.trace.steps[1].action_index == 3);
}

TEST_CASE("rollback from a longer cycle keeps the strict prefix")
{
    const auto a = out("a", "search_wikidata(\"Euler\")");
    const auto b = out("b", "execute_sparql(" + humans + ")");
    auto r = run({b, a, b, a, a, out("z", "execute_sparql(ASK { wd:Q1 wdt:P31 wd:Q5 })"), out("s", "stop()")});
    REQUIRE(r.outcome.resets.size() == 1);
    CHECK(r.outcome.resets[0].to_index == 1);
    CHECK(r.outcome.resets[0].discarded.size() == 3);
    CHECK(r.outcome.stop_reason == StopReason::stopped);
    CHECK(r.outcome.trace.steps.size() == 3);
    CHECK(std::get<ExecuteSparql>(r.outcome.trace.steps[0].action).query == humans);
    CHECK(r.outcome.final_result->is_boolean());
}

TEST_CASE("stop after an empty result resets to the empty state")
{
    auto r = run({out("a", "search_wikidata(\"Euler\")"), out("q", "execute_sparql(" + nothing + ")"),
                  out("s", "stop()"), out("q", "execute_sparql(" + humans + ")"), out("s", "stop()")});
    REQUIRE(r.outcome.resets.size() == 1);
    CHECK(r.outcome.resets[0].reason == ResetReason::empty_stop);
    CHECK(r.outcome.resets[0].to_index == 0);
    CHECK(r.outcome.resets[0].discarded.size() == 2);
    CHECK(r.outcome.stop_reason == StopReason::stopped);
    CHECK(r.outcome.actions_taken == 5);
    CHECK(r.outcome.trace.steps.size() == 2);
    // The prompt after the reset shows no history.
    CHECK(llm::split_messages(llm::render_policy_prompt("Which items are humans?", {})) ==
          r.policy->requests[3].messages);
}

TEST_CASE("too many resets end the run")
{
    auto r = run({out("s", "stop()"), out("s", "stop()"), out("s", "stop()"), out("s", "stop()"), out("s", "stop()")});
    CHECK(r.outcome.stop_reason == StopReason::reset_limit);
    CHECK(r.outcome.actions_taken == 4);
    CHECK(r.outcome.resets.size() == 4);
    CHECK_FALSE(r.outcome.final_sparql);
}

TEST_CASE("unparseable outputs are retried, then fail")
{
    auto ok = run({"I am thinking", out("q", "execute_sparql(" + humans + ")"), "no idea", out("s", "stop()")});
    CHECK(ok.outcome.stop_reason == StopReason::stopped);
    CHECK(ok.outcome.actions_taken == 2);
    CHECK(ok.outcome.unparseable.size() == 2);

    CHECK_THROWS_AS(run({"a", "b", "c", "d", "e"}), PolicyFailure);
}

TEST_CASE("repetition rule table")
{
    const Action a = SearchWikidata{"a"};
    const Action b = SearchWikidata{"b"};
    const Action c = GetWikidataEntry{kb::EntityId("Q1")};
    CHECK(detect_repetition(states({a, b, a, a}), a) == 0u);
    CHECK_FALSE(detect_repetition(states({a, b}), c));
    CHECK(detect_repetition(states({a}), a) == 0u);
    CHECK_FALSE(detect_repetition(states({a, b}), a));
    CHECK_FALSE(detect_repetition(states({}), a));
    CHECK(detect_repetition(states({b, a}), a) == 1u);
    CHECK_FALSE(detect_repetition(states({a, ExecuteSparql{"SELECT ?x"}}), SearchWikidata{"SELECT ?x"}));
    CHECK(detect_repetition(states({ExecuteSparql{"SELECT ?x\n WHERE {}"}}), ExecuteSparql{"SELECT  ?x WHERE {}"}) == 0u);
    CHECK_FALSE(detect_repetition(states({SearchWikidata{"a b"}}), SearchWikidata{"a  b c"}));
    CHECK_FALSE(detect_repetition(states({Stop{}}), Stop{}));
}

TEST_CASE("repetition rule matches brute force over small sequences")
{
    // Oracle: a repetition is in progress iff `next` equals the last step; the
    // rollback target is then its earliest occurrence.
    const std::vector<Action> alphabet{SearchWikidata{"a"}, SearchWikidata{"b"}, ExecuteSparql{"q"}};
    std::vector<int> seq;
    for (int len = 0; len <= 5; ++len) {
        int total = 1;
        for (int i = 0; i < len; ++i) {
            total *= 3;
        }
        for (int code = 0; code < total; ++code) {
            AgentState s;
            int c = code;
            for (int i = 0; i < len; ++i) {
                s.steps.push_back({"", alphabet[static_cast<std::size_t>(c % 3)], "", std::nullopt, static_cast<std::size_t>(i)});
                c /= 3;
            }
            for (const auto& next : alphabet) {
                std::optional<std::size_t> expected;
                if (!s.steps.empty() && s.steps.back().action == next) {
                    for (std::size_t i = 0; i < s.steps.size(); ++i) {
                        if (s.steps[i].action == next) {
                            expected = i;
                            break;
                        }
                    }
                }
                CHECK(detect_repetition(s, next) == expected);
            }
        }
    }
}

TEST_CASE("reset_state keeps a prefix")
{
    auto five = states({SearchWikidata{"1"}, SearchWikidata{"2"}, SearchWikidata{"3"}, SearchWikidata{"4"}, SearchWikidata{"5"}});
    auto two = reset_state(five, 2);
    CHECK(two.steps.size() == 2);
    CHECK(two.resets == 1);
    CHECK(reset_state(five, 0).steps.empty());
    CHECK(reset_state(five, 5).steps.size() == 5);
    CHECK_THROWS_AS(reset_state(five, 6), IndexOutOfRange);
}

TEST_CASE("stop validation rule table")
{
    auto with_result = [](kb::SparqlResponse r) {
        AgentState s;
        s.steps.push_back({"", ExecuteSparql{"q"}, "", kb::ObservationPayload(r), 0});
        return s;
    };
    CHECK(validate_stop(with_result(testing::entity_table("x", {"Q1", "Q2", "Q3", "Q4"}))) == StopVerdict::accept);
    CHECK(validate_stop(with_result(testing::entity_table("x", {}))) == StopVerdict::reset_to_beginning);
    CHECK(validate_stop(with_result(kb::SparqlResponse(false))) == StopVerdict::accept);
    CHECK(validate_stop(with_result(kb::SparqlResponse(kb::SparqlError{kb::SparqlErrorKind::syntax, "x"}))) ==
          StopVerdict::reset_to_beginning);
    CHECK(validate_stop(states({SearchWikidata{"a"}})) == StopVerdict::reset_to_beginning);
    CHECK(validate_stop(AgentState{}) == StopVerdict::reset_to_beginning);

    // Only the most recent query counts.
    auto s = with_result(testing::entity_table("x", {"Q1"}));
    s.steps.push_back({"", ExecuteSparql{"q2"}, "", kb::ObservationPayload(testing::entity_table("x", {})), 1});
    s.steps.push_back({"", SearchWikidata{"z"}, "", std::nullopt, 2});
    CHECK(validate_stop(s) == StopVerdict::reset_to_beginning);
}

TEST_CASE("actions turn every outcome into an observation")
{
    auto kb = small_kb();
    testing::record_sparql(*kb, "SELEC oops", kb::SparqlResponse(kb::SparqlError{kb::SparqlErrorKind::syntax,
                                                                                   "Encountered \"SELEC\" at line 1"}));
    auto syntax = apply_action(ExecuteSparql{"SELEC oops"}, *kb, nullptr, "q");
    CHECK(syntax.text.find("Encountered \"SELEC\"") != std::string::npos);

    auto missing = apply_action(GetWikidataEntry{kb::EntityId("Q999")}, *kb, nullptr, "q");
    CHECK(missing.text.starts_with("Error:"));
    CHECK_FALSE(missing.payload);

    auto search = apply_action(SearchWikidata{"Euler"}, *kb, nullptr, "q");
    CHECK(search.text.find("Q7604") != std::string::npos);

    auto policy = std::make_shared<QueuedPolicy>(std::vector<std::string>{},
                                                 "{\"doctoral advisor (P184)\": \"Johann Bernoulli (Q6195)\"}");
    llm::LlmGateway gw(policy);
    auto entry = apply_action(GetWikidataEntry{kb::EntityId("Q7604")}, *kb, &gw, "Who advised Euler?");
    CHECK(entry.text.find("doctoral advisor (P184)") != std::string::npos);
    CHECK(entry.text.find("sex or gender") == std::string::npos);
    CHECK(std::get<kb::EntityEntry>(*entry.payload).claims.size() == 1);
    CHECK(policy->requests.size() == 1);
    CHECK(policy->requests[0].temperature == 0.0);
}

TEST_CASE("random policies respect every loop invariant")
{
    const std::vector<std::string> pool{
        out("s", "search_wikidata(\"Euler\")"),        out("e", "get_wikidata_entry(Q7604)"),
        out("e", "get_wikidata_entry(Q999)"),          out("p", "get_property_examples(P184)"),
        out("q", "execute_sparql(" + humans + ")"),    out("q", "execute_sparql(" + nothing + ")"),
        out("q", "execute_sparql(ASK { wd:Q1 wdt:P31 wd:Q5 })"), out("s", "stop()"),
        "garbage without an action"};
    std::mt19937 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> outputs;
        for (int i = 0; i < 60; ++i) {
            // Bias towards repeats so resets actually happen.
            outputs.push_back(i > 0 && rng() % 3 == 0 ? outputs.back() : pool[rng() % pool.size()]);
        }
        AgentConfig cfg;
        cfg.max_steps = 1 + static_cast<int>(rng() % 30);
        cfg.max_parse_retries = 100;
        auto policy = std::make_shared<QueuedPolicy>(outputs, "{}");
        llm::LlmGateway gateway(policy);
        auto kb = small_kb();
        AgentOutcome o;
        try {
            o = run_agent("Which items are humans?", cfg, gateway, *kb);
        } catch (const llm::ProviderError&) {
            continue; // script ran out before the run ended
        }
        CHECK(o.actions_taken <= cfg.max_steps);
        CHECK(static_cast<int>(o.trace.steps.size()) <= o.actions_taken);
        if (o.stop_reason == StopReason::stopped) {
            REQUIRE(o.final_result);
            CHECK(o.final_result->has_answer());
        }
        if (o.stop_reason == StopReason::reset_limit) {
            CHECK(static_cast<int>(o.resets.size()) == cfg.max_resets + 1);
        }
        for (const auto& r : o.resets) {
            if (r.reason == ResetReason::repetition) {
                CHECK_FALSE(r.discarded.empty()); // strict prefix
            } else {
                CHECK(r.to_index == 0);
            }
            for (std::size_t k = 0; k < r.discarded.size(); ++k) {
                CHECK(r.discarded[k].action_index < r.trigger.action_index);
            }
        }
        // The trace rebuilds exactly the policy prompts that were sent.
        std::vector<std::vector<llm::ChatMessage>> sent;
        for (const auto& req : policy->requests) {
            if (req.template_id == llm::TemplateId::policy) {
                sent.push_back(req.messages);
            }
        }
        auto json = trace_to_json(o);
        auto rebuilt = reconstruct_policy_prompts(json);
        REQUIRE(rebuilt.size() == sent.size());
        for (std::size_t i = 0; i < rebuilt.size(); ++i) {
            CHECK(llm::split_messages(rebuilt[i]) == sent[i]);
        }
        // Same script, same outcome.
        auto again_policy = std::make_shared<QueuedPolicy>(outputs, "{}");
        llm::LlmGateway again_gateway(again_policy);
        auto again = run_agent("Which items are humans?", cfg, again_gateway, *kb);
        CHECK(trace_to_json(again).dump() == json.dump());
    }
}
