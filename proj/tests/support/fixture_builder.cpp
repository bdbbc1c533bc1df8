#include "fixture_builder.hpp"

#include <deque>
#include <fstream>

#include "spinach/agent/agent.hpp"
#include "spinach/bench/gold.hpp"
#include "spinach/bench/runner.hpp"
#include "spinach/common/text.hpp"
#include "spinach/kb/recorded.hpp"

namespace spinach::testing {

namespace {

using nlohmann::json;

std::string joined(const json& v)
{
    if (v.is_string()) {
        return v.get<std::string>();
    }
    std::string out;
    for (const auto& line : v) {
        if (!out.empty()) {
            out += '\n';
        }
        out += line.get<std::string>();
    }
    return out;
}

std::deque<std::string> script(const json& example, const char* key)
{
    std::deque<std::string> out;
    for (const auto& v : example.value(key, json::array())) {
        out.push_back(joined(v));
    }
    return out;
}

class Script final : public llm::LlmProvider {
public:
    Script(std::deque<std::string> policy, std::deque<std::string> prune)
        : policy_(std::move(policy)), prune_(std::move(prune))
    {
    }

    std::string complete(const llm::ChatRequest& request) override
    {
        auto& queue = request.template_id == llm::TemplateId::prune ? prune_ : policy_;
        if (queue.empty()) {
            throw llm::ProviderError(std::string("scenario has no more ") +
                                         std::string(llm::to_string(request.template_id)) + " outputs",
                                     false);
        }
        auto out = queue.front();
        queue.pop_front();
        return out;
    }

    std::size_t left() const { return policy_.size() + prune_.size(); }

private:
    std::deque<std::string> policy_;
    std::deque<std::string> prune_;
};

} // namespace

void build_fixture(const json& scenario, const std::filesystem::path& out)
{
    namespace fs = std::filesystem;
    for (const char* sub : {"gold", "transcripts", "traces"}) {
        fs::remove_all(out / sub);
        fs::create_directories(out / sub);
    }
    const auto snapshot = scenario.at("snapshot").get<std::string>();
    auto clock = [snapshot] { return snapshot; };

    auto kb = std::make_shared<kb::RecordedKnowledgeBase>();
    for (const auto& r : scenario.at("kb")) {
        auto op = r.at("operation").get<std::string>();
        auto arg = joined(r.at("argument"));
        kb->put(op, op == "sparql" ? text::collapse_whitespace(arg) : arg, r.at("payload"));
    }
    kb->save(out / "kb.json");

    agent::AgentConfig config;
    bench::GoldStore gold(out / "gold", clock);
    std::ofstream dataset(out / "dataset.jsonl");
    for (const auto& ex : scenario.at("examples")) {
        bench::DatasetExample example{ex.at("id").get<std::string>(), ex.at("question").get<std::string>(),
                                      joined(ex.at("sparql")), std::nullopt, bench::DatasetSource::custom};
        dataset << json{{"id", example.id}, {"question", example.question}, {"sparql", example.gold_sparql}}.dump()
                << '\n';
        bench::materialize_gold(example, *kb, gold);

        auto script_provider = std::make_shared<Script>(script(ex, "policy"), script(ex, "prune"));
        const auto name = bench::transcript_file_name(example.id);
        auto recorder =
            std::make_shared<llm::RecordingProvider>(script_provider, out / "transcripts" / (name + ".jsonl"), clock);
        llm::LlmGateway gateway(recorder, llm::GatewayConfig{0, std::chrono::milliseconds(0), std::nullopt});
        auto outcome = agent::run_agent(example.question, config, gateway, *kb);
        if (script_provider->left() != 0) {
            throw Error("scenario " + example.id + ": " + std::to_string(script_provider->left()) +
                        " scripted outputs were never requested");
        }
        std::ofstream(out / "traces" / (name + ".json")) << agent::trace_to_json(outcome).dump(2) << '\n';
    }
}

} // namespace spinach::testing
