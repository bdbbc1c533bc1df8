#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include "fixture_builder.hpp"
#include "scripted.hpp"
#include "spinach/bench/config.hpp"
#include "spinach/bench/runner.hpp"
#include "temp_dir.hpp"

using namespace spinach;
using namespace spinach::bench;
using spinach::testing::read_file;
using spinach::testing::TempDir;
using spinach::testing::write_file;

namespace {

const std::filesystem::path fixtures = SPINACH_FIXTURE_DIR;

/// Counts queries that reach the wrapped knowledge base.
class CountingKb final : public kb::KnowledgeBase {
public:
    explicit CountingKb(std::shared_ptr<kb::KnowledgeBase> inner) : inner_(std::move(inner)) {}
    kb::SearchResult search_items(std::string_view q) override { return inner_->search_items(q); }
    kb::EntityEntry fetch_entity_entry(const kb::EntityId& id) override { return inner_->fetch_entity_entry(id); }
    kb::PropertyExamples fetch_property_examples(const kb::PropertyId& id) override
    {
        return inner_->fetch_property_examples(id);
    }
    kb::SparqlResponse run_sparql(std::string_view q) override
    {
        ++sparql_calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        return inner_->run_sparql(q);
    }
    std::map<std::string, std::string> fetch_labels(const std::vector<std::string>& ids) override
    {
        return inner_->fetch_labels(ids);
    }
    std::atomic<int> sparql_calls{0};

private:
    std::shared_ptr<kb::KnowledgeBase> inner_;
};

BenchmarkOptions replay_options(std::size_t parallelism = 4)
{
    BenchmarkOptions o;
    o.parallelism = parallelism;
    o.gateway.max_retries = 0;
    return o;
}

Report run_bench3(const BenchmarkOptions& options)
{
    ReplayBackend backend(fixtures / "bench3");
    return run_benchmark(load_dataset(fixtures / "bench3" / "dataset.jsonl"), options, backend);
}

} // namespace

TEST_CASE("load_dataset reads JSON arrays, JSON Lines and QALD files")
{
    TempDir dir;
    write_file(dir / "a.json", R"([{"id": 7, "question": "q1", "sparql": "ASK {}"},
                                   {"id": "x", "question": "q2", "sparql": "SELECT ?a WHERE {}"}])");
    auto a = load_dataset(dir / "a.json", DatasetSource::spinach_dev);
    REQUIRE(a.size() == 2);
    CHECK(a[0].id == "7");
    CHECK(a[1].gold_sparql == "SELECT ?a WHERE {}");
    CHECK(a[1].source == DatasetSource::spinach_dev);

    write_file(dir / "b.jsonl", "{\"id\": \"1\", \"question\": \"q\", \"sparql\": \"ASK {}\"}\n\n"
                                "{\"id\": \"2\", \"question\": \"r\", \"sparql\": \"ASK {}\"}\n");
    CHECK(load_dataset(dir / "b.jsonl").size() == 2);

    write_file(dir / "c.json", R"({"questions": [{"id": "5",
        "question": [{"language": "de", "string": "Wer?"}, {"language": "en", "string": "Who?"}],
        "query": {"sparql": "SELECT ?x WHERE { ?x ?p ?o }"}}]})");
    auto c = load_dataset(dir / "c.json");
    REQUIRE(c.size() == 1);
    CHECK(c[0].question == "Who?");
    CHECK(c[0].source == DatasetSource::qald);
}

TEST_CASE("load_dataset reports the offending record")
{
    TempDir dir;
    auto index_of = [&](const std::string& content) -> std::optional<std::size_t> {
        write_file(dir / "d.json", content);
        try {
            load_dataset(dir / "d.json");
        } catch (const SchemaError& e) {
            return e.index();
        }
        return std::nullopt;
    };
    CHECK(index_of(R"([{"id": 1, "question": "a", "sparql": "ASK {}"}, {"id": 1, "question": "b", "sparql": "ASK {}"}])") == 1u);
    CHECK(index_of(R"([{"id": 1, "question": "a", "sparql": "ASK {}"}, {"id": 2, "sparql": "ASK {}"}])") == 1u);
    CHECK(index_of(R"([{"question": "a", "sparql": "ASK {}"}])") == 0u);
    CHECK(index_of(R"([{"id": 1, "question": "a", "sparql": 3}])") == 0u);
    CHECK(index_of(R"([{"id": 1.5, "question": "a", "sparql": "ASK {}"}])") == 0u);
    CHECK(index_of("{\"id\": 1, \"question\": \"a\", \"sparql\": \"ASK {}\"}\n{broken\n") == 1u);
    CHECK(index_of(R"({"questions": [{"id": 1, "question": [{"language": "fr", "string": "Qui?"}], "query": {"sparql": "ASK {}"}}]})") == 0u);
}

TEST_CASE("run_benchmark rejects an empty dataset")
{
    TempDir dir;
    write_file(dir / "empty.jsonl", "");
    auto examples = load_dataset(dir / "empty.jsonl");
    CHECK(examples.empty());
    ReplayBackend backend(fixtures / "bench3");
    CHECK_THROWS_AS(run_benchmark(examples, replay_options(), backend), InvalidArgument);
}

TEST_CASE("gold queries run once per store and are reused from disk")
{
    TempDir dir;
    auto recorded = std::make_shared<kb::RecordedKnowledgeBase>();
    const std::string q = "SELECT ?x WHERE { wd:Q1 wdt:P1 ?x. }";
    spinach::testing::record_sparql(*recorded, q, spinach::testing::entity_table("x", {"Q2", "Q3"}));
    CountingKb counting(recorded);

    DatasetExample ex{"a", "question", q, std::nullopt, DatasetSource::custom};
    {
        GoldStore store(dir.path(), [] { return std::string("2024-01-01T00:00:00Z"); });
        std::vector<std::jthread> threads;
        for (int i = 0; i < 8; ++i) {
            threads.emplace_back([&] { materialize_gold(ex, counting, store); });
        }
    }
    CHECK(counting.sparql_calls == 1);

    GoldStore reopened(dir.path());
    auto g = materialize_gold(ex, counting, reopened);
    CHECK(counting.sparql_calls == 1);
    CHECK(reopened.executions() == 0);
    CHECK(g.snapshot == "2024-01-01T00:00:00Z");
    CHECK(g.table.rows.size() == 2);
}

TEST_CASE("unusable gold raises GoldExecutionError with its kind")
{
    auto recorded = std::make_shared<kb::RecordedKnowledgeBase>();
    spinach::testing::record_sparql(*recorded, "SELECT ?x WHERE { wd:Q1 wdt:P9 ?x. }", spinach::testing::entity_table("x", {}));
    recorded->put("sparql", "SELECT ?x WHERE { wd:Q1 wdt:P8 ?x. }",
                  {{"error", {{"kind", "timeout"}, {"message", "too slow"}}}});
    GoldStore store;
    auto kind_of = [&](const std::string& q) {
        try {
            materialize_gold({"e", "q", q, std::nullopt, DatasetSource::custom}, *recorded, store);
        } catch (const GoldExecutionError& e) {
            return e.kind();
        }
        return std::string("none");
    };
    CHECK(kind_of("SELECT ?x WHERE { wd:Q1 wdt:P9 ?x. }") == "empty");
    CHECK(kind_of("SELECT ?x WHERE { wd:Q1 wdt:P8 ?x. }") == "timeout");
    CHECK(kind_of("SELECT ?x WHERE { wd:Q1 wdt:P7 ?x. }") == "network");
}

TEST_CASE("quantile interpolates linearly")
{
    CHECK(quantile({}, 0.5) == 0);
    CHECK(quantile({4}, 0.25) == 4);
    CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({1, 2, 3, 4, 5}, 0.75) == 4);
    CHECK(quantile({1, 2, 3, 4, 5}, 1.0) == 5);
}

TEST_CASE("three-example replay gives the hand-computed report")
{
    auto report = run_bench3(replay_options());
    // capital-france matches exactly; swiss-neighbours returns 2 of 5 gold
    // rows (P = 1, R = 2/5, F1 = 4/7); example-founder names the wrong founder.
    CHECK(report.macro.count == 3);
    CHECK(std::abs(report.macro.f1 - (1.0 + 4.0 / 7.0 + 0.0) / 3.0) < 1e-12);
    CHECK(std::abs(report.macro.em - 1.0 / 3.0) < 1e-12);
    CHECK(report.excluded == 0);
    REQUIRE(report.records.size() == 3);
    CHECK(report.records[0].id == "capital-france");
    CHECK(report.records[0].actions_taken == 3);
    CHECK(report.records[1].scores.f1 == doctest::Approx(4.0 / 7.0));
    CHECK(report.records[2].actions_taken == 5);
    CHECK(report.records[2].resets == 1);
    CHECK(report.actions.median == 3);
    CHECK(report.actions.q1 == 3);
    CHECK(report.actions.q3 == 4);
    CHECK(report.stop_reasons == std::map<std::string, std::size_t>{{"stopped", 3}});
    CHECK(report.gold_snapshot_earliest == "2024-06-01T00:00:00Z");
    CHECK_FALSE(report.wall_time_s.has_value());
    CHECK(report.to_json().dump().find("duration") == std::string::npos);
    CHECK(report.to_text().find("macro F1") != std::string::npos);
}

TEST_CASE("replay reports are identical across runs and pool sizes")
{
    const auto reference = run_bench3(replay_options(1)).to_json().dump();
    for (int run = 0; run < 5; ++run) {
        CHECK(run_bench3(replay_options(4)).to_json().dump() == reference);
    }
}

TEST_CASE("a resumed run reproduces the uninterrupted report")
{
    TempDir dir;
    auto options = replay_options();
    options.checkpoint = dir / "run.jsonl";
    const auto full = run_bench3(options).to_json().dump();
    const auto lines = spinach::testing::read_file(*options.checkpoint);
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 3);

    // Keep one finished example and a line torn by an interruption.
    write_file(*options.checkpoint, lines.substr(0, lines.find('\n') + 1) + "{\"id\": \"swiss-nei");
    CHECK(run_bench3(options).to_json().dump() == full);

    // A complete checkpoint is reused as is.
    CHECK(run_bench3(options).to_json().dump() == full);
}

TEST_CASE("an example without a transcript is an error record, not a crash")
{
    TempDir dir;
    std::filesystem::copy(fixtures / "bench3", dir.path(), std::filesystem::copy_options::recursive);
    std::filesystem::remove(dir / "transcripts" / "capital-france.jsonl");
    ReplayBackend backend(dir.path());
    auto report = run_benchmark(load_dataset(dir / "dataset.jsonl"), replay_options(), backend);
    CHECK(report.records[0].stop_reason == "error");
    CHECK(report.records[0].scores.f1 == 0);
    CHECK(report.records[0].error.has_value());
    CHECK(report.macro.count == 3);
}

TEST_CASE("examples with unusable gold are excluded and counted")
{
    TempDir dir;
    write_file(dir / "d.jsonl", read_file(fixtures / "bench3" / "dataset.jsonl") +
                                    R"({"id": "no-gold", "question": "q", "sparql": "SELECT ?x WHERE { wd:Q1 wdt:P1 ?x. }"})" "\n");
    ReplayBackend backend(fixtures / "bench3");
    auto report = run_benchmark(load_dataset(dir / "d.jsonl"), replay_options(), backend);
    CHECK(report.dataset_size == 4);
    CHECK(report.excluded == 1);
    CHECK(report.macro.count == 3);
    CHECK(report.records[3].excluded);
    CHECK(report.stop_reasons.at("excluded") == 1);
    CHECK(std::abs(report.macro.f1 - (1.0 + 4.0 / 7.0) / 3.0) < 1e-12);
}

TEST_CASE("scenario fixtures regenerate byte for byte")
{
    for (const std::string name : {"euler", "bench3"}) {
        CAPTURE(name);
        TempDir dir;
        std::ifstream in(fixtures / "scenarios" / (name + ".json"));
        spinach::testing::build_fixture(nlohmann::json::parse(in), dir.path());
        std::size_t compared = 0;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(fixtures / name)) {
            if (!entry.is_regular_file()) {
                continue;
            }
            auto rel = std::filesystem::relative(entry.path(), fixtures / name);
            CAPTURE(rel.string());
            CHECK(read_file(dir.path() / rel) == read_file(entry.path()));
            ++compared;
        }
        for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path())) {
            if (entry.is_regular_file()) {
                CHECK(std::filesystem::exists(fixtures / name / std::filesystem::relative(entry.path(), dir.path())));
            }
        }
        CHECK(compared > 3);
    }
}

TEST_CASE("the genealogy fixture replays its 13-action trace")
{
    TempDir dir;
    auto options = replay_options(1);
    options.trace_dir = dir / "traces";
    ReplayBackend backend(fixtures / "euler");
    auto examples = load_dataset(fixtures / "euler" / "dataset.jsonl");
    auto report = run_benchmark(examples, options, backend);
    REQUIRE(report.records.size() == 1);
    const auto& r = report.records[0];
    CHECK(r.actions_taken == 13);
    CHECK(r.stop_reason == "stopped");
    CHECK(r.final_sparql == examples[0].gold_sparql);
    CHECK(r.scores.f1 == 1);
    CHECK(r.scores.em == 1);
    CHECK(r.llm_calls == 15);
    CHECK(read_file(dir / "traces" / "euler-genealogy.json") ==
          read_file(fixtures / "euler" / "traces" / "euler-genealogy.json"));
}

TEST_CASE("evaluate_predictions scores given queries")
{
    auto recorded = kb::RecordedKnowledgeBase::load(fixtures / "bench3" / "kb.json");
    auto examples = load_dataset(fixtures / "bench3" / "dataset.jsonl");
    GoldStore gold(fixtures / "bench3" / "gold");
    std::map<std::string, std::string> predictions{
        {"capital-france", examples[0].gold_sparql},
        {"swiss-neighbours", examples[1].gold_sparql},
    };
    auto report = evaluate_predictions(examples, predictions, *recorded, gold, eval::NormalizeMode::id);
    CHECK(report.records[0].scores.f1 == 1);
    CHECK(report.records[1].scores.f1 == 1);
    CHECK(report.records[2].stop_reason == "missing");
    CHECK(report.records[2].scores.f1 == 0);
    CHECK(report.macro.f1 == doctest::Approx(2.0 / 3.0));

    examples.push_back({"bad", "q", "SELECT ?x WHERE { wd:Q1 wdt:P1 ?x. }", std::nullopt, DatasetSource::custom});
    CHECK_THROWS_AS(evaluate_predictions(examples, predictions, *recorded, gold, eval::NormalizeMode::id, true),
                    GoldExecutionError);
}

TEST_CASE("load_predictions accepts an id map or records")
{
    TempDir dir;
    write_file(dir / "a.json", R"({"x": "ASK {}", "y": "SELECT ?a WHERE {}"})");
    CHECK(load_predictions(dir / "a.json").size() == 2);
    write_file(dir / "b.jsonl", "{\"id\": 3, \"sparql\": \"ASK {}\"}\n{\"id\": \"4\", \"sparql\": \"ASK {}\"}\n");
    auto b = load_predictions(dir / "b.jsonl");
    CHECK(b.at("3") == "ASK {}");
    write_file(dir / "c.json", R"([{"id": "x"}])");
    CHECK_THROWS_AS(load_predictions(dir / "c.json"), SchemaError);
}

TEST_CASE("run records survive a JSON round trip")
{
    auto report = run_bench3(replay_options());
    for (const auto& r : report.records) {
        CHECK(RunRecord::from_json(nlohmann::json::parse(r.to_json().dump())) == r);
    }
}

TEST_CASE("config files override defaults and reject unknown keys")
{
    auto c = AppConfig::from_json(nlohmann::json::parse(R"({
        "kb": {"sparql_endpoint": "http://localhost:1/sparql", "timeout_ms": 5000},
        "llm": {"model": "m", "call_budget": 50},
        "agent": {"max_steps": 10},
        "bench": {"parallelism": 2}})"));
    CHECK(c.kb.sparql_endpoint_url == "http://localhost:1/sparql");
    CHECK(c.kb.request_timeout == std::chrono::milliseconds(5000));
    CHECK(c.llm.model == "m");
    CHECK(c.gateway.call_budget == 50u);
    CHECK(c.agent.max_steps == 10);
    CHECK(c.agent.max_resets == 3);
    CHECK(c.parallelism == 2);
    CHECK_THROWS_AS(AppConfig::from_json(nlohmann::json::parse(R"({"agent": {"steps": 3}})")), InvalidArgument);
    CHECK_THROWS_AS(AppConfig::from_json(nlohmann::json::parse(R"({"agent": {"max_steps": "x"}})")), InvalidArgument);
    CHECK_THROWS_AS(AppConfig::from_json(nlohmann::json::parse(R"({"bench": {"parallelism": 0}})")), InvalidArgument);
}
