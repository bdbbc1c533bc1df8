// Command-line front end: single questions, benchmark runs, scoring and
// query statistics.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spinach/bench/config.hpp"
#include "spinach/bench/runner.hpp"
#include "spinach/kb/client.hpp"
#include "spinach/kb/render.hpp"
#include "spinach/stats/query_stats.hpp"

using namespace spinach;

namespace {

enum Exit { ok = 0, failure = 1, schema_error = 3, gold_error = 4 };

bench::AppConfig load_config(const std::string& path)
{
    auto config = path.empty() ? bench::AppConfig{} : bench::AppConfig::load(path);
    config = config.with_env_overrides();
    config.kb.request_timeout = std::min(config.kb.request_timeout, config.agent.action_timeout);
    return config;
}

std::shared_ptr<llm::LlmProvider> live_provider(const bench::AppConfig& config)
{
    return std::make_shared<llm::OpenAiProvider>(config.llm, kb::make_default_transport(config.llm.timeout));
}

eval::NormalizeMode parse_mode(const std::string& mode)
{
    return mode == "label" ? eval::NormalizeMode::label : eval::NormalizeMode::id;
}

void emit_report(const bench::Report& report, const std::string& output)
{
    std::cout << report.to_text();
    const auto json = report.to_json().dump(2);
    if (output.empty()) {
        std::cout << '\n' << json << '\n';
    } else {
        std::ofstream(output) << json << '\n';
        std::cout << "report written to " << output << '\n';
    }
}

int cmd_ask(const bench::AppConfig& config, const std::string& question, const std::string& trace_path)
{
    auto kb = kb::WikidataClient::create(config.kb);
    llm::LlmGateway gateway(live_provider(config), config.gateway);
    auto outcome = agent::run_agent(question, config.agent, gateway, *kb);

    std::cout << agent::render_history(outcome.trace) << "\n\n";
    std::cout << fmt::format("stop reason: {} after {} actions ({} resets, {} LLM calls)\n",
                             agent::to_string(outcome.stop_reason), outcome.actions_taken, outcome.resets.size(),
                             gateway.calls());
    if (outcome.final_sparql) {
        std::cout << "\nFinal SPARQL:\n" << *outcome.final_sparql << "\n\nResults:\n"
                  << kb::render_observation(*outcome.final_result) << '\n';
    } else {
        std::cout << "\nNo query produced an answer.\n";
    }
    if (!trace_path.empty()) {
        std::ofstream(trace_path) << agent::trace_to_json(outcome).dump(2) << '\n';
    }
    return ok;
}

int cmd_evaluate(const bench::AppConfig& config, const std::string& dataset, const std::string& mode,
                 const std::string& predictions_path, const std::string& replay, const std::string& output)
{
    auto examples = bench::load_dataset(dataset);
    std::shared_ptr<kb::KnowledgeBase> kb;
    std::optional<std::filesystem::path> gold_dir = config.gold_cache_dir;
    if (!replay.empty()) {
        kb = kb::RecordedKnowledgeBase::load(std::filesystem::path(replay) / "kb.json");
        gold_dir = std::filesystem::path(replay) / "gold";
    } else {
        kb = kb::WikidataClient::create(config.kb);
    }
    bench::GoldStore gold(gold_dir);

    // Without predictions every gold query is scored against itself, which
    // checks that all of them can be materialized.
    std::map<std::string, std::string> predictions;
    if (!predictions_path.empty()) {
        predictions = bench::load_predictions(predictions_path);
    } else {
        for (const auto& ex : examples) {
            predictions[ex.id] = ex.gold_sparql;
        }
    }
    emit_report(bench::evaluate_predictions(examples, predictions, *kb, gold, parse_mode(mode), true), output);
    return ok;
}

int cmd_stats(const std::string& dataset, const std::string& query)
{
    std::vector<std::string> queries;
    std::string name = "query";
    if (!query.empty()) {
        queries.push_back(query);
    } else {
        for (const auto& ex : bench::load_dataset(dataset)) {
            queries.push_back(ex.gold_sparql);
        }
        name = std::filesystem::path(dataset).stem().string();
    }
    auto agg = stats::aggregate_stats(queries);

    std::string header = fmt::format("{:<20}", "dataset");
    std::string row = fmt::format("{:<20}", name);
    nlohmann::ordered_json j;
    j["dataset"] = name;
    j["analyzed"] = agg.analyzed;
    j["excluded"] = agg.excluded.size();
    for (std::size_t i = 0; i < stats::metric_names.size(); ++i) {
        header += fmt::format("{:>13}", stats::metric_names[i]);
        row += fmt::format("{:>13.2f}", agg.means[i]);
        j[std::string(stats::metric_names[i])] = agg.means[i];
    }
    std::cout << header << '\n' << row << '\n';
    std::cout << fmt::format("analyzed {} of {} queries\n", agg.analyzed, queries.size());
    nlohmann::ordered_json excluded = nlohmann::ordered_json::array();
    for (const auto& e : agg.excluded) {
        excluded.push_back({{"index", e.index}, {"reason", e.reason}});
        std::cerr << fmt::format("excluded query {}: {}\n", e.index, e.reason);
    }
    j["exclusions"] = excluded;
    std::cout << '\n' << j.dump(2) << '\n';
    return ok;
}

struct BenchArgs {
    std::string dataset;
    std::string replay;
    bool live = false;
    std::string mode = "id";
    std::size_t parallelism = 0;
    std::string checkpoint;
    std::string traces;
    std::string record;
    std::string output;
};

int cmd_run_benchmark(const bench::AppConfig& config, const BenchArgs& args)
{
    auto examples = bench::load_dataset(args.dataset);
    bench::BenchmarkOptions options;
    options.agent = config.agent;
    options.gateway = config.gateway;
    options.mode = parse_mode(args.mode);
    options.parallelism = args.parallelism != 0 ? args.parallelism : config.parallelism;
    if (!args.checkpoint.empty()) {
        options.checkpoint = args.checkpoint;
    }
    if (!args.traces.empty()) {
        options.trace_dir = args.traces;
    }

    std::unique_ptr<bench::Backend> backend;
    if (args.live) {
        std::optional<std::filesystem::path> record;
        if (!args.record.empty()) {
            record = args.record;
        }
        backend = std::make_unique<bench::LiveBackend>(kb::WikidataClient::create(config.kb), live_provider(config),
                                                       config.gold_cache_dir, record);
    } else {
        backend = std::make_unique<bench::ReplayBackend>(args.replay);
    }
    emit_report(bench::run_benchmark(examples, options, *backend), args.output);
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"SPINACH knowledge-base question answering over Wikidata"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with endpoints, model, budgets and agent limits")
        ->check(CLI::ExistingFile);

    std::string question, trace_path;
    auto* ask = app.add_subcommand("ask", "Answer one question live and print the trace");
    ask->add_option("question", question, "Natural-language question")->required();
    ask->add_option("--trace", trace_path, "Write the trace document here");

    std::string dataset, mode = "id", predictions, replay, output;
    auto* evaluate = app.add_subcommand("evaluate", "Score predicted queries against gold results");
    evaluate->add_option("--dataset", dataset, "Dataset file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--mode", mode, "Answer normalization")->check(CLI::IsMember({"id", "label"}));
    evaluate->add_option("--predictions", predictions, "Predictions: {id: sparql} or {id, sparql} records")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--replay", replay, "Answer queries from a recorded directory instead of Wikidata")
        ->check(CLI::ExistingDirectory);
    evaluate->add_option("--output", output, "Write the JSON report here");

    std::string query;
    auto* stats_cmd = app.add_subcommand("stats", "Structural statistics of a dataset's gold queries");
    auto* stats_dataset =
        stats_cmd->add_option("dataset,--dataset", dataset, "Dataset file")->check(CLI::ExistingFile);
    stats_cmd->add_option("--query", query, "Analyze a single query instead")->excludes(stats_dataset);

    BenchArgs bench_args;
    auto* run = app.add_subcommand("run-benchmark", "Run the agent over a dataset and score it");
    run->add_option("--dataset", bench_args.dataset, "Dataset file")->required()->check(CLI::ExistingFile);
    auto* replay_opt = run->add_option("--replay", bench_args.replay, "Replay directory (transcripts/, kb.json, gold/)")
                           ->check(CLI::ExistingDirectory);
    auto* live_opt = run->add_flag("--live", bench_args.live, "Use the configured LLM and Wikidata endpoints");
    replay_opt->excludes(live_opt);
    run->add_option("--mode", bench_args.mode, "Answer normalization")->check(CLI::IsMember({"id", "label"}));
    run->add_option("--parallelism", bench_args.parallelism, "Concurrent agent runs")->check(CLI::PositiveNumber);
    run->add_option("--checkpoint", bench_args.checkpoint, "JSON Lines checkpoint; finished examples are skipped");
    run->add_option("--traces", bench_args.traces, "Directory for per-example trace documents");
    run->add_option("--record", bench_args.record, "With --live, record a replay directory here")->needs(live_opt);
    run->add_option("--output", bench_args.output, "Write the JSON report here");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = load_config(config_path);
        if (*ask) {
            return cmd_ask(config, question, trace_path);
        }
        if (*evaluate) {
            return cmd_evaluate(config, dataset, mode, predictions, replay, output);
        }
        if (*stats_cmd) {
            if (dataset.empty() && query.empty()) {
                std::cerr << "stats: give a dataset file or --query\n";
                return failure;
            }
            return cmd_stats(dataset, query);
        }
        if (bench_args.replay.empty() && !bench_args.live) {
            std::cerr << "run-benchmark: choose --replay DIR or --live\n";
            return failure;
        }
        return cmd_run_benchmark(config, bench_args);
    } catch (const bench::SchemaError& e) {
        std::cerr << "dataset error: " << e.what() << '\n';
        return schema_error;
    } catch (const bench::GoldExecutionError& e) {
        std::cerr << "gold error: " << e.what() << '\n';
        return gold_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
}
