#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinach/agent/agent.hpp"
#include "spinach/bench/dataset.hpp"
#include "spinach/bench/gold.hpp"
#include "spinach/eval/metrics.hpp"
#include "spinach/kb/recorded.hpp"

namespace spinach::bench {

/// Where a benchmark run gets its language model and knowledge base from.
class Backend {
public:
    virtual ~Backend() = default;
    /// Shared by all workers; must be safe for concurrent use.
    virtual kb::KnowledgeBase& kb() = 0;
    /// A fresh provider for one example.
    virtual std::shared_ptr<llm::LlmProvider> provider_for(const DatasetExample& example) = 0;
    /// Directory for gold snapshots, if any.
    virtual std::optional<std::filesystem::path> gold_dir() const = 0;
    /// Whether wall-clock timings belong in the report.
    virtual bool timed() const = 0;
    /// Called once after all examples have run.
    virtual void finish() {}
};

/// File name used for an example's transcript: the id itself when it only
/// contains [A-Za-z0-9._-], otherwise its sha256.
std::string transcript_file_name(const std::string& id);

/// Offline run from a directory holding `transcripts/<id>.jsonl`, `kb.json`
/// and `gold/`.
class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(std::filesystem::path dir);
    kb::KnowledgeBase& kb() override { return *kb_; }
    std::shared_ptr<llm::LlmProvider> provider_for(const DatasetExample& example) override;
    std::optional<std::filesystem::path> gold_dir() const override { return dir_ / "gold"; }
    bool timed() const override { return false; }

private:
    std::filesystem::path dir_;
    std::shared_ptr<kb::KnowledgeBase> kb_;
};

/// Live run. With `record_dir`, every completion and knowledge-base answer is
/// written in the layout ReplayBackend reads.
class LiveBackend final : public Backend {
public:
    LiveBackend(std::shared_ptr<kb::KnowledgeBase> kb, std::shared_ptr<llm::LlmProvider> provider,
                std::optional<std::filesystem::path> gold_cache_dir = std::nullopt,
                std::optional<std::filesystem::path> record_dir = std::nullopt);
    kb::KnowledgeBase& kb() override { return *kb_; }
    std::shared_ptr<llm::LlmProvider> provider_for(const DatasetExample& example) override;
    std::optional<std::filesystem::path> gold_dir() const override;
    bool timed() const override { return true; }
    void finish() override;

private:
    std::shared_ptr<kb::KnowledgeBase> kb_;
    std::shared_ptr<kb::RecordedKnowledgeBase> recorder_;
    std::shared_ptr<llm::LlmProvider> provider_;
    std::optional<std::filesystem::path> gold_cache_dir_;
    std::optional<std::filesystem::path> record_dir_;
};

struct BenchmarkOptions {
    agent::AgentConfig agent;
    llm::GatewayConfig gateway;
    eval::NormalizeMode mode = eval::NormalizeMode::id;
    std::size_t parallelism = 4;
    /// JSON Lines file of finished examples; existing entries are reused.
    std::optional<std::filesystem::path> checkpoint;
    /// When set, one trace document per example is written here.
    std::optional<std::filesystem::path> trace_dir;

    void validate() const;
};

/// Per-example result. `stop_reason` is an agent stop reason, "error" when
/// the run aborted, or "excluded" when the gold query could not be used.
struct RunRecord {
    std::string id;
    std::string question;
    std::optional<std::string> final_sparql;
    std::string stop_reason;
    int actions_taken = 0;
    int resets = 0;
    std::size_t llm_calls = 0;
    eval::EvalOutcome scores;
    bool excluded = false;
    std::optional<std::string> error;
    std::string gold_snapshot;
    std::optional<double> duration_s;

    nlohmann::ordered_json to_json() const;
    static RunRecord from_json(const nlohmann::json& j);
    bool operator==(const RunRecord&) const = default;
};

struct ActionSummary {
    double median = 0;
    double q1 = 0;
    double q3 = 0;
};

struct Report {
    std::string mode;
    std::size_t dataset_size = 0;
    eval::MacroScores macro;
    std::size_t excluded = 0;
    ActionSummary actions;
    std::map<std::string, std::size_t> stop_reasons;
    std::string gold_snapshot_earliest;
    std::string gold_snapshot_latest;
    std::optional<double> wall_time_s;
    std::vector<RunRecord> records;

    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

/// Linear-interpolation quantile of an ascending sample, q in [0, 1].
double quantile(const std::vector<double>& sorted, double q);

/// Builds the aggregate fields from per-example records (in dataset order).
Report summarize(std::vector<RunRecord> records, eval::NormalizeMode mode, std::optional<double> wall_time_s);

/// Runs the agent on every example with a worker pool and scores the answers.
/// Throws InvalidArgument for an empty dataset.
Report run_benchmark(const std::vector<DatasetExample>& examples, const BenchmarkOptions& options, Backend& backend);

/// Scores given queries (by example id) instead of running the agent. A
/// missing prediction scores zero. With `strict_gold`, GoldExecutionError
/// propagates instead of excluding the example.
Report evaluate_predictions(const std::vector<DatasetExample>& examples,
                            const std::map<std::string, std::string>& predictions, kb::KnowledgeBase& kb,
                            GoldStore& gold, eval::NormalizeMode mode, bool strict_gold = false);

/// Reads predictions as a JSON object {id: sparql}, or a JSON array / JSON
/// Lines of {"id", "sparql"} records.
std::map<std::string, std::string> load_predictions(const std::filesystem::path& path);

} // namespace spinach::bench
