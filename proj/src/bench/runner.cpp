#include "spinach/bench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "spinach/common/digest.hpp"
#include "spinach/common/text.hpp"

namespace spinach::bench {

using nlohmann::json;
using nlohmann::ordered_json;

std::string transcript_file_name(const std::string& id)
{
    const bool safe = !id.empty() && id != "." && id != ".." && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    });
    return safe ? id : sha256_hex(id);
}

ReplayBackend::ReplayBackend(std::filesystem::path dir) : dir_(std::move(dir))
{
    const auto kb_file = dir_ / "kb.json";
    if (std::filesystem::exists(kb_file)) {
        kb_ = kb::RecordedKnowledgeBase::load(kb_file);
    } else {
        kb_ = std::make_shared<kb::RecordedKnowledgeBase>();
    }
}

std::shared_ptr<llm::LlmProvider> ReplayBackend::provider_for(const DatasetExample& example)
{
    const auto file = dir_ / "transcripts" / (transcript_file_name(example.id) + ".jsonl");
    std::vector<llm::TranscriptRecord> records;
    if (std::filesystem::exists(file)) {
        records = llm::load_transcript(file);
    }
    return std::make_shared<llm::ReplayProvider>(records);
}

LiveBackend::LiveBackend(std::shared_ptr<kb::KnowledgeBase> kb, std::shared_ptr<llm::LlmProvider> provider,
                         std::optional<std::filesystem::path> gold_cache_dir,
                         std::optional<std::filesystem::path> record_dir)
    : kb_(std::move(kb)), provider_(std::move(provider)), gold_cache_dir_(std::move(gold_cache_dir)),
      record_dir_(std::move(record_dir))
{
    if (record_dir_) {
        std::filesystem::create_directories(*record_dir_ / "transcripts");
        recorder_ = std::make_shared<kb::RecordedKnowledgeBase>(kb_);
        kb_ = recorder_;
    }
}

std::shared_ptr<llm::LlmProvider> LiveBackend::provider_for(const DatasetExample& example)
{
    if (!record_dir_) {
        return provider_;
    }
    const auto file = *record_dir_ / "transcripts" / (transcript_file_name(example.id) + ".jsonl");
    std::filesystem::remove(file);
    return std::make_shared<llm::RecordingProvider>(provider_, file);
}

std::optional<std::filesystem::path> LiveBackend::gold_dir() const
{
    if (record_dir_) {
        return *record_dir_ / "gold";
    }
    return gold_cache_dir_;
}

void LiveBackend::finish()
{
    if (recorder_) {
        recorder_->save(*record_dir_ / "kb.json");
    }
}

void BenchmarkOptions::validate() const
{
    agent.validate();
    if (parallelism == 0) {
        throw InvalidArgument("parallelism must be at least 1");
    }
}

ordered_json RunRecord::to_json() const
{
    ordered_json j;
    j["id"] = id;
    j["question"] = question;
    j["final_sparql"] = final_sparql ? json(*final_sparql) : json(nullptr);
    j["stop_reason"] = stop_reason;
    j["actions_taken"] = actions_taken;
    j["resets"] = resets;
    j["llm_calls"] = llm_calls;
    j["em"] = scores.em;
    j["f1"] = scores.f1;
    j["tp"] = scores.tp;
    j["fp"] = scores.fp;
    j["fn"] = scores.fn;
    j["excluded"] = excluded;
    j["error"] = error ? json(*error) : json(nullptr);
    j["gold_snapshot"] = gold_snapshot;
    if (duration_s) {
        j["duration_s"] = *duration_s;
    }
    return j;
}

RunRecord RunRecord::from_json(const json& j)
{
    RunRecord r;
    r.id = j.at("id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    if (!j.at("final_sparql").is_null()) {
        r.final_sparql = j.at("final_sparql").get<std::string>();
    }
    r.stop_reason = j.at("stop_reason").get<std::string>();
    r.actions_taken = j.at("actions_taken").get<int>();
    r.resets = j.at("resets").get<int>();
    r.llm_calls = j.at("llm_calls").get<std::size_t>();
    r.scores.em = j.at("em").get<int>();
    r.scores.f1 = j.at("f1").get<double>();
    r.scores.tp = j.at("tp").get<double>();
    r.scores.fp = j.at("fp").get<double>();
    r.scores.fn = j.at("fn").get<double>();
    r.excluded = j.at("excluded").get<bool>();
    if (!j.at("error").is_null()) {
        r.error = j.at("error").get<std::string>();
    }
    r.gold_snapshot = j.value("gold_snapshot", "");
    if (j.contains("duration_s")) {
        r.duration_s = j.at("duration_s").get<double>();
    }
    return r;
}

double quantile(const std::vector<double>& sorted, double q)
{
    if (sorted.empty()) {
        return 0;
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Report summarize(std::vector<RunRecord> records, eval::NormalizeMode mode, std::optional<double> wall_time_s)
{
    Report report;
    report.mode = mode == eval::NormalizeMode::id ? "id" : "label";
    report.dataset_size = records.size();
    report.wall_time_s = wall_time_s;

    std::vector<eval::EvalOutcome> scored;
    std::vector<double> actions;
    for (const auto& r : records) {
        ++report.stop_reasons[r.stop_reason];
        if (r.excluded) {
            ++report.excluded;
            continue;
        }
        scored.push_back(r.scores);
        actions.push_back(r.actions_taken);
        if (!r.gold_snapshot.empty()) {
            if (report.gold_snapshot_earliest.empty() || r.gold_snapshot < report.gold_snapshot_earliest) {
                report.gold_snapshot_earliest = r.gold_snapshot;
            }
            report.gold_snapshot_latest = std::max(report.gold_snapshot_latest, r.gold_snapshot);
        }
    }
    report.macro = eval::macro_average(scored);
    std::sort(actions.begin(), actions.end());
    report.actions = {quantile(actions, 0.5), quantile(actions, 0.25), quantile(actions, 0.75)};
    report.records = std::move(records);
    return report;
}

ordered_json Report::to_json() const
{
    ordered_json j;
    j["mode"] = mode;
    j["examples"] = dataset_size;
    j["evaluated"] = macro.count;
    j["excluded"] = excluded;
    j["macro_em"] = macro.em;
    j["macro_f1"] = macro.f1;
    j["actions"] = {{"median", actions.median}, {"q1", actions.q1}, {"q3", actions.q3}};
    ordered_json reasons = ordered_json::object();
    for (const auto& [reason, count] : stop_reasons) {
        reasons[reason] = count;
    }
    j["stop_reasons"] = reasons;
    j["gold_snapshot"] = {{"earliest", gold_snapshot_earliest}, {"latest", gold_snapshot_latest}};
    if (wall_time_s) {
        j["wall_time_s"] = *wall_time_s;
    }
    ordered_json rs = ordered_json::array();
    for (const auto& r : records) {
        rs.push_back(r.to_json());
    }
    j["records"] = rs;
    return j;
}

std::string Report::to_text() const
{
    std::string out;
    auto line = [&out](std::string_view key, const std::string& value) {
        out += fmt::format("{:<22}{}\n", key, value);
    };
    line("normalization", mode);
    line("examples", std::to_string(dataset_size));
    line("evaluated", std::to_string(macro.count));
    line("excluded", std::to_string(excluded));
    line("macro EM", fmt::format("{:.4f}", macro.em));
    line("macro F1", fmt::format("{:.4f}", macro.f1));
    line("actions median", fmt::format("{:.1f}", actions.median));
    line("actions IQR", fmt::format("{:.1f} .. {:.1f}", actions.q1, actions.q3));
    for (const auto& [reason, count] : stop_reasons) {
        line("stop: " + reason, std::to_string(count));
    }
    if (!gold_snapshot_earliest.empty()) {
        line("gold snapshot", gold_snapshot_earliest == gold_snapshot_latest
                                  ? gold_snapshot_earliest
                                  : gold_snapshot_earliest + " .. " + gold_snapshot_latest);
    }
    if (wall_time_s) {
        line("wall time (s)", fmt::format("{:.1f}", *wall_time_s));
    }
    return out;
}

namespace {

eval::ResultTable prediction_table(const std::optional<kb::SparqlResponse>& result, eval::NormalizeMode mode,
                                   kb::KnowledgeBase& kb)
{
    if (!result || result->is_error()) {
        return {};
    }
    try {
        return eval::normalize_results(*result, mode, label_resolver(kb));
    } catch (const eval::UnresolvableBinding&) {
        return {};
    }
}

std::vector<RunRecord> load_checkpoint(const std::filesystem::path& path)
{
    std::vector<RunRecord> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(RunRecord::from_json(json::parse(line)));
        } catch (const json::exception&) {
            // A line cut short by an interrupted run; that example runs again.
        }
    }
    return out;
}

RunRecord run_one(const DatasetExample& example, const BenchmarkOptions& options, Backend& backend,
                  GoldStore& gold)
{
    RunRecord record;
    record.id = example.id;
    record.question = example.question;
    const auto started = std::chrono::steady_clock::now();

    std::optional<MaterializedGold> gold_table;
    try {
        gold_table = materialize_gold(example, backend.kb(), gold, options.mode);
        record.gold_snapshot = gold_table->snapshot;
    } catch (const GoldExecutionError& e) {
        record.excluded = true;
        record.stop_reason = "excluded";
        record.error = e.what();
        return record;
    }

    llm::LlmGateway gateway(backend.provider_for(example), options.gateway);
    std::optional<agent::AgentOutcome> outcome;
    try {
        outcome = agent::run_agent(example.question, options.agent, gateway, backend.kb());
    } catch (const std::exception& e) {
        record.stop_reason = "error";
        record.error = e.what();
    }
    record.llm_calls = gateway.calls();

    eval::ResultTable predicted;
    if (outcome) {
        record.final_sparql = outcome->final_sparql;
        record.stop_reason = std::string(agent::to_string(outcome->stop_reason));
        record.actions_taken = outcome->actions_taken;
        record.resets = static_cast<int>(outcome->resets.size());
        predicted = prediction_table(outcome->final_result, options.mode, backend.kb());
        if (options.trace_dir) {
            std::ofstream(*options.trace_dir / (transcript_file_name(example.id) + ".json"))
                << agent::trace_to_json(*outcome).dump(2) << '\n';
        }
    }
    record.scores = eval::row_major_scores(gold_table->table, predicted);
    if (backend.timed()) {
        record.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    return record;
}

} // namespace

Report run_benchmark(const std::vector<DatasetExample>& examples, const BenchmarkOptions& options, Backend& backend)
{
    options.validate();
    if (examples.empty()) {
        throw InvalidArgument("dataset is empty");
    }
    if (options.trace_dir) {
        std::filesystem::create_directories(*options.trace_dir);
    }
    const auto started = std::chrono::steady_clock::now();

    std::vector<std::optional<RunRecord>> results(examples.size());
    if (options.checkpoint && std::filesystem::exists(*options.checkpoint)) {
        std::map<std::string, RunRecord> done;
        for (auto& r : load_checkpoint(*options.checkpoint)) {
            done.insert_or_assign(r.id, std::move(r));
        }
        for (std::size_t i = 0; i < examples.size(); ++i) {
            if (auto it = done.find(examples[i].id); it != done.end()) {
                results[i] = it->second;
            }
        }
    }
    std::ofstream checkpoint;
    if (options.checkpoint) {
        checkpoint.open(*options.checkpoint, std::ios::app);
        if (!checkpoint) {
            throw Error("cannot open checkpoint " + options.checkpoint->string());
        }
    }

    GoldStore gold(backend.gold_dir());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (!results[i]) {
            pending.push_back(i);
        }
    }
    std::atomic<std::size_t> next{0};
    std::mutex write_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < pending.size(); k = next++) {
            const auto i = pending[k];
            auto record = run_one(examples[i], options, backend, gold);
            std::lock_guard lock(write_mutex);
            if (checkpoint.is_open()) {
                checkpoint << record.to_json().dump() << '\n' << std::flush;
            }
            results[i] = std::move(record);
        }
    };
    {
        std::vector<std::jthread> pool;
        const auto n = std::min(options.parallelism, std::max<std::size_t>(pending.size(), 1));
        for (std::size_t t = 0; t < n; ++t) {
            pool.emplace_back(worker);
        }
    }
    backend.finish();

    std::vector<RunRecord> records;
    records.reserve(results.size());
    for (auto& r : results) {
        records.push_back(std::move(*r));
    }
    std::optional<double> wall;
    if (backend.timed()) {
        wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    return summarize(std::move(records), options.mode, wall);
}

Report evaluate_predictions(const std::vector<DatasetExample>& examples,
                            const std::map<std::string, std::string>& predictions, kb::KnowledgeBase& kb,
                            GoldStore& gold, eval::NormalizeMode mode, bool strict_gold)
{
    if (examples.empty()) {
        throw InvalidArgument("dataset is empty");
    }
    std::vector<RunRecord> records;
    for (const auto& ex : examples) {
        RunRecord r;
        r.id = ex.id;
        r.question = ex.question;
        std::optional<MaterializedGold> g;
        try {
            g = materialize_gold(ex, kb, gold, mode);
            r.gold_snapshot = g->snapshot;
        } catch (const GoldExecutionError& e) {
            if (strict_gold) {
                throw;
            }
            r.excluded = true;
            r.stop_reason = "excluded";
            r.error = e.what();
            records.push_back(std::move(r));
            continue;
        }
        std::optional<kb::SparqlResponse> result;
        if (auto it = predictions.find(ex.id); it != predictions.end()) {
            r.final_sparql = it->second;
            r.stop_reason = "predicted";
            result = kb.run_sparql(it->second);
            if (result->is_error()) {
                r.error = std::string(kb::to_string(result->error().kind)) + ": " + result->error().message;
            }
        } else {
            r.stop_reason = "missing";
        }
        r.scores = eval::row_major_scores(g->table, prediction_table(result, mode, kb));
        records.push_back(std::move(r));
    }
    return summarize(std::move(records), mode, std::nullopt);
}

std::map<std::string, std::string> load_predictions(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open predictions " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto content = buffer.str();

    std::map<std::string, std::string> out;
    std::vector<json> records;
    try {
        auto doc = json::parse(content);
        if (doc.is_object() && !doc.contains("id")) {
            for (const auto& [id, q] : doc.items()) {
                out[id] = q.get<std::string>();
            }
            return out;
        }
        if (doc.is_array()) {
            records.assign(doc.begin(), doc.end());
        } else {
            records.push_back(doc);
        }
    } catch (const json::parse_error&) {
        std::size_t index = 0;
        for (const auto& line : text::split_lines(content)) {
            if (text::trim(line).empty()) {
                continue;
            }
            try {
                records.push_back(json::parse(line));
            } catch (const json::parse_error& e) {
                throw SchemaError(std::string("malformed JSON: ") + e.what(), index);
            }
            ++index;
        }
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!r.is_object() || !r.contains("id") || !r.contains("sparql") || !r.at("sparql").is_string()) {
            throw SchemaError("prediction needs 'id' and 'sparql'", i);
        }
        const auto& id = r.at("id");
        out[id.is_string() ? id.get<std::string>() : id.dump()] = r.at("sparql").get<std::string>();
    }
    return out;
}

} // namespace spinach::bench
