#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinach/kb/http.hpp"
#include "spinach/llm/templates.hpp"

namespace spinach::llm {

class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& what, bool retriable = true) : Error(what), retriable_(retriable) {}
    bool retriable() const { return retriable_; }

private:
    bool retriable_;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

inline constexpr int policy_max_tokens = 2048;
inline constexpr int prune_max_tokens = 4096;

struct LlmRequest {
    TemplateId template_id = TemplateId::policy;
    std::map<std::string, std::string> variables;
    double temperature = 1.0;
    double nucleus_p = 0.9;
    int max_output_tokens = policy_max_tokens;

    /// Sampling at temperature 1 with nucleus 0.9.
    static LlmRequest policy(std::string question, std::string action_history);
    /// Greedy decoding.
    static LlmRequest prune(std::string question, std::string entity_and_description, std::string outgoing_edges);

    /// Throws UnboundSlot for a missing slot and InvalidArgument for
    /// out-of-range sampling settings.
    void validate() const;
    std::string render() const;
};

/// What a provider actually receives.
struct ChatRequest {
    TemplateId template_id = TemplateId::policy;
    std::vector<ChatMessage> messages;
    double temperature = 1.0;
    double top_p = 1.0;
    int max_tokens = 0;

    nlohmann::json to_json() const;
    /// sha256 over the canonical JSON form; keys transcripts.
    std::string digest() const;
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    /// Returns raw model text or throws ProviderError.
    virtual std::string complete(const ChatRequest& request) = 0;
};

struct OpenAiConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o";
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::milliseconds timeout{120'000};

    /// SPINACH_LLM_ENDPOINT and SPINACH_LLM_MODEL override the defaults.
    OpenAiConfig with_env_overrides() const;
};

/// Any OpenAI-compatible chat completions endpoint.
class OpenAiProvider final : public LlmProvider {
public:
    OpenAiProvider(OpenAiConfig config, std::shared_ptr<kb::HttpTransport> transport);
    std::string complete(const ChatRequest& request) override;

private:
    OpenAiConfig config_;
    std::shared_ptr<kb::HttpTransport> transport_;
};

/// Answers from a callback; used for mock policies.
class ScriptedProvider final : public LlmProvider {
public:
    using Script = std::function<std::string(const ChatRequest&)>;
    explicit ScriptedProvider(Script script) : script_(std::move(script)) {}
    std::string complete(const ChatRequest& request) override { return script_(request); }

private:
    Script script_;
};

struct TranscriptRecord {
    std::string digest;
    std::string template_id;
    std::string response;
    std::string timestamp;
};

/// Reads a JSONL transcript. Throws Error on malformed lines.
std::vector<TranscriptRecord> load_transcript(const std::filesystem::path& path);

/// Serves recorded responses: the k-th request with a given digest gets the
/// k-th recorded response for that digest. Unknown requests fail without
/// retry.
class ReplayProvider final : public LlmProvider {
public:
    explicit ReplayProvider(const std::vector<TranscriptRecord>& records);
    std::string complete(const ChatRequest& request) override;

private:
    std::mutex mutex_;
    std::map<std::string, std::deque<std::string>> queue_;
};

/// Forwards to another provider and appends one JSONL record per call.
/// `clock` supplies the record timestamps (UTC now by default).
class RecordingProvider final : public LlmProvider {
public:
    using Clock = std::function<std::string()>;

    RecordingProvider(std::shared_ptr<LlmProvider> inner, std::filesystem::path path, Clock clock = {});
    std::string complete(const ChatRequest& request) override;

private:
    std::shared_ptr<LlmProvider> inner_;
    std::filesystem::path path_;
    Clock clock_;
    std::mutex mutex_;
};

struct GatewayConfig {
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{1000};
    /// Total completions allowed through this gateway.
    std::optional<std::size_t> call_budget;
};

/// Validates and renders requests, enforces the call budget, and retries
/// transient provider failures. Safe to share between threads.
class LlmGateway {
public:
    LlmGateway(std::shared_ptr<LlmProvider> provider, GatewayConfig config = {});

    std::string complete(const LlmRequest& request);
    std::size_t calls() const { return calls_.load(); }

private:
    std::shared_ptr<LlmProvider> provider_;
    GatewayConfig config_;
    std::atomic<std::size_t> calls_{0};
};

} // namespace spinach::llm
