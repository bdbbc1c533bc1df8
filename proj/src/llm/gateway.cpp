#include "spinach/llm/gateway.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "spinach/common/digest.hpp"

namespace spinach::llm {

LlmRequest LlmRequest::policy(std::string question, std::string action_history)
{
    LlmRequest r;
    r.template_id = TemplateId::policy;
    r.variables = {{"question", std::move(question)}, {"action_history", std::move(action_history)}};
    return r;
}

LlmRequest LlmRequest::prune(std::string question, std::string entity_and_description, std::string outgoing_edges)
{
    LlmRequest r;
    r.template_id = TemplateId::prune;
    r.variables = {{"question", std::move(question)},
                   {"entity_and_description", std::move(entity_and_description)},
                   {"outgoing_edges", std::move(outgoing_edges)}};
    r.temperature = 0.0;
    r.nucleus_p = 1.0;
    r.max_output_tokens = prune_max_tokens;
    return r;
}

void LlmRequest::validate() const
{
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw InvalidArgument("temperature must lie in [0, 2]");
    }
    if (!(nucleus_p > 0.0 && nucleus_p <= 1.0)) {
        throw InvalidArgument("nucleus_p must lie in (0, 1]");
    }
    if (max_output_tokens <= 0) {
        throw InvalidArgument("max_output_tokens must be positive");
    }
    for (const auto& slot : template_slots(template_text(template_id))) {
        if (!variables.contains(slot)) {
            throw UnboundSlot("template slot '" + slot + "' is not bound");
        }
    }
}

std::string LlmRequest::render() const { return render_template(template_text(template_id), variables); }

nlohmann::json ChatRequest::to_json() const
{
    auto messages_json = nlohmann::json::array();
    for (const auto& m : messages) {
        messages_json.push_back({{"role", m.role}, {"content", m.content}});
    }
    return {{"messages", messages_json}, {"temperature", temperature}, {"top_p", top_p}, {"max_tokens", max_tokens}};
}

std::string ChatRequest::digest() const { return sha256_hex(to_json().dump()); }

OpenAiConfig OpenAiConfig::with_env_overrides() const
{
    auto c = *this;
    if (const char* v = std::getenv("SPINACH_LLM_ENDPOINT"); v && *v) {
        c.endpoint = v;
    }
    if (const char* v = std::getenv("SPINACH_LLM_MODEL"); v && *v) {
        c.model = v;
    }
    return c;
}

OpenAiProvider::OpenAiProvider(OpenAiConfig config, std::shared_ptr<kb::HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport))
{
}

std::string OpenAiProvider::complete(const ChatRequest& request)
{
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw ProviderError(config_.api_key_env + " is not set", false);
    }
    auto body = request.to_json();
    body["model"] = config_.model;
    kb::HttpRequest http;
    http.method = "POST";
    http.url = config_.endpoint;
    http.headers = {{"Authorization", std::string("Bearer ") + key}};
    http.body = body.dump();
    http.content_type = "application/json";

    kb::HttpResponse response;
    try {
        response = transport_->send(http);
    } catch (const NetworkError& e) {
        throw ProviderError(e.what());
    }
    if (response.status != 200) {
        bool transient = response.status == 429 || response.status >= 500;
        throw ProviderError(fmt::format("provider returned HTTP {}: {}", response.status, response.body.substr(0, 200)),
                            transient);
    }
    try {
        auto doc = nlohmann::json::parse(response.body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed provider response: ") + e.what(), false);
    }
}

std::vector<TranscriptRecord> load_transcript(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open transcript " + path.string());
    }
    std::vector<TranscriptRecord> records;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            auto j = nlohmann::json::parse(line);
            records.push_back({j.at("digest").get<std::string>(), j.value("template", ""),
                               j.at("response").get<std::string>(), j.value("timestamp", "")});
        } catch (const nlohmann::json::exception& e) {
            throw Error(fmt::format("{}:{}: bad transcript record: {}", path.string(), number, e.what()));
        }
    }
    return records;
}

ReplayProvider::ReplayProvider(const std::vector<TranscriptRecord>& records)
{
    for (const auto& r : records) {
        queue_[r.digest].push_back(r.response);
    }
}

std::string ReplayProvider::complete(const ChatRequest& request)
{
    std::lock_guard lock(mutex_);
    auto it = queue_.find(request.digest());
    if (it == queue_.end() || it->second.empty()) {
        throw ProviderError("no recorded response for request " + request.digest(), false);
    }
    auto text = std::move(it->second.front());
    it->second.pop_front();
    return text;
}

RecordingProvider::RecordingProvider(std::shared_ptr<LlmProvider> inner, std::filesystem::path path, Clock clock)
    : inner_(std::move(inner)), path_(std::move(path)), clock_(std::move(clock))
{
    if (!clock_) {
        clock_ = [] { return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr))); };
    }
}

std::string RecordingProvider::complete(const ChatRequest& request)
{
    auto text = inner_->complete(request);
    nlohmann::json record{{"digest", request.digest()},
                          {"template", std::string(to_string(request.template_id))},
                          {"response", text},
                          {"timestamp", clock_()}};
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    out << record.dump() << '\n';
    return text;
}

LlmGateway::LlmGateway(std::shared_ptr<LlmProvider> provider, GatewayConfig config)
    : provider_(std::move(provider)), config_(config)
{
}

std::string LlmGateway::complete(const LlmRequest& request)
{
    request.validate();
    if (config_.call_budget) {
        auto used = calls_.fetch_add(1);
        if (used >= *config_.call_budget) {
            calls_.fetch_sub(1);
            throw BudgetExceeded(fmt::format("LLM call budget of {} exhausted", *config_.call_budget));
        }
    } else {
        calls_.fetch_add(1);
    }
    ChatRequest chat;
    chat.template_id = request.template_id;
    chat.messages = split_messages(request.render());
    chat.temperature = request.temperature;
    chat.top_p = request.nucleus_p;
    chat.max_tokens = request.max_output_tokens;
    for (int attempt = 0;; ++attempt) {
        try {
            return provider_->complete(chat);
        } catch (const ProviderError& e) {
            if (!e.retriable() || attempt >= config_.max_retries) {
                throw;
            }
        }
        std::this_thread::sleep_for(config_.retry_backoff * (attempt + 1));
    }
}

} // namespace spinach::llm
