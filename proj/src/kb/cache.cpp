#include "spinach/kb/cache.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spinach/common/digest.hpp"
#include "spinach/common/error.hpp"

namespace spinach::kb {

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir))
{
    if (dir_) {
        std::filesystem::create_directories(*dir_);
    }
}

std::string ResponseCache::digest(std::string_view operation, std::string_view argument)
{
    std::string key;
    key.reserve(operation.size() + argument.size() + 1);
    key.append(operation).push_back('\n');
    key.append(argument);
    return sha256_hex(key);
}

std::filesystem::path ResponseCache::file_for(const std::string& digest) const
{
    return *dir_ / (digest + ".json");
}

std::optional<std::string> ResponseCache::get(std::string_view operation, std::string_view argument) const
{
    auto key = digest(operation, argument);
    {
        std::shared_lock lock(mutex_);
        if (auto it = memory_.find(key); it != memory_.end()) {
            return it->second;
        }
    }
    if (!dir_) {
        return std::nullopt;
    }
    std::ifstream in(file_for(key), std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    auto doc = nlohmann::json::parse(ss.str(), nullptr, false);
    if (doc.is_discarded() || !doc.contains("payload")) {
        return std::nullopt;
    }
    auto payload = doc["payload"].get<std::string>();
    std::unique_lock lock(mutex_);
    memory_.emplace(key, payload);
    return payload;
}

void ResponseCache::put(std::string_view operation, std::string_view argument, const std::string& payload)
{
    auto key = digest(operation, argument);
    std::unique_lock lock(mutex_);
    memory_[key] = payload;
    if (!dir_) {
        return;
    }
    nlohmann::json doc{{"operation", operation}, {"argument", argument}, {"payload", payload}};
    auto path = file_for(key);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write cache file " + tmp.string());
        }
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

} // namespace spinach::kb
