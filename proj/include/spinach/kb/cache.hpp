#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

namespace spinach::kb {

/// Content-addressed response store keyed by (operation, canonical argument).
/// Entries live in memory and, when a directory is given, as one JSON document
/// per digest on disk. Readers share; writers are exclusive.
class ResponseCache {
public:
    explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

    static std::string digest(std::string_view operation, std::string_view argument);

    std::optional<std::string> get(std::string_view operation, std::string_view argument) const;
    void put(std::string_view operation, std::string_view argument, const std::string& payload);

    const std::optional<std::filesystem::path>& directory() const { return dir_; }

private:
    std::filesystem::path file_for(const std::string& digest) const;

    std::optional<std::filesystem::path> dir_;
    mutable std::shared_mutex mutex_;
    mutable std::map<std::string, std::string> memory_;
};

} // namespace spinach::kb
