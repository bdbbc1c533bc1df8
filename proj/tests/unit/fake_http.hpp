#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <string>

#include "spinach/common/error.hpp"
#include "spinach/kb/http.hpp"

namespace spinach::testing {

inline std::string url_decode(std::string_view s)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
            i += 2;
        } else if (s[i] == '+') {
            out.push_back(' ');
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

/// Parameters from a URL query string or a form body.
inline std::map<std::string, std::string> parse_params(std::string_view s)
{
    const std::string text(s);
    std::size_t pos = text.find('?');
    pos = pos == std::string::npos ? 0 : pos + 1;
    std::map<std::string, std::string> out;
    while (pos < text.size()) {
        auto amp = text.find('&', pos);
        if (amp == std::string::npos) {
            amp = text.size();
        }
        const auto part = text.substr(pos, amp - pos);
        if (auto eq = part.find('='); eq != std::string::npos) {
            out[url_decode(part.substr(0, eq))] = url_decode(part.substr(eq + 1));
        }
        pos = amp + 1;
    }
    return out;
}

/// Transport that answers from a handler and counts calls.
class FakeTransport final : public kb::HttpTransport {
public:
    using Handler = std::function<kb::HttpResponse(const kb::HttpRequest&)>;

    explicit FakeTransport(Handler handler) : handler_(std::move(handler)) {}

    kb::HttpResponse send(const kb::HttpRequest& request) override
    {
        ++calls;
        {
            std::lock_guard lock(mutex_);
            last_request = request;
        }
        return handler_(request);
    }

    std::atomic<int> calls{0};
    kb::HttpRequest last_request;

private:
    Handler handler_;
    std::mutex mutex_;
};

} // namespace spinach::testing
