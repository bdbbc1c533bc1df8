#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace spinach::kb {

struct HttpRequest {
    std::string method = "GET";
    /// Absolute URL including the query string.
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    std::string content_type;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Minimal synchronous HTTP boundary. Implementations throw NetworkError when
/// no response could be obtained at all (DNS, connect, read timeout).
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (HTTPS via OpenSSL).
std::shared_ptr<HttpTransport> make_default_transport(std::chrono::milliseconds timeout);

/// `application/x-www-form-urlencoded` encoding of a single component.
std::string url_encode(std::string_view s);

/// Builds `base?k1=v1&k2=v2` with encoded values, keeping parameter order.
std::string build_url(std::string_view base, const std::vector<std::pair<std::string, std::string>>& params);

} // namespace spinach::kb
