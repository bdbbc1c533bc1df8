#include "spinach/kb/http.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <fmt/format.h>

#include <cctype>

#include "spinach/common/error.hpp"

namespace spinach::kb {

namespace {

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string path;   // /path?query
};

SplitUrl split_url(const std::string& url)
{
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw InvalidArgument("URL without scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
public:
    explicit HttplibTransport(std::chrono::milliseconds timeout) : timeout_(timeout) {}

    HttpResponse send(const HttpRequest& request) override
    {
        auto [origin, path] = split_url(request.url);
        httplib::Client client(origin);
        client.set_follow_location(true);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_).count(), 0);
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_).count(), 0);
        httplib::Headers headers;
        for (const auto& [k, v] : request.headers) {
            headers.emplace(k, v);
        }
        httplib::Result result = request.method == "POST"
            ? client.Post(path, headers, request.body, request.content_type)
            : client.Get(path, headers);
        if (!result) {
            throw NetworkError(fmt::format("{} {} failed: {}", request.method, request.url,
                                           httplib::to_string(result.error())));
        }
        return HttpResponse{result->status, result->body};
    }

private:
    std::chrono::milliseconds timeout_;
};

} // namespace

std::shared_ptr<HttpTransport> make_default_transport(std::chrono::milliseconds timeout)
{
    return std::make_shared<HttplibTransport>(timeout);
}

std::string url_encode(std::string_view s)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size() * 3);
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xf]);
        }
    }
    return out;
}

std::string build_url(std::string_view base, const std::vector<std::pair<std::string, std::string>>& params)
{
    std::string url(base);
    char sep = url.find('?') == std::string::npos ? '?' : '&';
    for (const auto& [k, v] : params) {
        url.push_back(sep);
        url += url_encode(k);
        url.push_back('=');
        url += url_encode(v);
        sep = '&';
    }
    return url;
}

} // namespace spinach::kb
