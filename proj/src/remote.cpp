#include "autohist/remote.hpp"

#include <httplib.h>

#include <cstdlib>
#include <regex>
#include <thread>

namespace autohist {

std::chrono::milliseconds RetryPolicy::delay_before_attempt(int attempt) const
{
    if (attempt <= 1 || delays.empty()) {
        return std::chrono::milliseconds(0);
    }
    auto const index = std::min<std::size_t>(static_cast<std::size_t>(attempt - 2), delays.size() - 1);
    return delays[index];
}

Endpoint Endpoint::parse(std::string const & url)
{
    static std::regex const pattern(R"(^(https?)://([^/:]+)(?::([0-9]+))?(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, pattern)) {
        throw ProviderError("invalid endpoint URL '" + url + "'");
    }
    Endpoint e;
    e.scheme = m[1].str();
    for (auto & c : e.scheme) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    e.host = m[2].str();
    e.port = m[3].matched ? std::stoi(m[3].str()) : (e.scheme == "https" ? 443 : 80);
    e.path = m[4].matched ? m[4].str() : "/";
    return e;
}

std::string Endpoint::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

JsonHttpClient::JsonHttpClient(
    std::string url, std::string bearer_token, RetryPolicy retry, std::chrono::seconds timeout)
    : url_(std::move(url))
    , endpoint_(Endpoint::parse(url_))
    , bearer_token_(std::move(bearer_token))
    , retry_(std::move(retry))
    , timeout_(timeout)
{
    if (retry_.max_attempts < 1) {
        throw ProviderError("retry policy needs at least one attempt");
    }
}

nlohmann::json JsonHttpClient::post(nlohmann::json const & body) const
{
    auto const payload = body.dump();
    std::string last_error;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
        if (attempt > 1) {
            auto const delay = retry_.delay_before_attempt(attempt);
            if (retry_.sleep) {
                retry_.sleep(delay);
            } else {
                std::this_thread::sleep_for(delay);
            }
        }
        httplib::Client client(endpoint_.origin());
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_write_timeout(timeout_);
        httplib::Headers headers;
        if (!bearer_token_.empty()) {
            headers.emplace("Authorization", "Bearer " + bearer_token_);
        }
        auto result = client.Post(endpoint_.path, headers, payload, "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status < 200 || result->status >= 300) {
            last_error = "HTTP status " + std::to_string(result->status);
            continue;
        }
        try {
            return nlohmann::json::parse(result->body);
        } catch (nlohmann::json::parse_error const & e) {
            last_error = std::string("unparsable response body: ") + e.what();
        }
    }
    throw ProviderError(
        "request to " + url_ + " failed after " + std::to_string(retry_.max_attempts) + " attempts: " + last_error);
}

std::string credential_from_env(std::string const & variable)
{
    if (variable.empty()) {
        return {};
    }
    char const * value = std::getenv(variable.c_str());
    return value ? std::string(value) : std::string{};
}

}  // namespace autohist
