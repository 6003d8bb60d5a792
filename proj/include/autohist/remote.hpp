#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace autohist {

class ProviderError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Bounded exponential backoff. `delays[i]` is the wait before attempt i+2.
struct RetryPolicy
{
    int max_attempts = 3;
    std::vector<std::chrono::milliseconds> delays{
        std::chrono::milliseconds(500), std::chrono::milliseconds(1000), std::chrono::milliseconds(2000)};
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for

    std::chrono::milliseconds delay_before_attempt(int attempt) const;
};

struct Endpoint
{
    std::string scheme;  // "http" or "https"
    std::string host;
    int port = 80;
    std::string path = "/";

    /// Throws ProviderError for URLs that are not http(s)://host[:port][/path].
    static Endpoint parse(std::string const & url);
    std::string origin() const;
};

/// POSTs JSON documents to a fixed endpoint with retries. Non-2xx status,
/// transport errors and unparsable bodies all count as failed attempts.
class JsonHttpClient
{
public:
    JsonHttpClient(
        std::string url,
        std::string bearer_token = {},
        RetryPolicy retry = {},
        std::chrono::seconds timeout = std::chrono::seconds(30));

    nlohmann::json post(nlohmann::json const & body) const;

    std::string const & url() const noexcept { return url_; }

private:
    std::string url_;
    Endpoint endpoint_;
    std::string bearer_token_;
    RetryPolicy retry_;
    std::chrono::seconds timeout_;
};

/// Reads a credential from the named environment variable; empty name or
/// unset variable yields "".
std::string credential_from_env(std::string const & variable);

}  // namespace autohist
