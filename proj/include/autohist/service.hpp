#pragma once

#include "autohist/config.hpp"
#include "autohist/corpus.hpp"
#include "autohist/embedding.hpp"
#include "autohist/providers.hpp"
#include "autohist/query.hpp"
#include "autohist/store.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

namespace httplib {
class Server;
}

namespace autohist {

/// JSON encodings shared by the HTTP API and tests.
nlohmann::json histogram_to_json(Histogram const & histogram);
nlohmann::json search_result_to_json(SearchResult const & result);
nlohmann::json suggestion_to_json(EntitySuggestion const & suggestion);

/// gzip-compresses `data` (RFC 1952).
std::string gzip_compress(std::string const & data);
std::string gzip_decompress(std::string const & data);

struct ApiResponse
{
    int status = 200;
    nlohmann::json body;
};

/// Request handling for the exploration API, independent of the HTTP
/// transport. Readers run concurrently; user-histogram creation and
/// pending-category mutation go through a single writer.
class Service
{
public:
    using Clock = std::chrono::steady_clock;

    Service(ServerConfig config, Providers providers);
    ~Service();

    /// Installs the session. `artifact_path`, when non-empty, is rewritten
    /// after each user histogram is created.
    void load(AnalysisArtifact artifact, Corpus corpus, std::filesystem::path artifact_path = {});
    bool loaded() const;

    ApiResponse get_examples(std::map<std::string, std::string> const & params) const;
    ApiResponse get_histograms(std::map<std::string, std::string> const & params) const;
    ApiResponse post_search(std::string const & body);
    ApiResponse post_categories(std::string const & body);
    ApiResponse post_histograms(std::string const & body);
    ApiResponse get_health() const;

    /// Routes /api/* onto `server`, plus request logging, CORS, response
    /// compression and the JSON 404 handler.
    void register_routes(httplib::Server & server);

    void set_clock(std::function<Clock::time_point()> clock);
    void set_logger(std::function<void(std::string const &)> logger);

private:
    struct Session;
    struct PendingEntry
    {
        PendingCategory category;
        Clock::time_point created;
    };

    std::shared_ptr<Session> session() const;
    void purge_expired_locked();
    template <class Fn>
    auto with_timeout(Fn fn) -> std::optional<decltype(fn())>;

    ServerConfig config_;
    Providers providers_;
    std::function<Clock::time_point()> clock_;
    std::function<void(std::string const &)> logger_;

    mutable std::shared_mutex session_mutex_;
    std::shared_ptr<Session> session_;

    std::mutex writer_mutex_;
    std::map<std::string, PendingEntry> pending_;
    std::size_t pending_sequence_ = 0;
};

}  // namespace autohist
