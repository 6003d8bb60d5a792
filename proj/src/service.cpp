#include "autohist/service.hpp"

#include "autohist/histogram.hpp"
#include "autohist/unicode.hpp"

#include <httplib.h>
#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <future>
#include <thread>

namespace autohist {

using nlohmann::json;

namespace {

ApiResponse error(int status, std::string message) { return ApiResponse{status, json{{"error", std::move(message)}}}; }

/// Strict non-negative integer parse.
std::optional<std::size_t> parse_index(std::string const & s)
{
    std::size_t value = 0;
    auto const * end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (s.empty() || ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return value;
}

std::optional<json> parse_body(std::string const & body)
{
    try {
        auto j = json::parse(body);
        if (j.is_object()) {
            return j;
        }
    } catch (json::parse_error const &) {
    }
    return std::nullopt;
}

std::optional<std::string> string_field(json const & body, char const * key)
{
    auto it = body.find(key);
    if (it == body.end() || !it->is_string()) {
        return std::nullopt;
    }
    return it->get<std::string>();
}

class ProviderTimeout : public std::runtime_error
{
public:
    ProviderTimeout() : std::runtime_error("provider call timed out") {}
};

}  // namespace

json histogram_to_json(Histogram const & h)
{
    json buckets = json::array();
    for (auto const & b : h.buckets) {
        buckets.push_back(json{{"entity_id", b.entity_id}, {"surface", b.text()}, {"count", b.count}});
    }
    return json{
        {"id", h.id},
        {"label", h.label},
        {"source", to_string(h.source)},
        {"total_count", h.total_count},
        {"entropy", h.entropy},
        {"buckets", std::move(buckets)},
    };
}

json search_result_to_json(SearchResult const & r)
{
    return json{
        {"histogram_id", r.histogram_id}, {"label", r.label}, {"score", r.score}, {"match_kind", to_string(r.match_kind)}};
}

json suggestion_to_json(EntitySuggestion const & s)
{
    std::string surface;
    for (std::size_t i = 0; i < s.surface.size(); ++i) {
        surface += (i ? " " : "") + s.surface[i];
    }
    return json{{"entity_id", s.entity_id}, {"surface", surface}, {"similarity", s.similarity}};
}

std::string gzip_compress(std::string const & data)
{
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw std::runtime_error("deflateInit2 failed");
    }
    zs.next_in = reinterpret_cast<Bytef *>(const_cast<char *>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    std::string out;
    char buffer[16384];
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef *>(buffer);
        zs.avail_out = sizeof buffer;
        rc = deflate(&zs, Z_FINISH);
        out.append(buffer, sizeof buffer - zs.avail_out);
    } while (rc == Z_OK);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) {
        throw std::runtime_error("gzip compression failed");
    }
    return out;
}

std::string gzip_decompress(std::string const & data)
{
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) {
        throw std::runtime_error("inflateInit2 failed");
    }
    zs.next_in = reinterpret_cast<Bytef *>(const_cast<char *>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    std::string out;
    char buffer[16384];
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef *>(buffer);
        zs.avail_out = sizeof buffer;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error("gzip decompression failed");
        }
        out.append(buffer, sizeof buffer - zs.avail_out);
    } while (rc != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
}

struct Service::Session
{
    Session(AnalysisArtifact a, Corpus c, std::filesystem::path p)
        : artifact(std::move(a))
        , corpus(std::move(c))
        , catalog(artifact.auto_histograms, artifact.user_histograms)
        , artifact_path(std::move(p))
    {
        for (auto const & [text, vector] : artifact.embeddings.vectors) {
            cache.insert(artifact.embeddings.provider, text, vector);
        }
    }

    AnalysisArtifact const artifact;
    Corpus const corpus;
    HistogramCatalog catalog;
    EmbeddingCache cache;
    std::filesystem::path const artifact_path;
};

Service::Service(ServerConfig config, Providers providers)
    : config_(std::move(config))
    , providers_(std::move(providers))
    , clock_([] { return Clock::now(); })
{}

Service::~Service() = default;

void Service::load(AnalysisArtifact artifact, Corpus corpus, std::filesystem::path artifact_path)
{
    validate_against_corpus(artifact, corpus);
    auto session = std::make_shared<Session>(std::move(artifact), std::move(corpus), std::move(artifact_path));
    std::unique_lock lock(session_mutex_);
    session_ = std::move(session);
}

bool Service::loaded() const { return session() != nullptr; }

std::shared_ptr<Service::Session> Service::session() const
{
    std::shared_lock lock(session_mutex_);
    return session_;
}

void Service::set_clock(std::function<Clock::time_point()> clock) { clock_ = std::move(clock); }

void Service::set_logger(std::function<void(std::string const &)> logger) { logger_ = std::move(logger); }

template <class Fn>
auto Service::with_timeout(Fn fn) -> std::optional<decltype(fn())>
{
    using Result = decltype(fn());
    auto task = std::make_shared<std::packaged_task<Result()>>(std::move(fn));
    auto future = task->get_future();
    // Detached so a hung provider cannot block the request past the timeout.
    std::thread([task] { (*task)(); }).detach();
    auto const timeout = std::chrono::duration<double>(config_.provider_timeout_seconds);
    if (future.wait_for(timeout) != std::future_status::ready) {
        return std::nullopt;
    }
    return future.get();
}

void Service::purge_expired_locked()
{
    auto const now = clock_();
    auto const ttl = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config_.pending_ttl_seconds));
    std::erase_if(pending_, [&](auto const & item) { return now - item.second.created >= ttl; });
}

ApiResponse Service::get_examples(std::map<std::string, std::string> const & params) const
{
    auto const s = session();
    if (!s) {
        return error(503, "artifact not loaded");
    }
    std::size_t offset = 0;
    std::size_t limit = 50;
    if (auto it = params.find("offset"); it != params.end()) {
        auto v = parse_index(it->second);
        if (!v) {
            return error(400, "offset must be a non-negative integer");
        }
        offset = *v;
    }
    if (auto it = params.find("limit"); it != params.end()) {
        auto v = parse_index(it->second);
        if (!v || *v < 1 || *v > 500) {
            return error(400, "limit must be an integer in [1, 500]");
        }
        limit = *v;
    }

    std::vector<std::size_t> ids;
    json filter = nullptr;
    if (auto it = params.find("entity_id"); it != params.end()) {
        auto v = parse_index(it->second);
        if (!v) {
            return error(400, "entity_id must be a non-negative integer");
        }
        auto const & table = s->artifact.entities;
        if (!table.contains(*v)) {
            return error(404, "unknown entity_id " + it->second);
        }
        ids = table.at(*v).postings;
        filter = *v;
    }
    auto const total = filter.is_null() ? s->corpus.size() : ids.size();
    json examples = json::array();
    for (std::size_t i = offset; i < total && i < offset + limit; ++i) {
        auto const & ex = s->corpus.at(filter.is_null() ? i : ids[i]);
        examples.push_back(json{{"id", ex.id}, {"text", ex.text}});
    }
    return ApiResponse{
        200,
        json{{"examples", std::move(examples)}, {"total", total}, {"offset", offset}, {"limit", limit}, {"entity_id", filter}}};
}

ApiResponse Service::get_histograms(std::map<std::string, std::string> const & params) const
{
    auto const s = session();
    if (!s) {
        return error(503, "artifact not loaded");
    }
    SortKey key = SortKey::total_count;
    if (auto it = params.find("sort"); it != params.end()) {
        auto parsed = parse_sort_key(it->second);
        if (!parsed || it->second == "total_count") {
            return error(400, "sort must be \"total\" or \"entropy\"");
        }
        key = *parsed;
    }
    json list = json::array();
    for (auto const & h : sort_histograms(s->catalog.all(), key)) {
        list.push_back(histogram_to_json(h));
    }
    return ApiResponse{200, json{{"sort", to_string(key)}, {"histograms", std::move(list)}}};
}

ApiResponse Service::post_search(std::string const & raw)
{
    auto const s = session();
    if (!s) {
        return error(503, "artifact not loaded");
    }
    auto const body = parse_body(raw);
    if (!body) {
        return error(400, "request body must be a JSON object");
    }
    auto const query = string_field(*body, "query");
    if (!query || text::trim(*query).empty()) {
        return error(400, "query must be a non-empty string");
    }
    std::string mode = "exact";
    if (body->contains("mode")) {
        auto m = string_field(*body, "mode");
        if (!m || (*m != "exact" && *m != "semantic")) {
            return error(400, "mode must be \"exact\" or \"semantic\"");
        }
        mode = *m;
    }

    auto const histograms = s->catalog.all();
    std::vector<SearchResult> results;
    if (mode == "exact") {
        results = exact_search(*query, histograms);
    } else {
        auto const threshold = s->artifact.config.semantic_threshold;
        auto provider = providers_.embedding;
        try {
            auto r = with_timeout([s, provider, histograms, q = *query, threshold] {
                return semantic_search(q, histograms, *provider, &s->cache, threshold);
            });
            if (!r) {
                return error(504, "embedding provider timed out");
            }
            results = std::move(*r);
        } catch (std::exception const & e) {
            return error(502, std::string("embedding provider failed: ") + e.what());
        }
    }
    json list = json::array();
    for (auto const & r : results) {
        list.push_back(search_result_to_json(r));
    }
    return ApiResponse{200, json{{"query", *query}, {"mode", mode}, {"results", std::move(list)}}};
}

ApiResponse Service::post_categories(std::string const & raw)
{
    auto const s = session();
    if (!s) {
        return error(503, "artifact not loaded");
    }
    auto const body = parse_body(raw);
    if (!body) {
        return error(400, "request body must be a JSON object");
    }
    auto const category = string_field(*body, "category");
    if (!category || text::trim(*category).empty()) {
        return error(400, "category must be a non-empty string");
    }

    auto const & cfg = s->artifact.config;
    auto generator = providers_.generation;
    auto embedder = providers_.embedding;
    struct Outcome
    {
        std::vector<std::string> examples;
        std::vector<EntitySuggestion> suggestions;
    };
    Outcome outcome;
    try {
        auto r = with_timeout([s, generator, embedder, c = *category, limit = cfg.suggestion_limit,
                               threshold = cfg.suggestion_threshold] {
            Outcome o;
            o.examples = generate_candidate_entities(c, *generator);
            if (!o.examples.empty()) {
                o.suggestions = suggest_dataset_entities(o.examples, s->artifact.entities, *embedder, &s->cache, limit, threshold);
            }
            return o;
        });
        if (!r) {
            return error(504, "provider timed out");
        }
        outcome = std::move(*r);
    } catch (EmbeddingError const & e) {
        // A degenerate centroid is a property of the generated examples,
        // not a provider outage.
        if (std::string_view(e.what()).starts_with("degenerate centroid")) {
            outcome = {};
        } else {
            return error(502, std::string("provider failed: ") + e.what());
        }
    } catch (std::exception const & e) {
        return error(502, std::string("provider failed: ") + e.what());
    }

    PendingCategory pending;
    pending.category = std::string(text::trim(*category));
    pending.llm_examples = std::move(outcome.examples);
    pending.suggestions = std::move(outcome.suggestions);
    {
        std::lock_guard lock(writer_mutex_);
        purge_expired_locked();
        pending.id = "pending-" + std::to_string(++pending_sequence_);
        pending_[pending.id] = PendingEntry{pending, clock_()};
    }
    json suggestions = json::array();
    for (auto const & sug : pending.suggestions) {
        suggestions.push_back(suggestion_to_json(sug));
    }
    return ApiResponse{
        200,
        json{
            {"id", pending.id},
            {"category", pending.category},
            {"llm_examples", pending.llm_examples},
            {"suggestions", std::move(suggestions)}}};
}

ApiResponse Service::post_histograms(std::string const & raw)
{
    auto const s = session();
    if (!s) {
        return error(503, "artifact not loaded");
    }
    auto const body = parse_body(raw);
    if (!body) {
        return error(400, "request body must be a JSON object");
    }
    auto const pending_id = string_field(*body, "pending_id");
    if (!pending_id) {
        return error(400, "pending_id must be a string");
    }
    auto const label = string_field(*body, "label");
    if (!label || text::trim(*label).empty()) {
        return error(400, "label must be a non-empty string");
    }
    auto const it = body->find("entity_ids");
    if (it == body->end() || !it->is_array()) {
        return error(400, "entity_ids must be an array of integers");
    }
    std::vector<std::size_t> ids;
    for (auto const & v : *it) {
        if (!v.is_number_unsigned()) {
            return error(400, "entity_ids must be an array of non-negative integers");
        }
        ids.push_back(v.get<std::size_t>());
    }

    std::lock_guard lock(writer_mutex_);
    purge_expired_locked();
    auto const entry = pending_.find(*pending_id);
    if (entry == pending_.end()) {
        return error(404, "unknown or expired pending_id '" + *pending_id + "'");
    }
    if (ids.empty()) {
        return error(400, "select at least one entity");
    }
    auto const & suggestions = entry->second.category.suggestions;
    for (auto id : ids) {
        bool const offered = std::any_of(suggestions.begin(), suggestions.end(), [id](auto const & sug) {
            return sug.entity_id == id;
        });
        if (!offered) {
            return error(400, "entity " + std::to_string(id) + " was not suggested for this category");
        }
    }
    Histogram created;
    try {
        created = s->catalog.append_user(*label, ids, s->artifact.entities, s->corpus);
    } catch (std::exception const & e) {
        return error(400, e.what());
    }
    pending_.erase(entry);

    if (!s->artifact_path.empty()) {
        try {
            AnalysisArtifact updated = s->artifact;
            updated.user_histograms = s->catalog.user();
            save_artifact(updated, s->artifact_path);
        } catch (std::exception const & e) {
            if (logger_) {
                logger_(std::string("warning: could not persist user histograms: ") + e.what());
            }
        }
    }
    return ApiResponse{201, histogram_to_json(created)};
}

ApiResponse Service::get_health() const
{
    auto const s = session();
    if (!s) {
        return ApiResponse{503, json{{"status", "loading"}}};
    }
    return ApiResponse{
        200,
        json{
            {"status", "ok"},
            {"artifact_digest", s->artifact.corpus_digest},
            {"corpus_examples", s->corpus.size()},
            {"histogram_counts", json{{"auto", s->artifact.auto_histograms.size()}, {"user", s->catalog.user_count()}}}}};
}

void Service::register_routes(httplib::Server & server)
{
    auto params_of = [](httplib::Request const & req) {
        std::map<std::string, std::string> out;
        for (auto const & [k, v] : req.params) {
            out.emplace(k, v);
        }
        return out;
    };
    auto send = [this](httplib::Request const & req, httplib::Response & res, ApiResponse const & r) {
        res.status = r.status;
        std::string body = r.body.dump(-1, ' ', false, json::error_handler_t::replace);
        if (body.size() > config_.compression_threshold
            && req.get_header_value("Accept-Encoding").find("gzip") != std::string::npos) {
            body = gzip_compress(body);
            res.set_header("Content-Encoding", "gzip");
        }
        res.set_content(body, "application/json");
    };

    server.Get("/api/examples", [=, this](auto const & req, auto & res) { send(req, res, get_examples(params_of(req))); });
    server.Get("/api/histograms", [=, this](auto const & req, auto & res) {
        send(req, res, get_histograms(params_of(req)));
    });
    server.Post("/api/search", [=, this](auto const & req, auto & res) { send(req, res, post_search(req.body)); });
    server.Post("/api/categories", [=, this](auto const & req, auto & res) { send(req, res, post_categories(req.body)); });
    server.Post("/api/histograms", [=, this](auto const & req, auto & res) { send(req, res, post_histograms(req.body)); });
    server.Get("/api/health", [=, this](auto const & req, auto & res) { send(req, res, get_health()); });

    if (!config_.cors_origin.empty()) {
        server.Options(R"(/api/.*)", [](auto const &, auto & res) { res.status = 204; });
        server.set_post_routing_handler([origin = config_.cors_origin](auto const &, auto & res) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        });
    }
    if (!config_.static_dir.empty()) {
        server.set_mount_point("/", config_.static_dir);
    }
    server.set_error_handler([](auto const & req, auto & res) {
        if (res.body.empty()) {
            auto const message = res.status == 404 ? "no route for " + req.method + " " + req.path
                                                   : std::string(httplib::status_message(res.status));
            res.set_content(json{{"error", message}}.dump(), "application/json");
        }
    });
    server.set_logger([this](auto const & req, auto const & res) {
        if (logger_) {
            logger_(req.method + " " + req.path + " " + std::to_string(res.status) + " " + std::to_string(res.body.size()));
        }
    });
}

}  // namespace autohist
