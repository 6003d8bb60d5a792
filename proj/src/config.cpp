#include "autohist/config.hpp"

#include <fstream>
#include <set>

namespace autohist {

using nlohmann::json;

namespace {

std::string_view kind_name(ProviderKind k) { return k == ProviderKind::stub ? "stub" : "remote"; }

ProviderKind parse_kind(json const & j, std::string const & where)
{
    auto const s = j.get<std::string>();
    if (s == "stub") {
        return ProviderKind::stub;
    }
    if (s == "remote") {
        return ProviderKind::remote;
    }
    throw ConfigError(where + ": provider kind must be \"stub\" or \"remote\", got \"" + s + "\"");
}

/// Reads known keys from an object and rejects the rest.
class Reader
{
public:
    Reader(json const & j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object()) {
            throw ConfigError(where_ + ": expected an object");
        }
    }

    template <class T>
    void get(char const * key, T & out)
    {
        known_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) {
            return;
        }
        try {
            out = it->get<T>();
        } catch (json::exception const & e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    json const * sub(char const * key)
    {
        known_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const
    {
        for (auto const & [key, value] : j_.items()) {
            if (!known_.contains(key)) {
                throw ConfigError(where_ + ": unknown key \"" + key + "\"");
            }
        }
    }

    std::string const & where() const { return where_; }

private:
    json const & j_;
    std::string where_;
    std::set<std::string, std::less<>> known_;
};

void read_kind(Reader & r, ProviderKind & kind)
{
    if (auto const * k = r.sub("kind")) {
        kind = parse_kind(*k, r.where() + ".kind");
    }
}

}  // namespace

void PipelineConfig::validate() const
{
    if (k_cap < 1) {
        throw ConfigError("pipeline.k_cap must be >= 1");
    }
    if (cutoffs.empty()) {
        throw ConfigError("pipeline.cutoffs must not be empty");
    }
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        if (!(cutoffs[i] > 0.0 && cutoffs[i] <= 2.0)) {
            throw ConfigError("pipeline.cutoffs values must lie in (0, 2]");
        }
        if (i > 0 && !(cutoffs[i] > cutoffs[i - 1])) {
            throw ConfigError("pipeline.cutoffs must be strictly increasing");
        }
    }
    if (min_cluster_size < 1 || min_cluster_size > max_cluster_size) {
        throw ConfigError("pipeline cluster size bounds must satisfy 1 <= min_size <= max_size");
    }
    if (label_parallelism < 1) {
        throw ConfigError("pipeline.label_parallelism must be >= 1");
    }
    if (!(max_label_failure_fraction >= 0.0 && max_label_failure_fraction <= 1.0)) {
        throw ConfigError("pipeline.max_label_failure_fraction must lie in [0, 1]");
    }
    if (embedding.dimension < 8) {
        throw ConfigError("pipeline.embedding.dimension must be >= 8");
    }
    if (embedding.batch_size < 1) {
        throw ConfigError("pipeline.embedding.batch_size must be >= 1");
    }
    if (labeling.max_label_tokens < 1) {
        throw ConfigError("pipeline.labeling.max_label_tokens must be >= 1");
    }
    if (labeling.prompt_template_id != "label-prompt-v1") {
        throw ConfigError("pipeline.labeling.prompt_template_id: unknown template \"" + labeling.prompt_template_id + "\"");
    }
    if (suggestion_limit < 1) {
        throw ConfigError("pipeline.suggestion_limit must be >= 1");
    }
}

void ServerConfig::validate() const
{
    if (port < 0 || port > 65535) {
        throw ConfigError("server.port must lie in [0, 65535]");
    }
    if (!(provider_timeout_seconds > 0.0)) {
        throw ConfigError("server.provider_timeout_seconds must be positive");
    }
    if (pending_ttl_seconds < 0.0) {
        throw ConfigError("server.pending_ttl_seconds must be >= 0");
    }
}

void to_json(json & j, PipelineConfig const & c)
{
    j = json{
        {"k_cap", c.k_cap},
        {"cutoffs", c.cutoffs},
        {"linkage", to_string(c.linkage)},
        {"min_cluster_size", c.min_cluster_size},
        {"max_cluster_size", c.max_cluster_size},
        {"label_parallelism", c.label_parallelism},
        {"max_label_failure_fraction", c.max_label_failure_fraction},
        {"semantic_threshold", c.semantic_threshold},
        {"suggestion_limit", c.suggestion_limit},
        {"suggestion_threshold", c.suggestion_threshold},
        {"store_remote_embeddings", c.store_remote_embeddings},
        {"record_timings", c.record_timings},
        {"embedding",
         {{"kind", kind_name(c.embedding.kind)},
          {"dimension", c.embedding.dimension},
          {"endpoint", c.embedding.endpoint},
          {"credentials_env", c.embedding.credentials_env},
          {"batch_size", c.embedding.batch_size}}},
        {"labeling",
         {{"kind", kind_name(c.labeling.kind)},
          {"prompt_template_id", c.labeling.prompt_template_id},
          {"max_label_tokens", c.labeling.max_label_tokens},
          {"endpoint", c.labeling.endpoint},
          {"credentials_env", c.labeling.credentials_env}}},
        {"generation",
         {{"kind", kind_name(c.generation.kind)},
          {"endpoint", c.generation.endpoint},
          {"credentials_env", c.generation.credentials_env}}},
    };
}

void from_json(json const & j, PipelineConfig & c)
{
    Reader r(j, "pipeline");
    r.get("k_cap", c.k_cap);
    r.get("cutoffs", c.cutoffs);
    if (auto const * l = r.sub("linkage")) {
        auto const parsed = parse_linkage(l->get<std::string>());
        if (!parsed) {
            throw ConfigError("pipeline.linkage must be average, complete or single");
        }
        c.linkage = *parsed;
    }
    r.get("min_cluster_size", c.min_cluster_size);
    r.get("max_cluster_size", c.max_cluster_size);
    r.get("label_parallelism", c.label_parallelism);
    r.get("max_label_failure_fraction", c.max_label_failure_fraction);
    r.get("semantic_threshold", c.semantic_threshold);
    r.get("suggestion_limit", c.suggestion_limit);
    r.get("suggestion_threshold", c.suggestion_threshold);
    r.get("store_remote_embeddings", c.store_remote_embeddings);
    r.get("record_timings", c.record_timings);
    if (auto const * e = r.sub("embedding")) {
        Reader er(*e, "pipeline.embedding");
        read_kind(er, c.embedding.kind);
        er.get("dimension", c.embedding.dimension);
        er.get("endpoint", c.embedding.endpoint);
        er.get("credentials_env", c.embedding.credentials_env);
        er.get("batch_size", c.embedding.batch_size);
        er.finish();
    }
    if (auto const * l = r.sub("labeling")) {
        Reader lr(*l, "pipeline.labeling");
        read_kind(lr, c.labeling.kind);
        lr.get("prompt_template_id", c.labeling.prompt_template_id);
        lr.get("max_label_tokens", c.labeling.max_label_tokens);
        lr.get("endpoint", c.labeling.endpoint);
        lr.get("credentials_env", c.labeling.credentials_env);
        lr.finish();
    }
    if (auto const * g = r.sub("generation")) {
        Reader gr(*g, "pipeline.generation");
        read_kind(gr, c.generation.kind);
        gr.get("endpoint", c.generation.endpoint);
        gr.get("credentials_env", c.generation.credentials_env);
        gr.finish();
    }
    r.finish();
}

void to_json(json & j, ServerConfig const & c)
{
    j = json{
        {"port", c.port},
        {"host", c.host},
        {"cors_origin", c.cors_origin},
        {"provider_timeout_seconds", c.provider_timeout_seconds},
        {"pending_ttl_seconds", c.pending_ttl_seconds},
        {"compression_threshold", c.compression_threshold},
        {"static_dir", c.static_dir},
    };
}

void from_json(json const & j, ServerConfig & c)
{
    Reader r(j, "server");
    r.get("port", c.port);
    r.get("host", c.host);
    r.get("cors_origin", c.cors_origin);
    r.get("provider_timeout_seconds", c.provider_timeout_seconds);
    r.get("pending_ttl_seconds", c.pending_ttl_seconds);
    r.get("compression_threshold", c.compression_threshold);
    r.get("static_dir", c.static_dir);
    r.finish();
}

AppConfig parse_config(json const & document)
{
    AppConfig config;
    Reader r(document, "config");
    if (auto const * p = r.sub("pipeline")) {
        from_json(*p, config.pipeline);
    }
    if (auto const * s = r.sub("server")) {
        from_json(*s, config.server);
    }
    r.finish();
    config.pipeline.validate();
    config.server.validate();
    return config;
}

AppConfig load_config(std::filesystem::path const & path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    json document;
    try {
        document = json::parse(in);
    } catch (json::parse_error const & e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(document);
}

}  // namespace autohist
