#pragma once

#include "autohist/clustering.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace autohist {

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class ProviderKind { stub, remote };

struct EmbeddingProviderConfig
{
    ProviderKind kind = ProviderKind::stub;
    std::size_t dimension = 64;
    std::string endpoint;        // REMOTE only
    std::string credentials_env; // name of the variable holding the token
    std::size_t batch_size = 100;
};

struct LabelProviderConfig
{
    ProviderKind kind = ProviderKind::stub;
    std::string prompt_template_id = "label-prompt-v1";
    std::size_t max_label_tokens = 16;
    std::string endpoint;
    std::string credentials_env;
};

struct GenerationProviderConfig
{
    ProviderKind kind = ProviderKind::stub;
    std::string endpoint;
    std::string credentials_env;
};

struct PipelineConfig
{
    std::size_t k_cap = 2000;
    std::vector<double> cutoffs = default_cutoffs();
    Linkage linkage = Linkage::average;
    std::size_t min_cluster_size = kDefaultMinClusterSize;
    std::size_t max_cluster_size = kDefaultMaxClusterSize;
    std::size_t label_parallelism = 4;
    /// Fraction of clusters whose labeling may fail before the run is
    /// treated as a provider failure.
    double max_label_failure_fraction = 0.5;
    double semantic_threshold = 0.5;
    std::size_t suggestion_limit = 30;
    double suggestion_threshold = 0.35;
    /// Remote embeddings are only written to the artifact when set.
    bool store_remote_embeddings = false;
    /// Stage timings make artifacts run-dependent, so they are opt-in.
    bool record_timings = false;
    EmbeddingProviderConfig embedding;
    LabelProviderConfig labeling;
    GenerationProviderConfig generation;

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;
};

struct ServerConfig
{
    int port = 8080;
    std::string host = "0.0.0.0";
    std::string cors_origin;  // empty disables CORS headers
    double provider_timeout_seconds = 20.0;
    double pending_ttl_seconds = 30.0 * 60.0;
    std::size_t compression_threshold = 8 * 1024;
    std::string static_dir;   // optional UI assets

    void validate() const;
};

struct AppConfig
{
    PipelineConfig pipeline;
    ServerConfig server;
};

void to_json(nlohmann::json & j, PipelineConfig const & c);
void from_json(nlohmann::json const & j, PipelineConfig & c);
void to_json(nlohmann::json & j, ServerConfig const & c);
void from_json(nlohmann::json const & j, ServerConfig & c);

/// Missing keys keep their defaults; unknown keys are rejected.
AppConfig load_config(std::filesystem::path const & path);
AppConfig parse_config(nlohmann::json const & document);

}  // namespace autohist
