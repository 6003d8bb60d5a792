#include "autohist/providers.hpp"

namespace autohist {

namespace {

std::string require_endpoint(std::string const & endpoint, char const * what)
{
    if (endpoint.empty()) {
        throw ConfigError(std::string(what) + ": remote provider requires an endpoint URL");
    }
    try {
        Endpoint::parse(endpoint);
    } catch (ProviderError const & e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
    return endpoint;
}

}  // namespace

RemoteEmbeddingProvider::RemoteEmbeddingProvider(EmbeddingProviderConfig const & config, RetryPolicy retry)
    : client_(require_endpoint(config.endpoint, "embedding"), credential_from_env(config.credentials_env), std::move(retry))
    , dimension_(config.dimension)
    , batch_size_(config.batch_size)
{}

std::string RemoteEmbeddingProvider::identity() const
{
    return "remote:" + client_.url() + "#" + std::to_string(dimension_);
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed(std::span<std::string const> texts)
{
    auto const response = client_.post(nlohmann::json{{"texts", texts}});
    auto const it = response.find("embeddings");
    if (it == response.end() || !it->is_array()) {
        throw ProviderError("embedding response has no \"embeddings\" array");
    }
    if (it->size() != texts.size()) {
        throw EmbeddingError(
            "embedding response has " + std::to_string(it->size()) + " rows for " + std::to_string(texts.size())
            + " texts");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (auto const & row : *it) {
        if (!row.is_array()) {
            throw ProviderError("embedding row is not an array");
        }
        auto components = row.get<std::vector<double>>();
        if (components.size() != dimension_) {
            throw EmbeddingError(
                "dimension mismatch from provider: got " + std::to_string(components.size()) + ", configured "
                + std::to_string(dimension_));
        }
        out.push_back(EmbeddingVector::normalized(std::move(components)));
    }
    return out;
}

RemoteTextClient::RemoteTextClient(std::string endpoint, std::string credentials_env, RetryPolicy retry)
    : client_(std::move(endpoint), credential_from_env(credentials_env), std::move(retry))
{}

std::string RemoteTextClient::complete(std::string const & prompt, nlohmann::json extra) const
{
    extra["prompt"] = prompt;
    auto const response = client_.post(extra);
    auto const it = response.find("text");
    if (it == response.end() || !it->is_string()) {
        throw ProviderError("generation response has no \"text\" string");
    }
    return it->get<std::string>();
}

RemoteLabelProvider::RemoteLabelProvider(LabelProviderConfig const & config, RetryPolicy retry)
    : client_(require_endpoint(config.endpoint, "labeling"), config.credentials_env, std::move(retry))
    , max_tokens_(config.max_label_tokens)
{}

std::string RemoteLabelProvider::identity() const { return "remote:" + client_.endpoint(); }

std::string RemoteLabelProvider::complete(LabelRequest const & request)
{
    return client_.complete(request.prompt, nlohmann::json{{"max_tokens", max_tokens_}});
}

RemoteGenerationProvider::RemoteGenerationProvider(GenerationProviderConfig const & config, RetryPolicy retry)
    : client_(require_endpoint(config.endpoint, "generation"), config.credentials_env, std::move(retry))
{}

std::string RemoteGenerationProvider::identity() const { return "remote:" + client_.endpoint(); }

std::string RemoteGenerationProvider::generate(std::string const & prompt) { return client_.complete(prompt); }

Providers make_providers(PipelineConfig const & config)
{
    Providers p;
    if (config.embedding.kind == ProviderKind::stub) {
        if (config.embedding.dimension != StubEmbeddingProvider::kDimension) {
            throw ConfigError("stub embedding provider has dimension 64");
        }
        p.embedding = std::make_shared<StubEmbeddingProvider>(config.embedding.batch_size);
    } else {
        p.embedding = std::make_shared<RemoteEmbeddingProvider>(config.embedding);
    }
    if (config.labeling.kind == ProviderKind::stub) {
        p.labeling = std::make_shared<StubLabelProvider>();
    } else {
        p.labeling = std::make_shared<RemoteLabelProvider>(config.labeling);
    }
    if (config.generation.kind == ProviderKind::stub) {
        p.generation = std::make_shared<StubGenerationProvider>();
    } else {
        p.generation = std::make_shared<RemoteGenerationProvider>(config.generation);
    }
    return p;
}

}  // namespace autohist
