#pragma once

#include "autohist/config.hpp"
#include "autohist/embedding.hpp"
#include "autohist/labeling.hpp"
#include "autohist/query.hpp"
#include "autohist/remote.hpp"

#include <memory>
#include <string>

namespace autohist {

/// {"texts": [...]} -> {"embeddings": [[...], ...]}
class RemoteEmbeddingProvider final : public EmbeddingProvider
{
public:
    RemoteEmbeddingProvider(EmbeddingProviderConfig const & config, RetryPolicy retry = {});

    std::string identity() const override;
    std::size_t dimension() const override { return dimension_; }
    std::size_t batch_size() const override { return batch_size_; }
    std::vector<EmbeddingVector> embed(std::span<std::string const> texts) override;

private:
    JsonHttpClient client_;
    std::size_t dimension_;
    std::size_t batch_size_;
};

/// {"prompt": "..."} -> {"text": "..."}
class RemoteTextClient
{
public:
    RemoteTextClient(std::string endpoint, std::string credentials_env, RetryPolicy retry = {});
    std::string complete(std::string const & prompt, nlohmann::json extra = nlohmann::json::object()) const;
    std::string const & endpoint() const noexcept { return client_.url(); }

private:
    JsonHttpClient client_;
};

class RemoteLabelProvider final : public LabelProvider
{
public:
    RemoteLabelProvider(LabelProviderConfig const & config, RetryPolicy retry = {});
    std::string identity() const override;
    std::string complete(LabelRequest const & request) override;

private:
    RemoteTextClient client_;
    std::size_t max_tokens_;
};

class RemoteGenerationProvider final : public GenerationProvider
{
public:
    RemoteGenerationProvider(GenerationProviderConfig const & config, RetryPolicy retry = {});
    std::string identity() const override;
    std::string generate(std::string const & prompt) override;

private:
    RemoteTextClient client_;
};

struct Providers
{
    std::shared_ptr<EmbeddingProvider> embedding;
    std::shared_ptr<LabelProvider> labeling;
    std::shared_ptr<GenerationProvider> generation;
};

/// Builds providers from config. Throws ConfigError on bad remote setup.
Providers make_providers(PipelineConfig const & config);

}  // namespace autohist
