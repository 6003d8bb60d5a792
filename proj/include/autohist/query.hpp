#pragma once

#include "autohist/corpus.hpp"
#include "autohist/embedding.hpp"
#include "autohist/extraction.hpp"
#include "autohist/histogram.hpp"

#include <cstddef>
#include <map>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace autohist {

enum class MatchKind { exact, semantic };

std::string_view to_string(MatchKind kind);

struct SearchResult
{
    std::string histogram_id;
    std::string label;
    double score;  // in [0, 1]; 1 for exact matches
    MatchKind match_kind;

    bool operator==(SearchResult const &) const = default;
};

inline constexpr double kDefaultSemanticThreshold = 0.5;
inline constexpr std::size_t kDefaultSuggestionLimit = 30;
inline constexpr double kDefaultSuggestionThreshold = 0.35;
inline constexpr std::size_t kMaxGeneratedEntities = 20;
/// Suggestion similarities are ranked at this resolution (1e-12), so
/// values that differ only by rounding are treated as ties.
inline constexpr double kSimilarityTieGrid = 1e12;

/// Case-insensitive substring match against labels and bucket surfaces.
std::vector<SearchResult> exact_search(std::string_view query, std::span<Histogram const> histograms);

/// Exact matches first, then histograms whose label embedding has cosine
/// >= threshold with the query embedding. Throws EmbeddingError /
/// ProviderError when the provider fails.
std::vector<SearchResult> semantic_search(
    std::string_view query,
    std::span<Histogram const> histograms,
    EmbeddingProvider & provider,
    EmbeddingCache * cache,
    double threshold = kDefaultSemanticThreshold);

/// Free-form text generation used for the live category flow.
class GenerationProvider
{
public:
    virtual ~GenerationProvider() = default;
    virtual std::string identity() const = 0;
    virtual std::string generate(std::string const & prompt) = 0;
};

/// Answers "give me examples of <category>" prompts from the bundled
/// fixture table; any other prompt gets an empty reply.
class StubGenerationProvider final : public GenerationProvider
{
public:
    StubGenerationProvider();

    std::string identity() const override { return "stub-generator"; }
    std::string generate(std::string const & prompt) override;

private:
    std::map<std::string, std::string, std::less<>> responses_;
};

std::string build_generation_prompt(std::string_view category);

/// Splits on commas and newlines, strips list markers ("1.", "-", "*"),
/// trims, lowercases and de-duplicates; at most kMaxGeneratedEntities.
std::vector<std::string> parse_generated_entities(std::string_view raw);

std::vector<std::string> generate_candidate_entities(std::string_view category, GenerationProvider & provider);

struct EntitySuggestion
{
    std::size_t entity_id;
    std::vector<std::string> surface;
    double similarity;

    bool operator==(EntitySuggestion const &) const = default;
};

/// Ranks table entities by cosine to the centroid of the candidates'
/// embeddings (ties, at kSimilarityTieGrid resolution, by entity id) and
/// keeps the top `limit` at or above `threshold`.
std::vector<EntitySuggestion> suggest_dataset_entities(
    std::span<std::string const> candidates,
    EntityTable const & table,
    EmbeddingProvider & provider,
    EmbeddingCache * cache,
    std::size_t limit = kDefaultSuggestionLimit,
    double threshold = kDefaultSuggestionThreshold);

struct PendingCategory
{
    std::string id;
    std::string category;
    std::vector<std::string> llm_examples;
    std::vector<EntitySuggestion> suggestions;
};

/// Builds a USER histogram with id "user-<sequence>".
Histogram create_user_histogram(
    std::string label,
    std::span<std::size_t const> selected_entity_ids,
    EntityTable const & table,
    Corpus const & corpus,
    std::size_t sequence);

/// AUTO and USER histograms as served. AUTO histograms never change;
/// USER histograms are appended under a single writer and readers get a
/// consistent snapshot.
class HistogramCatalog
{
public:
    HistogramCatalog(std::vector<Histogram> auto_histograms, std::vector<Histogram> user_histograms);

    /// AUTO followed by USER.
    std::vector<Histogram> all() const;
    std::vector<Histogram> user() const;
    std::vector<Histogram> const & automatic() const noexcept { return auto_; }
    std::size_t user_count() const;

    /// Creates and appends "user-<n+1>" where n is the number of USER
    /// histograms created so far (including loaded ones).
    Histogram append_user(
        std::string label,
        std::span<std::size_t const> selected_entity_ids,
        EntityTable const & table,
        Corpus const & corpus);

private:
    std::vector<Histogram> const auto_;
    mutable std::shared_mutex mutex_;
    std::vector<Histogram> user_;
    std::size_t sequence_ = 0;
};

}  // namespace autohist
