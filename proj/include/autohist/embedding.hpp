#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace autohist {

class EmbeddingError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Unit-norm, finite vector.
class EmbeddingVector
{
public:
    static constexpr double kNormTolerance = 1e-6;

    EmbeddingVector() = default;

    /// Scales `components` to unit length. Throws EmbeddingError when the
    /// input is empty, non-finite or all zero.
    static EmbeddingVector normalized(std::vector<double> components);
    /// Accepts components that are already unit length within
    /// kNormTolerance; throws otherwise.
    static EmbeddingVector from_unit(std::vector<double> components);
    static EmbeddingVector basis(std::size_t dimension, std::size_t axis);

    std::span<double const> components() const noexcept { return components_; }
    std::size_t dimension() const noexcept { return components_.size(); }
    double operator[](std::size_t i) const { return components_[i]; }

    bool operator==(EmbeddingVector const &) const = default;

private:
    explicit EmbeddingVector(std::vector<double> c) : components_(std::move(c)) {}
    std::vector<double> components_;
};

/// Dot product of unit vectors, clamped to [-1, 1].
double cosine_similarity(EmbeddingVector const & a, EmbeddingVector const & b);

/// Re-normalized component-wise mean.
EmbeddingVector centroid(std::span<EmbeddingVector const> vectors);

/// Text normalization applied before embedding and for cache keys:
/// NFC, lowercase, surrounding whitespace trimmed.
std::string normalize_embedding_text(std::string_view text);

class EmbeddingProvider
{
public:
    virtual ~EmbeddingProvider() = default;

    /// Stable name used to key cached vectors, e.g. "stub-trigram-64".
    virtual std::string identity() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::size_t batch_size() const = 0;

    /// One provider round trip. Implementations must be safe to call
    /// concurrently.
    virtual std::vector<EmbeddingVector> embed(std::span<std::string const> texts) = 0;
};

/// Offline embedding: signed character-trigram hashing into 64 buckets.
/// Texts are NFC-normalized, lowercased and padded as "^" + text + "$";
/// each trigram's FNV-1a hash h adds +1 (top bit clear) or -1 (top bit
/// set) to component h mod 64. Empty accumulations map to e0.
class StubEmbeddingProvider final : public EmbeddingProvider
{
public:
    static constexpr std::size_t kDimension = 64;

    explicit StubEmbeddingProvider(std::size_t batch_size = 100);

    std::string identity() const override { return "stub-trigram-64"; }
    std::size_t dimension() const override { return kDimension; }
    std::size_t batch_size() const override { return batch_size_; }
    std::vector<EmbeddingVector> embed(std::span<std::string const> texts) override;

    static EmbeddingVector embed_one(std::string_view text);

private:
    std::size_t batch_size_;
};

/// Thread-safe map from (provider identity, normalized text) to vector.
class EmbeddingCache
{
public:
    using Key = std::pair<std::string, std::string>;

    std::optional<EmbeddingVector> find(std::string const & provider, std::string const & text) const;
    void insert(std::string const & provider, std::string const & text, EmbeddingVector vector);
    std::size_t size() const;
    /// Ordered snapshot, used for serialization.
    std::map<Key, EmbeddingVector> snapshot() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<Key, EmbeddingVector> entries_;
};

/// Embeds one text; `cache` may be null.
EmbeddingVector embed_text(std::string_view text, EmbeddingProvider & provider, EmbeddingCache * cache);

/// Element i equals embed_text(texts[i]). Uncached distinct texts are sent
/// to the provider in chunks of provider.batch_size().
std::vector<EmbeddingVector> embed_batch(
    std::span<std::string const> texts, EmbeddingProvider & provider, EmbeddingCache * cache);

}  // namespace autohist
