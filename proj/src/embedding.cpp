#include "autohist/embedding.hpp"

#include "autohist/hash.hpp"
#include "autohist/unicode.hpp"

#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

namespace autohist {

namespace {

double squared_norm(std::span<double const> c)
{
    double s = 0.0;
    for (double x : c) {
        s += x * x;
    }
    return s;
}

void check_finite(std::span<double const> c)
{
    for (double x : c) {
        if (!std::isfinite(x)) {
            throw EmbeddingError("embedding has a non-finite component");
        }
    }
}

}  // namespace

EmbeddingVector EmbeddingVector::normalized(std::vector<double> components)
{
    if (components.empty()) {
        throw EmbeddingError("embedding has zero dimensions");
    }
    check_finite(components);
    double const norm = std::sqrt(squared_norm(components));
    if (norm == 0.0) {
        throw EmbeddingError("cannot normalize an all-zero embedding");
    }
    for (double & x : components) {
        x /= norm;
    }
    return EmbeddingVector(std::move(components));
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<double> components)
{
    if (components.empty()) {
        throw EmbeddingError("embedding has zero dimensions");
    }
    check_finite(components);
    double const norm = std::sqrt(squared_norm(components));
    if (std::abs(norm - 1.0) > kNormTolerance) {
        throw EmbeddingError("embedding norm " + std::to_string(norm) + " is not 1 within tolerance");
    }
    return EmbeddingVector(std::move(components));
}

EmbeddingVector EmbeddingVector::basis(std::size_t dimension, std::size_t axis)
{
    if (axis >= dimension) {
        throw EmbeddingError("basis axis out of range");
    }
    std::vector<double> c(dimension, 0.0);
    c[axis] = 1.0;
    return EmbeddingVector(std::move(c));
}

double cosine_similarity(EmbeddingVector const & a, EmbeddingVector const & b)
{
    if (a.dimension() != b.dimension()) {
        throw EmbeddingError(
            "dimension mismatch: " + std::to_string(a.dimension()) + " vs " + std::to_string(b.dimension()));
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) {
        dot += a[i] * b[i];
    }
    return std::clamp(dot, -1.0, 1.0);
}

EmbeddingVector centroid(std::span<EmbeddingVector const> vectors)
{
    if (vectors.empty()) {
        throw EmbeddingError("centroid of an empty set");
    }
    auto const dim = vectors.front().dimension();
    std::vector<double> sum(dim, 0.0);
    for (auto const & v : vectors) {
        if (v.dimension() != dim) {
            throw EmbeddingError("centroid inputs have mixed dimensions");
        }
        for (std::size_t i = 0; i < dim; ++i) {
            sum[i] += v[i];
        }
    }
    auto const count = static_cast<double>(vectors.size());
    for (double & x : sum) {
        x /= count;
    }
    // Cancellation below this scale means the mean is numerically zero.
    if (std::sqrt(squared_norm(sum)) < 1e-12) {
        throw EmbeddingError("degenerate centroid: component-wise mean is the zero vector");
    }
    return EmbeddingVector::normalized(std::move(sum));
}

std::string normalize_embedding_text(std::string_view text) { return std::string(text::trim(text::normalize(text))); }

StubEmbeddingProvider::StubEmbeddingProvider(std::size_t batch_size) : batch_size_(batch_size)
{
    if (batch_size_ < 1) {
        throw EmbeddingError("batch_size must be >= 1");
    }
}

EmbeddingVector StubEmbeddingProvider::embed_one(std::string_view raw)
{
    std::string const padded = "^" + text::normalize(raw) + "$";
    // Code point boundaries, so trigrams never split a UTF-8 sequence.
    std::vector<std::size_t> starts;
    {
        auto const * bytes = reinterpret_cast<std::uint8_t const *>(padded.data());
        auto const n = static_cast<std::int32_t>(padded.size());
        std::int32_t i = 0;
        while (i < n) {
            starts.push_back(static_cast<std::size_t>(i));
            U8_FWD_1(bytes, i, n);
        }
        starts.push_back(padded.size());
    }
    std::vector<double> acc(kDimension, 0.0);
    for (std::size_t t = 0; t + 3 < starts.size(); ++t) {
        auto const trigram = std::string_view(padded).substr(starts[t], starts[t + 3] - starts[t]);
        auto const h = fnv1a64(trigram);
        acc[h % kDimension] += (h >> 63) == 0 ? 1.0 : -1.0;
    }
    if (squared_norm(acc) == 0.0) {
        return EmbeddingVector::basis(kDimension, 0);
    }
    return EmbeddingVector::normalized(std::move(acc));
}

std::vector<EmbeddingVector> StubEmbeddingProvider::embed(std::span<std::string const> texts)
{
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (auto const & t : texts) {
        out.push_back(embed_one(t));
    }
    return out;
}

std::optional<EmbeddingVector> EmbeddingCache::find(std::string const & provider, std::string const & text) const
{
    std::shared_lock lock(mutex_);
    auto it = entries_.find(Key{provider, text});
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void EmbeddingCache::insert(std::string const & provider, std::string const & text, EmbeddingVector vector)
{
    std::unique_lock lock(mutex_);
    entries_.insert_or_assign(Key{provider, text}, std::move(vector));
}

std::size_t EmbeddingCache::size() const
{
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::map<EmbeddingCache::Key, EmbeddingVector> EmbeddingCache::snapshot() const
{
    std::shared_lock lock(mutex_);
    return entries_;
}

EmbeddingVector embed_text(std::string_view text, EmbeddingProvider & provider, EmbeddingCache * cache)
{
    std::string const t(text);
    return embed_batch(std::span<std::string const>(&t, 1), provider, cache).front();
}

std::vector<EmbeddingVector> embed_batch(
    std::span<std::string const> texts, EmbeddingProvider & provider, EmbeddingCache * cache)
{
    auto const identity = provider.identity();
    auto const dim = provider.dimension();
    auto const batch = std::max<std::size_t>(1, provider.batch_size());

    std::vector<std::string> keys;
    keys.reserve(texts.size());
    for (auto const & t : texts) {
        keys.push_back(normalize_embedding_text(t));
    }

    std::unordered_map<std::string, EmbeddingVector> resolved;
    std::vector<std::string> missing;
    std::unordered_set<std::string> queued;
    for (auto const & key : keys) {
        if (resolved.contains(key) || queued.contains(key)) {
            continue;
        }
        if (key.empty()) {
            resolved.emplace(key, EmbeddingVector::basis(dim, 0));
            continue;
        }
        if (cache) {
            if (auto hit = cache->find(identity, key)) {
                resolved.emplace(key, std::move(*hit));
                continue;
            }
        }
        queued.insert(key);
        missing.push_back(key);
    }

    for (std::size_t start = 0; start < missing.size(); start += batch) {
        auto const count = std::min(batch, missing.size() - start);
        auto chunk = std::span<std::string const>(missing).subspan(start, count);
        auto vectors = provider.embed(chunk);
        if (vectors.size() != count) {
            throw EmbeddingError(
                "provider returned " + std::to_string(vectors.size()) + " embeddings for " + std::to_string(count)
                + " texts");
        }
        for (std::size_t i = 0; i < count; ++i) {
            if (vectors[i].dimension() != dim) {
                throw EmbeddingError(
                    "provider returned dimension " + std::to_string(vectors[i].dimension()) + ", expected "
                    + std::to_string(dim));
            }
            if (cache) {
                cache->insert(identity, chunk[i], vectors[i]);
            }
            resolved.insert_or_assign(chunk[i], std::move(vectors[i]));
        }
    }

    std::vector<EmbeddingVector> out;
    out.reserve(keys.size());
    for (auto const & key : keys) {
        out.push_back(resolved.at(key));
    }
    return out;
}

}  // namespace autohist
