#pragma once

#include "autohist/corpus.hpp"
#include "autohist/extraction.hpp"
#include "autohist/labeling.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace autohist {

struct Bucket
{
    std::size_t entity_id;
    std::vector<std::string> surface;
    std::size_t count;  // examples containing the entity

    std::string text() const;
    bool operator==(Bucket const &) const = default;
};

enum class HistogramSource { automatic, user };

std::string_view to_string(HistogramSource source);
std::optional<HistogramSource> parse_histogram_source(std::string_view name);

struct Histogram
{
    std::string id;
    std::string label;
    std::vector<Bucket> buckets;  // count desc, then surface asc
    HistogramSource source = HistogramSource::automatic;
    std::size_t total_count = 0;
    double entropy = 0.0;  // natural log

    bool operator==(Histogram const &) const = default;
};

class HistogramError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// True iff `surface` occurs as a contiguous run of token surfaces.
bool contains_entity(std::span<Token const> example_tokens, std::span<std::string const> surface);

/// -sum p ln p over bucket counts.
double count_entropy(std::span<Bucket const> buckets);

/// First 16 hex characters of SHA-256 over the label and sorted surfaces.
std::string auto_histogram_id(std::string_view label, std::span<std::string const> surfaces);

/// Buckets for the given entities (count = |postings|), sorted, with
/// totals and entropy filled in. Throws HistogramError when no bucket has
/// a positive count or an id is unknown.
Histogram make_histogram(
    std::string id,
    std::string label,
    HistogramSource source,
    std::span<std::size_t const> entity_ids,
    EntityTable const & table,
    Corpus const & corpus);

Histogram build_histogram(LabeledCluster const & labeled, EntityTable const & table, Corpus const & corpus);

enum class SortKey { total_count, entropy };

std::optional<SortKey> parse_sort_key(std::string_view name);
std::string_view to_string(SortKey key);

/// Descending by key; ties by label asc, then id asc.
std::vector<Histogram> sort_histograms(std::vector<Histogram> histograms, SortKey key);

/// The entity's posting list. Throws HistogramError when the histogram
/// has no bucket for `entity_id`.
std::vector<std::size_t> select_bucket(Histogram const & histogram, std::size_t entity_id, EntityTable const & table);

}  // namespace autohist
