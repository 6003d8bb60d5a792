#include "autohist/histogram.hpp"

#include "autohist/hash.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace autohist {

namespace {

std::string join(std::span<std::string const> surface)
{
    std::string out;
    for (std::size_t i = 0; i < surface.size(); ++i) {
        if (i) {
            out.push_back(' ');
        }
        out += surface[i];
    }
    return out;
}

}  // namespace

std::string Bucket::text() const { return join(surface); }

std::string_view to_string(HistogramSource source)
{
    return source == HistogramSource::automatic ? "auto" : "user";
}

std::optional<HistogramSource> parse_histogram_source(std::string_view name)
{
    if (name == "auto") {
        return HistogramSource::automatic;
    }
    if (name == "user") {
        return HistogramSource::user;
    }
    return std::nullopt;
}

bool contains_entity(std::span<Token const> tokens, std::span<std::string const> surface)
{
    if (surface.empty()) {
        throw std::invalid_argument("contains_entity: surface must have at least one token");
    }
    if (tokens.size() < surface.size()) {
        return false;
    }
    for (std::size_t start = 0; start + surface.size() <= tokens.size(); ++start) {
        bool match = true;
        for (std::size_t k = 0; k < surface.size(); ++k) {
            if (tokens[start + k].surface != surface[k]) {
                match = false;
                break;
            }
        }
        if (match) {
            return true;
        }
    }
    return false;
}

double count_entropy(std::span<Bucket const> buckets)
{
    double total = 0.0;
    for (auto const & b : buckets) {
        total += static_cast<double>(b.count);
    }
    if (total <= 0.0) {
        return 0.0;
    }
    double h = 0.0;
    for (auto const & b : buckets) {
        if (b.count == 0) {
            continue;
        }
        double const p = static_cast<double>(b.count) / total;
        h -= p * std::log(p);
    }
    return h <= 0.0 ? 0.0 : h;
}

std::string auto_histogram_id(std::string_view label, std::span<std::string const> surfaces)
{
    std::vector<std::string> sorted(surfaces.begin(), surfaces.end());
    std::sort(sorted.begin(), sorted.end());
    Sha256 h;
    h.update_length_prefixed(label);
    for (auto const & s : sorted) {
        h.update_length_prefixed(s);
    }
    return h.hex_digest().substr(0, 16);
}

Histogram make_histogram(
    std::string id,
    std::string label,
    HistogramSource source,
    std::span<std::size_t const> entity_ids,
    EntityTable const & table,
    Corpus const & corpus)
{
    std::set<std::size_t> const unique(entity_ids.begin(), entity_ids.end());
    Histogram h;
    h.id = std::move(id);
    h.label = std::move(label);
    h.source = source;
    for (auto entity_id : unique) {
        if (!table.contains(entity_id)) {
            throw HistogramError("unknown entity id " + std::to_string(entity_id));
        }
        auto const & e = table.at(entity_id);
        if (!e.postings.empty() && e.postings.back() >= corpus.size()) {
            throw HistogramError("entity '" + e.text() + "' has postings beyond the corpus");
        }
        if (e.postings.empty()) {
            continue;
        }
        h.buckets.push_back(Bucket{entity_id, e.surface, e.postings.size()});
    }
    if (h.buckets.empty()) {
        throw HistogramError("histogram '" + h.label + "' has no non-empty buckets");
    }
    std::sort(h.buckets.begin(), h.buckets.end(), [](Bucket const & a, Bucket const & b) {
        if (a.count != b.count) {
            return a.count > b.count;
        }
        auto const at = a.text();
        auto const bt = b.text();
        return at != bt ? at < bt : a.entity_id < b.entity_id;
    });
    for (auto const & b : h.buckets) {
        h.total_count += b.count;
    }
    h.entropy = count_entropy(h.buckets);
    return h;
}

Histogram build_histogram(LabeledCluster const & labeled, EntityTable const & table, Corpus const & corpus)
{
    if (labeled.label.empty()) {
        throw HistogramError("cannot build a histogram for an unlabeled cluster");
    }
    std::vector<std::string> surfaces;
    for (auto id : labeled.cluster.entity_ids) {
        surfaces.push_back(table.at(id).text());
    }
    return make_histogram(
        auto_histogram_id(labeled.label, surfaces),
        labeled.label,
        HistogramSource::automatic,
        labeled.cluster.entity_ids,
        table,
        corpus);
}

std::optional<SortKey> parse_sort_key(std::string_view name)
{
    if (name == "total" || name == "total_count") {
        return SortKey::total_count;
    }
    if (name == "entropy") {
        return SortKey::entropy;
    }
    return std::nullopt;
}

std::string_view to_string(SortKey key) { return key == SortKey::total_count ? "total" : "entropy"; }

std::vector<Histogram> sort_histograms(std::vector<Histogram> histograms, SortKey key)
{
    std::stable_sort(histograms.begin(), histograms.end(), [key](Histogram const & a, Histogram const & b) {
        if (key == SortKey::total_count) {
            if (a.total_count != b.total_count) {
                return a.total_count > b.total_count;
            }
        } else if (a.entropy != b.entropy) {
            return a.entropy > b.entropy;
        }
        if (a.label != b.label) {
            return a.label < b.label;
        }
        return a.id < b.id;
    });
    return histograms;
}

std::vector<std::size_t> select_bucket(Histogram const & histogram, std::size_t entity_id, EntityTable const & table)
{
    auto const it = std::find_if(histogram.buckets.begin(), histogram.buckets.end(), [&](Bucket const & b) {
        return b.entity_id == entity_id;
    });
    if (it == histogram.buckets.end()) {
        throw HistogramError(
            "entity " + std::to_string(entity_id) + " has no bucket in histogram '" + histogram.label + "'");
    }
    return table.at(entity_id).postings;
}

}  // namespace autohist
