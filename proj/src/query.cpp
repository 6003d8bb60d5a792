#include "autohist/query.hpp"

#include "autohist/unicode.hpp"
#include "data_assets.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <mutex>
#include <unordered_set>

namespace autohist {

namespace {

constexpr std::string_view kGenerationPrefix = "give me examples of ";

bool search_order(SearchResult const & a, SearchResult const & b)
{
    if (a.match_kind != b.match_kind) {
        return a.match_kind == MatchKind::exact;
    }
    if (a.score != b.score) {
        return a.score > b.score;
    }
    if (a.label != b.label) {
        return a.label < b.label;
    }
    return a.histogram_id < b.histogram_id;
}

std::string_view strip_list_marker(std::string_view item)
{
    item = text::trim(item);
    for (std::string_view bullet : {"-", "*", "•"}) {
        if (item.starts_with(bullet)) {
            return text::trim(item.substr(bullet.size()));
        }
    }
    std::size_t digits = 0;
    while (digits < item.size() && std::isdigit(static_cast<unsigned char>(item[digits]))) {
        ++digits;
    }
    if (digits > 0 && digits < item.size() && (item[digits] == '.' || item[digits] == ')')
        && (digits + 1 == item.size() || item[digits + 1] == ' ' || item[digits + 1] == '\t')) {
        return text::trim(item.substr(digits + 1));
    }
    return item;
}

}  // namespace

std::string_view to_string(MatchKind kind) { return kind == MatchKind::exact ? "exact" : "semantic"; }

std::vector<SearchResult> exact_search(std::string_view query, std::span<Histogram const> histograms)
{
    auto const needle = std::string(text::trim(text::normalize(query)));
    if (needle.empty()) {
        return {};
    }
    std::vector<SearchResult> results;
    for (auto const & h : histograms) {
        bool hit = text::normalize(h.label).find(needle) != std::string::npos;
        for (std::size_t b = 0; !hit && b < h.buckets.size(); ++b) {
            hit = h.buckets[b].text().find(needle) != std::string::npos;
        }
        if (hit) {
            results.push_back(SearchResult{h.id, h.label, 1.0, MatchKind::exact});
        }
    }
    std::sort(results.begin(), results.end(), search_order);
    return results;
}

std::vector<SearchResult> semantic_search(
    std::string_view query,
    std::span<Histogram const> histograms,
    EmbeddingProvider & provider,
    EmbeddingCache * cache,
    double threshold)
{
    if (text::trim(query).empty()) {
        throw std::invalid_argument("semantic search needs a non-empty query");
    }
    auto results = exact_search(query, histograms);
    std::unordered_set<std::string> seen;
    for (auto const & r : results) {
        seen.insert(r.histogram_id);
    }
    if (histograms.empty()) {
        return results;
    }

    auto const query_vector = embed_text(query, provider, cache);
    std::vector<std::string> labels;
    labels.reserve(histograms.size());
    for (auto const & h : histograms) {
        labels.push_back(h.label);
    }
    auto const label_vectors = embed_batch(labels, provider, cache);

    std::vector<SearchResult> semantic;
    for (std::size_t i = 0; i < histograms.size(); ++i) {
        auto const & h = histograms[i];
        if (seen.contains(h.id)) {
            continue;
        }
        double const score = std::max(0.0, cosine_similarity(query_vector, label_vectors[i]));
        if (score >= threshold) {
            seen.insert(h.id);
            semantic.push_back(SearchResult{h.id, h.label, score, MatchKind::semantic});
        }
    }
    std::sort(semantic.begin(), semantic.end(), search_order);
    results.insert(results.end(), semantic.begin(), semantic.end());
    return results;
}

StubGenerationProvider::StubGenerationProvider()
{
    std::string_view content = data::kStubGenerations;
    std::size_t start = 0;
    while (start < content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string_view::npos) {
            end = content.size();
        }
        auto const line = text::trim(content.substr(start, end - start));
        start = end + 1;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto const bar = line.find('|');
        if (bar == std::string_view::npos) {
            continue;
        }
        responses_.emplace(
            normalize_embedding_text(line.substr(0, bar)), std::string(text::trim(line.substr(bar + 1))));
    }
}

std::string StubGenerationProvider::generate(std::string const & prompt)
{
    if (!prompt.starts_with(kGenerationPrefix)) {
        return {};
    }
    auto const it = responses_.find(normalize_embedding_text(std::string_view(prompt).substr(kGenerationPrefix.size())));
    return it == responses_.end() ? std::string{} : it->second;
}

std::string build_generation_prompt(std::string_view category)
{
    return std::string(kGenerationPrefix) + std::string(text::trim(category));
}

std::vector<std::string> parse_generated_entities(std::string_view raw)
{
    std::vector<std::string> items;
    std::unordered_set<std::string> seen;
    std::size_t start = 0;
    while (start <= raw.size() && items.size() < kMaxGeneratedEntities) {
        auto end = raw.find_first_of(",\n", start);
        if (end == std::string_view::npos) {
            end = raw.size();
        }
        auto const item = std::string(text::trim(text::normalize(strip_list_marker(raw.substr(start, end - start)))));
        if (!item.empty() && seen.insert(item).second) {
            items.push_back(item);
        }
        start = end + 1;
    }
    return items;
}

std::vector<std::string> generate_candidate_entities(std::string_view category, GenerationProvider & provider)
{
    if (text::trim(category).empty()) {
        throw std::invalid_argument("category must be non-empty");
    }
    return parse_generated_entities(provider.generate(build_generation_prompt(category)));
}

std::vector<EntitySuggestion> suggest_dataset_entities(
    std::span<std::string const> candidates,
    EntityTable const & table,
    EmbeddingProvider & provider,
    EmbeddingCache * cache,
    std::size_t limit,
    double threshold)
{
    if (candidates.empty()) {
        throw std::invalid_argument("suggest_dataset_entities needs at least one candidate");
    }
    auto const candidate_vectors = embed_batch(candidates, provider, cache);
    auto const center = centroid(candidate_vectors);

    std::vector<std::string> surfaces;
    surfaces.reserve(table.size());
    for (auto const & e : table.entities()) {
        surfaces.push_back(e.text());
    }
    auto const entity_vectors = embed_batch(surfaces, provider, cache);

    std::vector<EntitySuggestion> ranked;
    ranked.reserve(table.size());
    for (auto const & e : table.entities()) {
        ranked.push_back(EntitySuggestion{e.id, e.surface, cosine_similarity(center, entity_vectors[e.id])});
    }
    // Mathematically equal similarities (e.g. two entities orthogonal to
    // each other and symmetric about the centroid) can differ in the last
    // bits; ranking on a 1e-12 grid makes them ties resolved by entity id.
    auto const grid = [](double similarity) { return std::llround(similarity * kSimilarityTieGrid); };
    std::stable_sort(ranked.begin(), ranked.end(), [&grid](auto const & a, auto const & b) {
        return grid(a.similarity) > grid(b.similarity);
    });
    std::vector<EntitySuggestion> out;
    for (auto & s : ranked) {
        if (out.size() >= limit || s.similarity < threshold) {
            break;
        }
        out.push_back(std::move(s));
    }
    return out;
}

Histogram create_user_histogram(
    std::string label,
    std::span<std::size_t const> selected_entity_ids,
    EntityTable const & table,
    Corpus const & corpus,
    std::size_t sequence)
{
    label = std::string(text::trim(label));
    if (label.empty()) {
        throw std::invalid_argument("user histogram label must be non-empty");
    }
    if (selected_entity_ids.empty()) {
        throw std::invalid_argument("user histogram needs at least one selected entity");
    }
    for (auto id : selected_entity_ids) {
        if (!table.contains(id)) {
            throw std::invalid_argument("unknown entity id " + std::to_string(id));
        }
    }
    return make_histogram(
        "user-" + std::to_string(sequence), std::move(label), HistogramSource::user, selected_entity_ids, table, corpus);
}

HistogramCatalog::HistogramCatalog(std::vector<Histogram> auto_histograms, std::vector<Histogram> user_histograms)
    : auto_(std::move(auto_histograms))
    , user_(std::move(user_histograms))
{
    for (auto const & h : user_) {
        if (h.id.starts_with("user-")) {
            try {
                sequence_ = std::max<std::size_t>(sequence_, std::stoul(h.id.substr(5)));
            } catch (std::exception const &) {
            }
        }
    }
    sequence_ = std::max(sequence_, user_.size());
}

std::vector<Histogram> HistogramCatalog::all() const
{
    std::shared_lock lock(mutex_);
    std::vector<Histogram> out = auto_;
    out.insert(out.end(), user_.begin(), user_.end());
    return out;
}

std::vector<Histogram> HistogramCatalog::user() const
{
    std::shared_lock lock(mutex_);
    return user_;
}

std::size_t HistogramCatalog::user_count() const
{
    std::shared_lock lock(mutex_);
    return user_.size();
}

Histogram HistogramCatalog::append_user(
    std::string label, std::span<std::size_t const> selected_entity_ids, EntityTable const & table, Corpus const & corpus)
{
    std::unique_lock lock(mutex_);
    auto h = create_user_histogram(std::move(label), selected_entity_ids, table, corpus, sequence_ + 1);
    ++sequence_;
    user_.push_back(h);
    return h;
}

}  // namespace autohist
