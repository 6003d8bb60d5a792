#include "autohist/extraction.hpp"

#include "autohist/unicode.hpp"
#include "data_assets.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <thread>

namespace autohist {

namespace {

bool is_word_char(UChar32 c) { return u_hasBinaryProperty(c, UCHAR_ALPHABETIC) || u_isdigit(c); }

bool is_joiner(UChar32 c) { return c == '-' || c == '\'' || c == 0x2019; }

bool is_ascii_digit(UChar32 c) { return c >= '0' && c <= '9'; }

struct CodePoint
{
    UChar32 value;
    std::size_t begin;
    std::size_t end;
};

std::vector<CodePoint> decode(std::string const & s)
{
    std::vector<CodePoint> out;
    out.reserve(s.size());
    auto const * bytes = reinterpret_cast<std::uint8_t const *>(s.data());
    auto const n = static_cast<std::int32_t>(s.size());
    std::int32_t i = 0;
    while (i < n) {
        auto const begin = i;
        UChar32 c;
        U8_NEXT(bytes, i, n, c);
        out.push_back(CodePoint{c, static_cast<std::size_t>(begin), static_cast<std::size_t>(i)});
    }
    return out;
}

std::string joined(std::vector<std::string> const & surface)
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

struct Tally
{
    std::size_t frequency = 0;
    std::vector<std::size_t> postings;
};

using TallyMap = std::unordered_map<std::string, Tally>;

void count_range(
    std::span<Example const> examples,
    PosTagger const & tagger,
    std::size_t min_word_length,
    TallyMap & tallies)
{
    for (auto const & example : examples) {
        auto const tokens = tokenize(example.text);
        auto const tags = classify_pos(tokens, tagger);
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            bool keep = tags[t] == PosTag::number
                || (tags[t] == PosTag::noun && text::code_point_length(tokens[t].surface) >= min_word_length);
            if (!keep) {
                continue;
            }
            auto & tally = tallies[tokens[t].surface];
            ++tally.frequency;
            if (tally.postings.empty() || tally.postings.back() != example.id) {
                tally.postings.push_back(example.id);
            }
        }
    }
}

}  // namespace

bool is_number_surface(std::string_view s) noexcept
{
    std::size_t i = 0;
    auto digits = [&] {
        std::size_t start = i;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            ++i;
        }
        return i > start;
    };
    if (!digits()) {
        return false;
    }
    if (i == s.size()) {
        return true;
    }
    if (s[i] != '.') {
        return false;
    }
    ++i;
    return digits() && i == s.size();
}

std::vector<Token> tokenize(std::string_view raw)
{
    std::vector<Token> tokens;
    if (raw.empty()) {
        return tokens;
    }
    std::string const normalized = text::normalize(raw);
    auto const cps = decode(normalized);
    std::size_t i = 0;
    while (i < cps.size()) {
        if (!is_word_char(cps[i].value)) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < cps.size()) {
            if (is_word_char(cps[j].value)) {
                ++j;
                continue;
            }
            bool const next_is_word = j + 1 < cps.size() && is_word_char(cps[j + 1].value);
            bool const decimal_point = cps[j].value == '.' && is_ascii_digit(cps[j - 1].value) && j + 1 < cps.size()
                && is_ascii_digit(cps[j + 1].value);
            if ((is_joiner(cps[j].value) && next_is_word) || decimal_point) {
                j += 2;
                continue;
            }
            break;
        }
        std::string surface = normalized.substr(cps[i].begin, cps[j - 1].end - cps[i].begin);
        TokenKind kind = is_number_surface(surface) ? TokenKind::number : TokenKind::word;
        tokens.push_back(Token{std::move(surface), kind});
        i = j;
    }
    return tokens;
}

std::string_view to_string(PosTag tag)
{
    switch (tag) {
    case PosTag::noun: return "NOUN";
    case PosTag::number: return "NUMBER";
    case PosTag::other: return "OTHER";
    }
    return "OTHER";
}

std::vector<std::string> RuleTagger::parse_word_list(std::string_view content)
{
    std::vector<std::string> words;
    std::size_t start = 0;
    while (start <= content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string_view::npos) {
            end = content.size();
        }
        auto line = text::trim(content.substr(start, end - start));
        if (!line.empty() && line.front() != '#') {
            words.push_back(text::normalize(line));
        }
        start = end + 1;
    }
    return words;
}

RuleTagger::RuleTagger()
    : RuleTagger(
        parse_word_list(data::kStopwords), parse_word_list(data::kPosSuffixes), parse_word_list(data::kPosSuffixWhitelist))
{}

RuleTagger::RuleTagger(
    std::vector<std::string> stopwords, std::vector<std::string> suffixes, std::vector<std::string> whitelist)
    : stopwords_(stopwords.begin(), stopwords.end())
    , suffixes_(std::move(suffixes))
    , whitelist_(whitelist.begin(), whitelist.end())
{}

PosTag RuleTagger::tag_word(std::string_view surface) const
{
    std::string const word(surface);
    if (stopwords_.contains(word)) {
        return PosTag::other;
    }
    if (whitelist_.contains(word)) {
        return PosTag::noun;
    }
    auto const length = text::code_point_length(word);
    for (auto const & suffix : suffixes_) {
        // Short stems ("bed", "fly") are left as nouns.
        if (word.ends_with(suffix) && length >= text::code_point_length(suffix) + 3) {
            return PosTag::other;
        }
    }
    return PosTag::noun;
}

RuleTagger const & default_tagger()
{
    static RuleTagger const tagger;
    return tagger;
}

std::vector<PosTag> classify_pos(std::span<Token const> tokens, PosTagger const & tagger)
{
    std::vector<PosTag> tags;
    tags.reserve(tokens.size());
    for (auto const & token : tokens) {
        tags.push_back(token.kind == TokenKind::number ? PosTag::number : tagger.tag_word(token.surface));
    }
    return tags;
}

std::string Entity::text() const { return joined(surface); }

EntityTable::EntityTable(std::vector<Entity> entities, std::size_t k_cap)
    : entities_(std::move(entities))
    , k_cap_(k_cap)
{
    if (k_cap_ < 1) {
        throw std::invalid_argument("entity table k_cap must be >= 1");
    }
    if (entities_.size() > k_cap_) {
        throw std::invalid_argument("entity table holds more entities than k_cap");
    }
    for (std::size_t i = 0; i < entities_.size(); ++i) {
        auto const & e = entities_[i];
        auto const name = e.text();
        if (e.id != i) {
            throw std::invalid_argument("entity '" + name + "' has id " + std::to_string(e.id) + ", expected "
                                        + std::to_string(i));
        }
        if (e.surface.empty() || std::any_of(e.surface.begin(), e.surface.end(), [](auto const & s) { return s.empty(); })) {
            throw std::invalid_argument("entity " + std::to_string(i) + " has an empty surface");
        }
        if (e.postings.empty() || e.frequency < e.postings.size()) {
            throw std::invalid_argument("entity '" + name + "' violates frequency >= |postings| >= 1");
        }
        if (!std::is_sorted(e.postings.begin(), e.postings.end())
            || std::adjacent_find(e.postings.begin(), e.postings.end()) != e.postings.end()) {
            throw std::invalid_argument("entity '" + name + "' postings are not strictly ascending");
        }
        if (i > 0) {
            auto const & prev = entities_[i - 1];
            bool ordered = prev.frequency > e.frequency || (prev.frequency == e.frequency && prev.text() < name);
            if (!ordered) {
                throw std::invalid_argument("entity '" + name + "' is out of (frequency desc, surface asc) order");
            }
        }
        if (!by_surface_.emplace(name, i).second) {
            throw std::invalid_argument("duplicate entity surface '" + name + "'");
        }
    }
}

Entity const & EntityTable::at(std::size_t id) const
{
    if (id >= entities_.size()) {
        throw std::out_of_range("unknown entity id " + std::to_string(id));
    }
    return entities_[id];
}

Entity const * EntityTable::find(std::string_view joined_surface) const
{
    auto it = by_surface_.find(std::string(joined_surface));
    return it == by_surface_.end() ? nullptr : &entities_[it->second];
}

EntityTable extract_entities(Corpus const & corpus, ExtractionOptions const & options, PosTagger const & tagger)
{
    if (options.k_cap < 1) {
        throw std::invalid_argument("k_cap must be >= 1");
    }
    auto const examples = corpus.examples();
    std::size_t jobs = options.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.jobs;
    jobs = std::min(jobs, examples.size());

    std::vector<TallyMap> partial(jobs);
    auto const chunk = (examples.size() + jobs - 1) / jobs;
    {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            auto const begin = std::min(examples.size(), w * chunk);
            auto const end = std::min(examples.size(), begin + chunk);
            workers.emplace_back([&, w, begin, end] {
                count_range(examples.subspan(begin, end - begin), tagger, options.min_word_length, partial[w]);
            });
        }
    }

    // Chunks cover ascending id ranges, so appending in chunk order keeps
    // postings sorted.
    TallyMap merged = std::move(partial.front());
    for (std::size_t w = 1; w < partial.size(); ++w) {
        for (auto & [surface, tally] : partial[w]) {
            auto & into = merged[surface];
            into.frequency += tally.frequency;
            into.postings.insert(into.postings.end(), tally.postings.begin(), tally.postings.end());
        }
    }
    if (merged.empty()) {
        throw ExtractionError("corpus '" + corpus.name() + "' yields zero noun or number entities");
    }

    std::vector<std::pair<std::string, Tally>> ranked(
        std::make_move_iterator(merged.begin()), std::make_move_iterator(merged.end()));
    auto const keep = std::min(options.k_cap, ranked.size());
    auto const before = [](auto const & a, auto const & b) {
        if (a.second.frequency != b.second.frequency) {
            return a.second.frequency > b.second.frequency;
        }
        return a.first < b.first;
    };
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), before);
    ranked.resize(keep);

    std::vector<Entity> entities;
    entities.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        auto & [surface, tally] = ranked[i];
        entities.push_back(Entity{i, {std::move(surface)}, tally.frequency, std::move(tally.postings)});
    }
    return EntityTable(std::move(entities), options.k_cap);
}

}  // namespace autohist
