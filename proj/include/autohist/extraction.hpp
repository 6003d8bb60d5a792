#pragma once

#include "autohist/corpus.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace autohist {

/// Default cap on the number of entities kept from a corpus.
inline constexpr std::size_t kDefaultEntityCap = 2000;

enum class TokenKind { word, number };

struct Token
{
    std::string surface;  // NFC, lowercased
    TokenKind kind;

    bool operator==(Token const &) const = default;
};

/// Splits text into maximal runs of letters and digits. A hyphen or
/// apostrophe between two such characters stays inside the token
/// ("covid-19", "don't"); every other character separates tokens.
std::vector<Token> tokenize(std::string_view text);

/// True iff `surface` matches [0-9]+(\.[0-9]+)?
bool is_number_surface(std::string_view surface) noexcept;

enum class PosTag { noun, number, other };

std::string_view to_string(PosTag tag);

/// Part-of-speech contract for WORD tokens. NUMBER tokens never reach the
/// tagger; classify_pos maps them directly.
class PosTagger
{
public:
    virtual ~PosTagger() = default;
    virtual PosTag tag_word(std::string_view surface) const = 0;
};

/// Rule-based tagger driven by the bundled stopword, suffix and whitelist
/// files: stopwords and suffix-matched words are OTHER, the rest NOUN.
class RuleTagger final : public PosTagger
{
public:
    /// Tagger built from the bundled data files.
    RuleTagger();
    RuleTagger(
        std::vector<std::string> stopwords,
        std::vector<std::string> suffixes,
        std::vector<std::string> whitelist);

    PosTag tag_word(std::string_view surface) const override;

    /// Parses a one-token-per-line list; '#' lines and blanks are skipped.
    static std::vector<std::string> parse_word_list(std::string_view content);

private:
    std::unordered_set<std::string> stopwords_;
    std::vector<std::string> suffixes_;
    std::unordered_set<std::string> whitelist_;
};

RuleTagger const & default_tagger();

std::vector<PosTag> classify_pos(
    std::span<Token const> tokens, PosTagger const & tagger = default_tagger());

struct Entity
{
    std::size_t id;
    std::vector<std::string> surface;  // token sequence, lowercased
    std::size_t frequency;             // total occurrences
    std::vector<std::size_t> postings; // sorted ids of containing examples

    /// Tokens joined by single spaces.
    std::string text() const;

    bool operator==(Entity const &) const = default;
};

/// Entities ordered by (frequency desc, surface asc); entity id == index.
class EntityTable
{
public:
    EntityTable() = default;
    /// Validates ordering, id density and uniqueness; throws
    /// std::invalid_argument on violation.
    EntityTable(std::vector<Entity> entities, std::size_t k_cap);

    std::span<Entity const> entities() const noexcept { return entities_; }
    std::size_t size() const noexcept { return entities_.size(); }
    bool empty() const noexcept { return entities_.empty(); }
    std::size_t k_cap() const noexcept { return k_cap_; }

    Entity const & at(std::size_t id) const;
    bool contains(std::size_t id) const noexcept { return id < entities_.size(); }
    Entity const * find(std::string_view joined_surface) const;

    bool operator==(EntityTable const & other) const
    {
        return k_cap_ == other.k_cap_ && entities_ == other.entities_;
    }

private:
    std::vector<Entity> entities_;
    std::size_t k_cap_ = kDefaultEntityCap;
    std::unordered_map<std::string, std::size_t> by_surface_;
};

class ExtractionError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct ExtractionOptions
{
    std::size_t k_cap = kDefaultEntityCap;
    /// Worker threads for token counting; 0 means hardware concurrency.
    std::size_t jobs = 1;
    /// WORD entities shorter than this (in code points) are dropped.
    std::size_t min_word_length = 2;
};

/// Unigram NOUN and NUMBER tokens, truncated to the `k_cap` most frequent.
EntityTable extract_entities(
    Corpus const & corpus,
    ExtractionOptions const & options = {},
    PosTagger const & tagger = default_tagger());

}  // namespace autohist
