#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace autohist {

inline constexpr std::size_t kDefaultMaxExamples = 1'000'000;

struct Example
{
    std::size_t id;
    std::string text;

    bool operator==(Example const &) const = default;
};

enum class CorpusFormat { jsonl, csv, txt_lines };

std::optional<CorpusFormat> parse_corpus_format(std::string_view name);
/// Picks a format from the file extension (.jsonl, .csv, anything else is
/// treated as one example per line).
CorpusFormat infer_corpus_format(std::filesystem::path const & path);
std::string_view to_string(CorpusFormat format);

class CorpusError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Immutable ordered collection of examples with dense ids 0..n-1.
class Corpus
{
public:
    /// Throws CorpusError when `texts` is empty.
    Corpus(std::string name, std::vector<std::string> texts);

    std::string const & name() const noexcept { return name_; }
    /// SHA-256 (hex) over the length-prefixed example texts, in order.
    std::string const & source_digest() const noexcept { return digest_; }
    std::size_t size() const noexcept { return examples_.size(); }
    std::span<Example const> examples() const noexcept { return examples_; }
    Example const & at(std::size_t id) const;

    /// Examples in the order given; throws std::out_of_range on a bad id.
    std::vector<Example> get_examples(std::span<std::size_t const> ids) const;

private:
    std::string name_;
    std::vector<Example> examples_;
    std::string digest_;
};

std::string compute_source_digest(std::span<std::string const> texts);

/// Loads a corpus, skipping blank and whitespace-only rows. Malformed rows
/// raise CorpusError naming the 1-based line number.
Corpus load_corpus(
    std::filesystem::path const & path,
    CorpusFormat format,
    std::size_t max_examples = kDefaultMaxExamples);

}  // namespace autohist
