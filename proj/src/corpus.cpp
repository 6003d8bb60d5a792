#include "autohist/corpus.hpp"

#include "autohist/hash.hpp"
#include "autohist/unicode.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace autohist {

namespace {

std::string read_file(std::filesystem::path const & path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorpusError("cannot read corpus file '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw CorpusError("error while reading corpus file '" + path.string() + "'");
    }
    return buffer.str();
}

CorpusError malformed(std::filesystem::path const & path, std::size_t line, std::string const & what)
{
    return CorpusError(path.string() + ":" + std::to_string(line) + ": malformed row: " + what);
}

/// Splits on '\n' and drops one trailing '\r' per line.
std::vector<std::string_view> split_lines(std::string_view content)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string_view::npos) {
            end = content.size();
        }
        auto line = content.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

void strip_bom(std::string & content)
{
    if (content.starts_with("\xEF\xBB\xBF")) {
        content.erase(0, 3);
    }
}

std::vector<std::string> parse_txt_lines(std::string_view content)
{
    std::vector<std::string> texts;
    for (auto line : split_lines(content)) {
        if (!text::is_blank(line)) {
            texts.emplace_back(line);
        }
    }
    return texts;
}

std::vector<std::string> parse_jsonl(std::string_view content, std::filesystem::path const & path)
{
    std::vector<std::string> texts;
    std::size_t line_no = 0;
    for (auto line : split_lines(content)) {
        ++line_no;
        if (text::is_blank(line)) {
            continue;
        }
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (nlohmann::json::parse_error const & e) {
            throw malformed(path, line_no, std::string("invalid JSON (") + e.what() + ")");
        }
        if (!row.is_object()) {
            throw malformed(path, line_no, "expected a JSON object");
        }
        auto it = row.find("text");
        if (it == row.end()) {
            throw malformed(path, line_no, "missing \"text\" field");
        }
        if (!it->is_string()) {
            throw malformed(path, line_no, "\"text\" is not a string");
        }
        auto const & value = it->get_ref<std::string const &>();
        if (!text::is_blank(value)) {
            texts.push_back(value);
        }
    }
    return texts;
}

struct CsvRecord
{
    std::size_t line;
    std::vector<std::string> fields;
};

/// Comma-delimited, double-quote escaped ("" inside quotes), quoted fields
/// may span lines.
std::vector<CsvRecord> parse_csv_records(std::string_view content, std::filesystem::path const & path)
{
    std::vector<CsvRecord> records;
    std::size_t line = 1;
    std::size_t i = 0;
    auto const n = content.size();
    while (i < n) {
        CsvRecord record{line, {}};
        std::string field;
        bool record_done = false;
        while (!record_done) {
            field.clear();
            if (i < n && content[i] == '"') {
                std::size_t const quote_line = line;
                ++i;
                bool closed = false;
                while (i < n) {
                    char c = content[i];
                    if (c == '"') {
                        if (i + 1 < n && content[i + 1] == '"') {
                            field.push_back('"');
                            i += 2;
                            continue;
                        }
                        ++i;
                        closed = true;
                        break;
                    }
                    if (c == '\n') {
                        ++line;
                    }
                    field.push_back(c);
                    ++i;
                }
                if (!closed) {
                    throw malformed(path, quote_line, "unterminated quoted field");
                }
                if (i < n && content[i] != ',' && content[i] != '\n' && content[i] != '\r') {
                    throw malformed(path, line, "unexpected character after closing quote");
                }
            } else {
                while (i < n && content[i] != ',' && content[i] != '\n' && content[i] != '\r') {
                    if (content[i] == '"') {
                        throw malformed(path, line, "quote inside unquoted field");
                    }
                    field.push_back(content[i]);
                    ++i;
                }
            }
            record.fields.push_back(field);
            if (i < n && content[i] == ',') {
                ++i;
                continue;
            }
            if (i < n && content[i] == '\r') {
                ++i;
            }
            if (i < n && content[i] == '\n') {
                ++i;
                ++line;
            }
            record_done = true;
        }
        bool const empty_line = record.fields.size() == 1 && record.fields.front().empty();
        if (!empty_line) {
            records.push_back(std::move(record));
        }
    }
    return records;
}

std::vector<std::string> parse_csv(std::string_view content, std::filesystem::path const & path)
{
    auto records = parse_csv_records(content, path);
    if (records.empty()) {
        throw CorpusError(path.string() + ": csv file has no header row");
    }
    auto const & header = records.front().fields;
    auto const column = std::find(header.begin(), header.end(), "text");
    if (column == header.end()) {
        throw malformed(path, records.front().line, "header has no \"text\" column");
    }
    auto const index = static_cast<std::size_t>(column - header.begin());
    std::vector<std::string> texts;
    for (std::size_t r = 1; r < records.size(); ++r) {
        auto const & rec = records[r];
        if (rec.fields.size() != header.size()) {
            throw malformed(
                path,
                rec.line,
                "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(rec.fields.size()));
        }
        if (!text::is_blank(rec.fields[index])) {
            texts.push_back(rec.fields[index]);
        }
    }
    return texts;
}

}  // namespace

std::optional<CorpusFormat> parse_corpus_format(std::string_view name)
{
    if (name == "jsonl") {
        return CorpusFormat::jsonl;
    }
    if (name == "csv") {
        return CorpusFormat::csv;
    }
    if (name == "txt-lines" || name == "txt") {
        return CorpusFormat::txt_lines;
    }
    return std::nullopt;
}

CorpusFormat infer_corpus_format(std::filesystem::path const & path)
{
    auto const ext = path.extension().string();
    if (ext == ".jsonl") {
        return CorpusFormat::jsonl;
    }
    if (ext == ".csv") {
        return CorpusFormat::csv;
    }
    return CorpusFormat::txt_lines;
}

std::string_view to_string(CorpusFormat format)
{
    switch (format) {
    case CorpusFormat::jsonl: return "jsonl";
    case CorpusFormat::csv: return "csv";
    case CorpusFormat::txt_lines: return "txt-lines";
    }
    return "unknown";
}

std::string compute_source_digest(std::span<std::string const> texts)
{
    Sha256 h;
    for (auto const & t : texts) {
        h.update_length_prefixed(t);
    }
    return h.hex_digest();
}

Corpus::Corpus(std::string name, std::vector<std::string> texts) : name_(std::move(name))
{
    if (texts.empty()) {
        throw CorpusError("corpus '" + name_ + "' has no usable examples");
    }
    digest_ = compute_source_digest(texts);
    examples_.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        examples_.push_back(Example{i, std::move(texts[i])});
    }
}

Example const & Corpus::at(std::size_t id) const
{
    if (id >= examples_.size()) {
        throw std::out_of_range(
            "example id " + std::to_string(id) + " out of range [0, " + std::to_string(examples_.size()) + ")");
    }
    return examples_[id];
}

std::vector<Example> Corpus::get_examples(std::span<std::size_t const> ids) const
{
    std::vector<Example> out;
    out.reserve(ids.size());
    for (auto id : ids) {
        out.push_back(at(id));
    }
    return out;
}

Corpus load_corpus(std::filesystem::path const & path, CorpusFormat format, std::size_t max_examples)
{
    std::string content = read_file(path);
    strip_bom(content);
    std::vector<std::string> texts;
    switch (format) {
    case CorpusFormat::jsonl: texts = parse_jsonl(content, path); break;
    case CorpusFormat::csv: texts = parse_csv(content, path); break;
    case CorpusFormat::txt_lines: texts = parse_txt_lines(content); break;
    }
    if (texts.empty()) {
        throw CorpusError("corpus file '" + path.string() + "' contains zero usable examples");
    }
    if (texts.size() > max_examples) {
        throw CorpusError(
            "corpus file '" + path.string() + "' has " + std::to_string(texts.size())
            + " examples, more than the configured maximum of " + std::to_string(max_examples));
    }
    return Corpus(path.stem().string(), std::move(texts));
}

}  // namespace autohist
