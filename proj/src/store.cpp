#include "autohist/store.hpp"

#include "autohist/labeling.hpp"
#include "autohist/unicode.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace autohist {

using nlohmann::json;

namespace {

std::string format_double(double value)
{
    if (!std::isfinite(value)) {
        throw StoreError("cannot serialize a non-finite number");
    }
    if (value == 0.0) {
        return "0.0";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    std::string s(buf);
    // Keep floats recognizable as floats.
    if (s.find_first_of(".eE") == std::string::npos) {
        s += ".0";
    }
    return s;
}

std::string format_string(std::string const & s)
{
    return json(s).dump(-1, ' ', false, json::error_handler_t::replace);
}

bool is_scalar_array(json const & j)
{
    for (auto const & e : j) {
        if (e.is_structured()) {
            return false;
        }
    }
    return true;
}

void write(json const & j, std::string & out, int indent)
{
    auto const pad = [&](int level) { out.append(static_cast<std::size_t>(level) * 2, ' '); };
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto const & [key, value] : j.items()) {  // std::map: sorted keys
            if (!first) {
                out += ",\n";
            }
            first = false;
            pad(indent + 1);
            out += format_string(key);
            out += ": ";
            write(value, out, indent + 1);
        }
        out += "\n";
        pad(indent);
        out += "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        if (is_scalar_array(j)) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) {
                    out += ", ";
                }
                write(j[i], out, indent);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) {
                out += ",\n";
            }
            pad(indent + 1);
            write(j[i], out, indent + 1);
        }
        out += "\n";
        pad(indent);
        out += "]";
        return;
    }
    case json::value_t::string: out += format_string(j.get_ref<std::string const &>()); return;
    case json::value_t::number_float: out += format_double(j.get<double>()); return;
    case json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); return;
    case json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); return;
    case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; return;
    case json::value_t::null: out += "null"; return;
    default: throw StoreError("cannot serialize JSON value");
    }
}

json histogram_json(Histogram const & h)
{
    json buckets = json::array();
    for (auto const & b : h.buckets) {
        buckets.push_back(json{{"entity_id", b.entity_id}, {"surface", b.surface}, {"count", b.count}});
    }
    return json{
        {"id", h.id},
        {"label", h.label},
        {"source", to_string(h.source)},
        {"total_count", h.total_count},
        {"entropy", h.entropy},
        {"buckets", std::move(buckets)},
    };
}

/// Typed access that reports the JSON path of a bad field.
class Field
{
public:
    Field(json const & j, std::string path) : j_(j), path_(std::move(path)) {}

    json const & at(char const * key) const
    {
        if (!j_.is_object()) {
            throw StoreError(path_ + ": expected an object");
        }
        auto it = j_.find(key);
        if (it == j_.end()) {
            throw StoreError(path_ + ": missing key \"" + key + "\"");
        }
        return *it;
    }

    template <class T>
    T get(char const * key) const
    {
        try {
            return at(key).get<T>();
        } catch (json::exception const & e) {
            throw StoreError(path_ + "." + key + ": " + e.what());
        }
    }

    std::string child(char const * key) const { return path_ + "." + key; }

private:
    json const & j_;
    std::string path_;
};

Histogram histogram_from(json const & j, std::string const & path)
{
    Field f(j, path);
    Histogram h;
    h.id = f.get<std::string>("id");
    h.label = f.get<std::string>("label");
    auto const source = parse_histogram_source(f.get<std::string>("source"));
    if (!source) {
        throw StoreError(path + ".source: must be \"auto\" or \"user\"");
    }
    h.source = *source;
    h.total_count = f.get<std::size_t>("total_count");
    h.entropy = f.get<double>("entropy");
    auto const & buckets = f.at("buckets");
    if (!buckets.is_array()) {
        throw StoreError(path + ".buckets: expected an array");
    }
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        Field bf(buckets[i], path + ".buckets[" + std::to_string(i) + "]");
        h.buckets.push_back(Bucket{
            bf.get<std::size_t>("entity_id"), bf.get<std::vector<std::string>>("surface"), bf.get<std::size_t>("count")});
    }
    return h;
}

std::string describe(std::string const & section, std::size_t index, Histogram const & h)
{
    return section + "[" + std::to_string(index) + "] '" + h.label + "'";
}

void check_histogram(
    Histogram const & h,
    std::string const & where,
    HistogramSource expected_source,
    EntityTable const & table,
    std::size_t corpus_examples)
{
    auto fail = [&](std::string const & what) { throw ArtifactInvariantError(where + ": " + what); };
    if (h.source != expected_source) {
        fail("source is '" + std::string(to_string(h.source)) + "'");
    }
    if (h.label.empty() || h.label.find('\n') != std::string::npos) {
        fail("label must be non-empty and single-line");
    }
    if (h.source == HistogramSource::automatic && text::code_point_length(h.label) > kMaxLabelLength) {
        fail("label longer than " + std::to_string(kMaxLabelLength) + " characters");
    }
    if (h.buckets.empty()) {
        fail("histogram has no buckets");
    }
    std::size_t total = 0;
    std::set<std::size_t> entity_ids;
    std::vector<std::string> surfaces;
    for (std::size_t i = 0; i < h.buckets.size(); ++i) {
        auto const & b = h.buckets[i];
        auto const name = "bucket '" + b.text() + "'";
        if (!table.contains(b.entity_id)) {
            fail(name + " references unknown entity id " + std::to_string(b.entity_id));
        }
        auto const & e = table.at(b.entity_id);
        if (e.surface != b.surface) {
            fail(name + " surface differs from entity " + std::to_string(b.entity_id) + " ('" + e.text() + "')");
        }
        if (b.count != e.postings.size()) {
            fail(
                name + ": count " + std::to_string(b.count) + " != |postings| " + std::to_string(e.postings.size()));
        }
        if (b.count < 1 || b.count > corpus_examples) {
            fail(name + ": count out of range");
        }
        if (!entity_ids.insert(b.entity_id).second) {
            fail(name + " appears twice");
        }
        if (i > 0) {
            auto const & prev = h.buckets[i - 1];
            if (prev.count < b.count || (prev.count == b.count && prev.text() > b.text())) {
                fail(name + " is out of (count desc, surface asc) order");
            }
        }
        total += b.count;
        surfaces.push_back(b.text());
    }
    if (total != h.total_count) {
        fail("total_count " + std::to_string(h.total_count) + " != sum of bucket counts " + std::to_string(total));
    }
    double const entropy = count_entropy(h.buckets);
    if (std::abs(entropy - h.entropy) > 1e-6) {
        fail("entropy " + std::to_string(h.entropy) + " != recomputed " + std::to_string(entropy));
    }
    // Stored values carry 9 significant digits, hence the 1e-6 slack.
    if (h.entropy < 0.0 || h.entropy > std::log(static_cast<double>(h.buckets.size())) + 1e-6) {
        fail("entropy outside [0, ln(#buckets)]");
    }
    if (h.source == HistogramSource::automatic && h.id != auto_histogram_id(h.label, surfaces)) {
        fail("id '" + h.id + "' does not match its content hash");
    }
}

}  // namespace

DigestMismatchError::DigestMismatchError(std::string artifact_digest, std::string corpus_digest)
    : StoreError(
        "corpus digest mismatch: artifact was built from corpus " + artifact_digest + " but the given corpus has digest "
        + corpus_digest + "; re-run `autohist analyze` on this corpus to rebuild the artifact")
    , artifact_(std::move(artifact_digest))
    , corpus_(std::move(corpus_digest))
{}

std::string canonical_json(json const & document)
{
    std::string out;
    write(document, out, 0);
    out += "\n";
    return out;
}

json artifact_to_json(AnalysisArtifact const & a)
{
    json entities = json::array();
    for (auto const & e : a.entities.entities()) {
        entities.push_back(
            json{{"id", e.id}, {"surface", e.surface}, {"frequency", e.frequency}, {"postings", e.postings}});
    }
    json vectors = json::object();
    for (auto const & [text, v] : a.embeddings.vectors) {
        vectors[text] = std::vector<double>(v.components().begin(), v.components().end());
    }
    json auto_h = json::array();
    for (auto const & h : a.auto_histograms) {
        auto_h.push_back(histogram_json(h));
    }
    json user_h = json::array();
    for (auto const & h : a.user_histograms) {
        user_h.push_back(histogram_json(h));
    }
    auto const & r = a.run_report;
    json timings = json::object();
    for (auto const & [stage, seconds] : r.timings_seconds) {
        timings[stage] = seconds;
    }
    return json{
        {"schema_version", a.schema_version},
        {"corpus_digest", a.corpus_digest},
        {"config", a.config},
        {"entities", json{{"k_cap", a.entities.k_cap()}, {"items", std::move(entities)}}},
        {"embeddings",
         json{{"provider", a.embeddings.provider}, {"dimension", a.embeddings.dimension}, {"vectors", std::move(vectors)}}},
        {"auto_histograms", std::move(auto_h)},
        {"user_histograms", std::move(user_h)},
        {"run_report",
         json{
             {"corpus_examples", r.corpus_examples},
             {"entity_count", r.entity_count},
             {"cutoffs", r.cutoffs},
             {"clusters_per_cutoff", r.clusters_per_cutoff},
             {"clusters_kept", r.clusters_kept},
             {"labeled", r.labeled},
             {"no_label", r.no_label},
             {"label_failures", r.label_failures},
             {"warnings", r.warnings},
             {"timings_seconds", std::move(timings)},
         }},
    };
}

AnalysisArtifact artifact_from_json(json const & document)
{
    Field root(document, "artifact");
    AnalysisArtifact a;
    a.schema_version = root.get<int>("schema_version");
    if (a.schema_version != kSchemaVersion) {
        throw SchemaVersionError(
            "artifact schema_version " + std::to_string(a.schema_version) + " is not supported (this build reads version "
            + std::to_string(kSchemaVersion) + "); re-run `autohist analyze`");
    }
    a.corpus_digest = root.get<std::string>("corpus_digest");
    try {
        from_json(root.at("config"), a.config);
        a.config.validate();
    } catch (ConfigError const & e) {
        throw ArtifactInvariantError(std::string("config: ") + e.what());
    }

    Field ef(root.at("entities"), "artifact.entities");
    auto const & items = ef.at("items");
    if (!items.is_array()) {
        throw StoreError("artifact.entities.items: expected an array");
    }
    std::vector<Entity> entities;
    for (std::size_t i = 0; i < items.size(); ++i) {
        Field f(items[i], "artifact.entities.items[" + std::to_string(i) + "]");
        entities.push_back(Entity{
            f.get<std::size_t>("id"),
            f.get<std::vector<std::string>>("surface"),
            f.get<std::size_t>("frequency"),
            f.get<std::vector<std::size_t>>("postings")});
    }
    try {
        a.entities = EntityTable(std::move(entities), ef.get<std::size_t>("k_cap"));
    } catch (std::invalid_argument const & e) {
        throw ArtifactInvariantError(std::string("entities: ") + e.what());
    }

    Field emb(root.at("embeddings"), "artifact.embeddings");
    a.embeddings.provider = emb.get<std::string>("provider");
    a.embeddings.dimension = emb.get<std::size_t>("dimension");
    auto const & vectors = emb.at("vectors");
    if (!vectors.is_object()) {
        throw StoreError("artifact.embeddings.vectors: expected an object");
    }
    for (auto const & [text, row] : vectors.items()) {
        try {
            auto v = EmbeddingVector::from_unit(row.get<std::vector<double>>());
            if (v.dimension() != a.embeddings.dimension) {
                throw ArtifactInvariantError("embeddings['" + text + "']: dimension mismatch");
            }
            a.embeddings.vectors.emplace(text, std::move(v));
        } catch (EmbeddingError const & e) {
            throw ArtifactInvariantError("embeddings['" + text + "']: " + e.what());
        } catch (json::exception const & e) {
            throw StoreError("artifact.embeddings.vectors['" + text + "']: " + e.what());
        }
    }

    for (char const * section : {"auto_histograms", "user_histograms"}) {
        auto const & list = root.at(section);
        if (!list.is_array()) {
            throw StoreError(root.child(section) + ": expected an array");
        }
        auto & into = std::string_view(section) == "auto_histograms" ? a.auto_histograms : a.user_histograms;
        for (std::size_t i = 0; i < list.size(); ++i) {
            into.push_back(histogram_from(list[i], root.child(section) + "[" + std::to_string(i) + "]"));
        }
    }

    Field rf(root.at("run_report"), "artifact.run_report");
    auto & r = a.run_report;
    r.corpus_examples = rf.get<std::size_t>("corpus_examples");
    r.entity_count = rf.get<std::size_t>("entity_count");
    r.cutoffs = rf.get<std::vector<double>>("cutoffs");
    r.clusters_per_cutoff = rf.get<std::vector<std::size_t>>("clusters_per_cutoff");
    r.clusters_kept = rf.get<std::size_t>("clusters_kept");
    r.labeled = rf.get<std::size_t>("labeled");
    r.no_label = rf.get<std::size_t>("no_label");
    r.label_failures = rf.get<std::size_t>("label_failures");
    r.warnings = rf.get<std::vector<std::string>>("warnings");
    r.timings_seconds = rf.get<std::map<std::string, double>>("timings_seconds");

    check_invariants(a);
    return a;
}

void check_invariants(AnalysisArtifact const & a)
{
    if (a.schema_version != kSchemaVersion) {
        throw SchemaVersionError("schema_version " + std::to_string(a.schema_version) + " is not supported");
    }
    if (a.corpus_digest.size() != 64
        || a.corpus_digest.find_first_not_of("0123456789abcdef") != std::string::npos) {
        throw ArtifactInvariantError("corpus_digest must be 64 lowercase hex characters");
    }
    auto const n = a.run_report.corpus_examples;
    if (n == 0) {
        throw ArtifactInvariantError("run_report.corpus_examples must be >= 1");
    }
    for (auto const & e : a.entities.entities()) {
        if (e.postings.back() >= n) {
            throw ArtifactInvariantError(
                "entities: '" + e.text() + "' has a posting beyond the corpus size " + std::to_string(n));
        }
    }
    if (a.entities.size() != a.run_report.entity_count) {
        throw ArtifactInvariantError("run_report.entity_count does not match the entity table");
    }
    for (auto const & [text, v] : a.embeddings.vectors) {
        if (v.dimension() != a.embeddings.dimension) {
            throw ArtifactInvariantError("embeddings['" + text + "']: dimension mismatch");
        }
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < a.auto_histograms.size(); ++i) {
        auto const & h = a.auto_histograms[i];
        check_histogram(h, describe("auto_histograms", i, h), HistogramSource::automatic, a.entities, n);
        if (!ids.insert(h.id).second) {
            throw ArtifactInvariantError(describe("auto_histograms", i, h) + ": duplicate id '" + h.id + "'");
        }
    }
    for (std::size_t i = 0; i < a.user_histograms.size(); ++i) {
        auto const & h = a.user_histograms[i];
        check_histogram(h, describe("user_histograms", i, h), HistogramSource::user, a.entities, n);
        if (!ids.insert(h.id).second) {
            throw ArtifactInvariantError(describe("user_histograms", i, h) + ": duplicate id '" + h.id + "'");
        }
    }
}

void save_artifact(AnalysisArtifact const & artifact, std::filesystem::path const & path)
{
    auto const text = canonical_json(artifact_to_json(artifact));
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw StoreError("cannot write artifact to '" + path.string() + "'");
        }
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw StoreError("failed writing artifact to '" + path.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw StoreError("cannot move artifact into place at '" + path.string() + "'");
    }
}

AnalysisArtifact load_artifact(std::filesystem::path const & path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StoreError("cannot read artifact '" + path.string() + "'");
    }
    json document;
    try {
        document = json::parse(in);
    } catch (json::parse_error const & e) {
        throw StoreError("artifact '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return artifact_from_json(document);
}

void validate_against_corpus(AnalysisArtifact const & artifact, Corpus const & corpus)
{
    if (artifact.corpus_digest != corpus.source_digest()) {
        throw DigestMismatchError(artifact.corpus_digest, corpus.source_digest());
    }
    if (artifact.run_report.corpus_examples != corpus.size()) {
        throw ArtifactInvariantError("run_report.corpus_examples does not match the corpus size");
    }
}

}  // namespace autohist
