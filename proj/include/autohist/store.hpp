#pragma once

#include "autohist/config.hpp"
#include "autohist/corpus.hpp"
#include "autohist/embedding.hpp"
#include "autohist/extraction.hpp"
#include "autohist/histogram.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace autohist {

inline constexpr int kSchemaVersion = 1;

struct StoredEmbeddings
{
    std::string provider;  // provider identity; empty when not stored
    std::size_t dimension = 0;
    std::map<std::string, EmbeddingVector> vectors;  // normalized text -> vector

    bool operator==(StoredEmbeddings const &) const = default;
};

struct RunReport
{
    std::size_t corpus_examples = 0;
    std::size_t entity_count = 0;
    std::vector<double> cutoffs;
    std::vector<std::size_t> clusters_per_cutoff;  // before size filtering
    std::size_t clusters_kept = 0;
    std::size_t labeled = 0;
    std::size_t no_label = 0;
    std::size_t label_failures = 0;
    std::vector<std::string> warnings;
    std::map<std::string, double> timings_seconds;  // empty unless recorded

    bool operator==(RunReport const &) const = default;
};

struct AnalysisArtifact
{
    int schema_version = kSchemaVersion;
    std::string corpus_digest;
    PipelineConfig config;
    EntityTable entities;
    StoredEmbeddings embeddings;
    std::vector<Histogram> auto_histograms;
    std::vector<Histogram> user_histograms;
    RunReport run_report;
};

class StoreError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class SchemaVersionError : public StoreError
{
public:
    using StoreError::StoreError;
};

/// Names the first failed invariant check.
class ArtifactInvariantError : public StoreError
{
public:
    using StoreError::StoreError;
};

class DigestMismatchError : public StoreError
{
public:
    DigestMismatchError(std::string artifact_digest, std::string corpus_digest);
    std::string const & artifact_digest() const noexcept { return artifact_; }
    std::string const & corpus_digest() const noexcept { return corpus_; }

private:
    std::string artifact_;
    std::string corpus_;
};

/// Canonical JSON text: sorted keys, two-space indentation, numeric arrays
/// on one line, floating-point values with 9 significant digits.
std::string canonical_json(nlohmann::json const & document);

nlohmann::json artifact_to_json(AnalysisArtifact const & artifact);
/// Parses and runs every invariant check.
AnalysisArtifact artifact_from_json(nlohmann::json const & document);

/// Throws ArtifactInvariantError naming the failing check.
void check_invariants(AnalysisArtifact const & artifact);

/// Writes to a temporary sibling then renames over `path`.
void save_artifact(AnalysisArtifact const & artifact, std::filesystem::path const & path);
AnalysisArtifact load_artifact(std::filesystem::path const & path);

/// Throws DigestMismatchError unless the artifact was built from `corpus`;
/// also rejects postings beyond the corpus size.
void validate_against_corpus(AnalysisArtifact const & artifact, Corpus const & corpus);

}  // namespace autohist
