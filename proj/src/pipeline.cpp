#include "autohist/pipeline.hpp"

#include "autohist/clustering.hpp"
#include "autohist/extraction.hpp"
#include "autohist/histogram.hpp"
#include "autohist/labeling.hpp"

#include <chrono>
#include <iomanip>
#include <set>
#include <sstream>

namespace autohist {

namespace {

class StageTimer
{
public:
    explicit StageTimer(std::map<std::string, double> & out) : out_(out) {}

    void mark(std::string const & stage)
    {
        auto const now = std::chrono::steady_clock::now();
        out_[stage] = std::chrono::duration<double>(now - last_).count();
        last_ = now;
    }

private:
    std::map<std::string, double> & out_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

AnalysisArtifact run_pipeline(
    Corpus const & corpus,
    PipelineConfig const & config,
    Providers const & providers,
    PipelineOptions const & options,
    std::map<std::string, double> * summary_timings)
{
    config.validate();
    std::map<std::string, double> timings;
    StageTimer timer(timings);
    auto const started = std::chrono::steady_clock::now();

    AnalysisArtifact artifact;
    artifact.corpus_digest = corpus.source_digest();
    artifact.config = config;
    auto & report = artifact.run_report;
    report.corpus_examples = corpus.size();
    report.cutoffs = config.cutoffs;

    ExtractionOptions extraction;
    extraction.k_cap = config.k_cap;
    extraction.jobs = options.jobs;
    artifact.entities = extract_entities(corpus, extraction);
    auto const & table = artifact.entities;
    report.entity_count = table.size();
    timer.mark("extract");

    EmbeddingCache cache;
    auto & embedder = *providers.embedding;
    std::vector<std::string> surfaces;
    surfaces.reserve(table.size());
    for (auto const & e : table.entities()) {
        surfaces.push_back(e.text());
    }
    auto const vectors = embed_batch(surfaces, embedder, &cache);
    timer.mark("embed");

    ClusterSet clusters;
    if (vectors.size() >= 2) {
        auto const matrix = pairwise_distances(vectors, options.jobs);
        clusters = multi_cutoff_cluster(
            matrix, config.cutoffs, config.min_cluster_size, config.max_cluster_size, config.linkage);
    } else {
        clusters.cutoffs_used = config.cutoffs;
        clusters.raw_counts.assign(config.cutoffs.size(), vectors.size());
        report.warnings.push_back("fewer than two entities; no clusters were formed");
    }
    report.clusters_per_cutoff = clusters.raw_counts;
    report.clusters_kept = clusters.clusters.size();
    timer.mark("cluster");

    LabelingReport labeling;
    auto const labeled = label_clusters(clusters, table, *providers.labeling, config.label_parallelism, &labeling);
    report.labeled = labeling.labeled;
    report.no_label = labeling.no_label;
    report.label_failures = labeling.failed;
    report.warnings.insert(report.warnings.end(), labeling.warnings.begin(), labeling.warnings.end());
    if (!clusters.clusters.empty()) {
        double const failed_fraction =
            static_cast<double>(labeling.failed) / static_cast<double>(clusters.clusters.size());
        if (labeling.failed > 0 && failed_fraction > config.max_label_failure_fraction) {
            throw PipelineProviderError(
                "labeling failed for " + std::to_string(labeling.failed) + " of "
                + std::to_string(clusters.clusters.size()) + " clusters; first error: " + labeling.warnings.front());
        }
    }
    timer.mark("label");

    std::set<std::string> ids;
    std::vector<std::string> labels;
    for (auto const & lc : labeled) {
        auto h = build_histogram(lc, table, corpus);
        if (ids.insert(h.id).second) {
            labels.push_back(h.label);
            artifact.auto_histograms.push_back(std::move(h));
        }
    }
    // Label vectors back semantic search in the server.
    embed_batch(labels, embedder, &cache);
    timer.mark("histograms");

    bool const store_vectors = config.embedding.kind == ProviderKind::stub || config.store_remote_embeddings;
    if (store_vectors) {
        artifact.embeddings.provider = embedder.identity();
        artifact.embeddings.dimension = embedder.dimension();
        for (auto const & [key, vector] : cache.snapshot()) {
            if (key.first == artifact.embeddings.provider) {
                artifact.embeddings.vectors.emplace(key.second, vector);
            }
        }
    }

    timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (config.record_timings) {
        report.timings_seconds = timings;
    }
    if (summary_timings) {
        *summary_timings = timings;
    }
    check_invariants(artifact);
    return artifact;
}

std::string format_run_summary(AnalysisArtifact const & artifact, std::map<std::string, double> const & timings)
{
    auto const & r = artifact.run_report;
    std::ostringstream out;
    out << "examples:          " << r.corpus_examples << "\n";
    out << "entities:          " << r.entity_count << " (k_cap " << artifact.entities.k_cap() << ")\n";
    out << "clusters per cutoff:";
    for (std::size_t i = 0; i < r.cutoffs.size() && i < r.clusters_per_cutoff.size(); ++i) {
        out << " " << r.cutoffs[i] << "=" << r.clusters_per_cutoff[i];
    }
    out << "\n";
    out << "clusters kept:     " << r.clusters_kept << "\n";
    out << "labeled:           " << r.labeled << "\n";
    out << "no label:          " << r.no_label << " (" << r.label_failures << " provider failures)\n";
    out << "histograms:        " << artifact.auto_histograms.size() << "\n";
    if (!r.warnings.empty()) {
        out << "warnings:          " << r.warnings.size() << "\n";
    }
    if (auto it = timings.find("total"); it != timings.end()) {
        out << "elapsed:           " << std::fixed << std::setprecision(3) << it->second << " s\n";
    }
    return out.str();
}

}  // namespace autohist
