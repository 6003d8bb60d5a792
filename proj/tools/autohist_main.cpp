// Command-line entry points: batch analysis, the HTTP server and artifact
// inspection.

#include "autohist/config.hpp"
#include "autohist/corpus.hpp"
#include "autohist/extraction.hpp"
#include "autohist/pipeline.hpp"
#include "autohist/providers.hpp"
#include "autohist/service.hpp"
#include "autohist/store.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <pthread.h>
#include <sys/socket.h>
#include <signal.h>
#include <unistd.h>

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kCorpusError = 2, kProviderError = 3 };

struct AnalyzeArgs
{
    std::string corpus_path;
    std::string format;
    std::string out = "autohist-artifact.json";
    std::optional<std::size_t> k;
    std::vector<double> cutoffs;
    std::optional<std::size_t> min_size;
    std::optional<std::size_t> max_size;
    std::string provider;
    std::string config;
    std::size_t jobs = 0;
};

struct ServeArgs
{
    std::string artifact;
    std::string corpus;
    std::string format;
    std::optional<int> port;
    std::string config;
};

struct InspectArgs
{
    std::string artifact;
    std::size_t top = 10;
};

autohist::AppConfig base_config(std::string const & path)
{
    return path.empty() ? autohist::AppConfig{} : autohist::load_config(path);
}

autohist::CorpusFormat resolve_format(std::string const & name, std::string const & path)
{
    if (name.empty()) {
        return autohist::infer_corpus_format(path);
    }
    auto f = autohist::parse_corpus_format(name);
    if (!f) {
        throw autohist::ConfigError("unknown corpus format '" + name + "' (expected jsonl, csv or txt-lines)");
    }
    return *f;
}

int run_analyze(AnalyzeArgs const & args)
{
    autohist::AppConfig config;
    autohist::CorpusFormat format;
    try {
        config = base_config(args.config);
        auto & p = config.pipeline;
        if (args.k) {
            p.k_cap = *args.k;
        }
        if (!args.cutoffs.empty()) {
            p.cutoffs = args.cutoffs;
        }
        if (args.min_size) {
            p.min_cluster_size = *args.min_size;
        }
        if (args.max_size) {
            p.max_cluster_size = *args.max_size;
        }
        if (!args.provider.empty()) {
            auto const kind = args.provider == "stub" ? autohist::ProviderKind::stub : autohist::ProviderKind::remote;
            p.embedding.kind = kind;
            p.labeling.kind = kind;
            p.generation.kind = kind;
        }
        p.validate();
        format = resolve_format(args.format, args.corpus_path);
    } catch (std::exception const & e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }

    std::optional<autohist::Corpus> corpus;
    try {
        corpus.emplace(autohist::load_corpus(args.corpus_path, format));
    } catch (std::exception const & e) {
        std::cerr << "corpus error: " << e.what() << "\n";
        return kCorpusError;
    }

    autohist::Providers providers;
    try {
        providers = autohist::make_providers(config.pipeline);
    } catch (std::exception const & e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }

    autohist::PipelineOptions options;
    options.jobs = args.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : args.jobs;
    std::map<std::string, double> timings;
    autohist::AnalysisArtifact artifact;
    try {
        artifact = autohist::run_pipeline(*corpus, config.pipeline, providers, options, &timings);
    } catch (autohist::ExtractionError const & e) {
        std::cerr << "corpus error: " << e.what() << "\n";
        return kCorpusError;
    } catch (autohist::PipelineProviderError const & e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kProviderError;
    } catch (autohist::ProviderError const & e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kProviderError;
    } catch (autohist::EmbeddingError const & e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kProviderError;
    }

    try {
        autohist::save_artifact(artifact, args.out);
    } catch (std::exception const & e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    std::cout << autohist::format_run_summary(artifact, timings);
    std::cout << "artifact:          " << args.out << "\n";
    return kOk;
}

int run_serve(ServeArgs const & args)
{
    autohist::AppConfig config;
    autohist::AnalysisArtifact artifact;
    try {
        config = base_config(args.config);
        if (args.port) {
            config.server.port = *args.port;
        }
        config.server.validate();
        artifact = autohist::load_artifact(args.artifact);
    } catch (std::exception const & e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    std::optional<autohist::Corpus> corpus;
    try {
        corpus.emplace(autohist::load_corpus(args.corpus, resolve_format(args.format, args.corpus)));
        autohist::validate_against_corpus(artifact, *corpus);
    } catch (autohist::DigestMismatchError const & e) {
        std::cerr << "refusing to start: " << e.what() << "\n";
        return kCorpusError;
    } catch (std::exception const & e) {
        std::cerr << "corpus error: " << e.what() << "\n";
        return kCorpusError;
    }

    autohist::Providers providers;
    try {
        // Query-time providers follow the pipeline settings the artifact
        // was built with, unless a config file overrides them.
        auto pipeline = args.config.empty() ? artifact.config : config.pipeline;
        providers = autohist::make_providers(pipeline);
    } catch (std::exception const & e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }

    autohist::Service service(config.server, providers);
    service.set_logger([](std::string const & line) { std::cerr << line << std::endl; });
    service.load(std::move(artifact), std::move(*corpus), args.artifact);

    // SIGINT/SIGTERM are taken by a dedicated thread so the server can be
    // stopped outside of signal-handler context. The mask is inherited by
    // every thread started from here on.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    httplib::Server server;
    // httplib also sets SO_REUSEPORT by default, which would let a second
    // server share a port that is already in use.
    server.set_socket_options([](int sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    service.register_routes(server);
    if (!server.bind_to_port(config.server.host, config.server.port)) {
        std::cerr << "error: cannot listen on " << config.server.host << ":" << config.server.port
                  << " (port in use or not permitted)\n";
        return kConfigError;
    }
    std::atomic<bool> finished{false};
    std::jthread waiter([&] {
        int signal = 0;
        sigwait(&stop_signals, &signal);
        if (!finished) {
            std::cerr << "received signal " << signal << ", shutting down" << std::endl;
        }
        server.stop();
    });
    std::cerr << "serving on http://" << config.server.host << ":" << config.server.port << std::endl;
    server.listen_after_bind();
    finished = true;
    // Wakes the waiter if the server stopped for another reason.
    kill(getpid(), SIGTERM);
    return kOk;
}

void print_table(std::string const & title, std::vector<autohist::Histogram> const & histograms, std::size_t top)
{
    std::cout << title << "\n";
    std::cout << std::left << std::setw(4) << "#" << std::setw(36) << "label" << std::setw(8) << "source" << std::right
              << std::setw(8) << "buckets" << std::setw(8) << "total" << std::setw(10) << "entropy"
              << "  top entities\n";
    for (std::size_t i = 0; i < histograms.size() && i < top; ++i) {
        auto const & h = histograms[i];
        std::string head;
        for (std::size_t b = 0; b < h.buckets.size() && b < 3; ++b) {
            head += (b ? ", " : "") + h.buckets[b].text() + " (" + std::to_string(h.buckets[b].count) + ")";
        }
        auto label = h.label.size() > 34 ? h.label.substr(0, 33) + "~" : h.label;
        std::cout << std::left << std::setw(4) << i + 1 << std::setw(36) << label << std::setw(8)
                  << autohist::to_string(h.source) << std::right << std::setw(8) << h.buckets.size() << std::setw(8)
                  << h.total_count << std::setw(10) << std::fixed << std::setprecision(4) << h.entropy << "  " << head
                  << "\n";
    }
    std::cout << "\n";
}

int run_inspect(InspectArgs const & args)
{
    autohist::AnalysisArtifact artifact;
    try {
        artifact = autohist::load_artifact(args.artifact);
    } catch (std::exception const & e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    std::vector<autohist::Histogram> all = artifact.auto_histograms;
    all.insert(all.end(), artifact.user_histograms.begin(), artifact.user_histograms.end());
    std::cout << "corpus digest: " << artifact.corpus_digest << "\n";
    std::cout << "entities: " << artifact.entities.size() << ", histograms: " << artifact.auto_histograms.size()
              << " auto + " << artifact.user_histograms.size() << " user\n\n";
    print_table("by total count", autohist::sort_histograms(all, autohist::SortKey::total_count), args.top);
    print_table("by entropy", autohist::sort_histograms(all, autohist::SortKey::entropy), args.top);
    return kOk;
}

}  // namespace

int main(int argc, char ** argv)
{
    CLI::App app{"autohist: automatic entity histograms for text datasets"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto * a = app.add_subcommand("analyze", "Run the batch pipeline and write an analysis artifact");
    a->add_option("corpus", analyze.corpus_path, "Corpus file")->required();
    a->add_option("--format", analyze.format, "jsonl, csv or txt-lines (default: from extension)");
    a->add_option("--out", analyze.out, "Artifact output path");
    a->add_option("--k", analyze.k, "Maximum number of entities (default 2000)");
    a->add_option("--cutoffs", analyze.cutoffs, "Cosine-distance cutoffs, strictly increasing")->delimiter(',');
    a->add_option("--min-size", analyze.min_size, "Smallest cluster kept (default 3)");
    a->add_option("--max-size", analyze.max_size, "Largest cluster kept (default 50)");
    a->add_option("--provider", analyze.provider, "stub or remote")->check(CLI::IsMember({"stub", "remote"}));
    a->add_option("--config", analyze.config, "JSON config file");
    a->add_option("--jobs", analyze.jobs, "Worker threads (default: all processors)");

    ServeArgs serve;
    auto * s = app.add_subcommand("serve", "Serve the exploration API for an artifact");
    s->add_option("--artifact", serve.artifact, "Artifact file")->required();
    s->add_option("--corpus", serve.corpus, "Corpus file the artifact was built from")->required();
    s->add_option("--format", serve.format, "jsonl, csv or txt-lines (default: from extension)");
    s->add_option("--port", serve.port, "Listen port (default 8080)");
    s->add_option("--config", serve.config, "JSON config file");

    InspectArgs inspect;
    auto * i = app.add_subcommand("inspect", "Print the top histograms of an artifact");
    i->add_option("--artifact", inspect.artifact, "Artifact file")->required();
    i->add_option("--top", inspect.top, "Rows per table");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const & e) {
        auto const code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    if (*a) {
        return run_analyze(analyze);
    }
    if (*s) {
        return run_serve(serve);
    }
    return run_inspect(inspect);
}
