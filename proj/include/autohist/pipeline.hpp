#pragma once

#include "autohist/config.hpp"
#include "autohist/corpus.hpp"
#include "autohist/providers.hpp"
#include "autohist/store.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autohist {

/// Raised when provider failures exceed what the run can absorb.
class PipelineProviderError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct PipelineOptions
{
    std::size_t jobs = 1;
};

/// extract -> embed -> cluster -> label -> histograms. `summary_timings`
/// receives wall-clock stage timings whether or not they are recorded in
/// the artifact.
AnalysisArtifact run_pipeline(
    Corpus const & corpus,
    PipelineConfig const & config,
    Providers const & providers,
    PipelineOptions const & options = {},
    std::map<std::string, double> * summary_timings = nullptr);

/// Multi-line human-readable run summary.
std::string format_run_summary(AnalysisArtifact const & artifact, std::map<std::string, double> const & timings);

}  // namespace autohist
