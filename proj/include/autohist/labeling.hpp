#pragma once

#include "autohist/clustering.hpp"
#include "autohist/extraction.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace autohist {

inline constexpr std::size_t kMaxLabelLength = 60;
inline constexpr std::size_t kMaxPromptEntities = 25;

struct LabelMember
{
    std::string surface;
    std::size_t frequency;
};

struct LabelRequest
{
    std::string prompt;
    std::vector<LabelMember> members;  // the entities listed in the prompt
};

/// Names a group of entities. Remote providers only see the prompt; the
/// member list lets offline providers work without parsing it.
class LabelProvider
{
public:
    virtual ~LabelProvider() = default;
    virtual std::string identity() const = 0;
    /// Raw model reply. Throws ProviderError on transport failure.
    virtual std::string complete(LabelRequest const & request) = 0;
};

/// Offline labeler: "<most frequent member> group", or "no label" when the
/// members' mean pairwise cosine under the stub embedding is below 0.15.
class StubLabelProvider final : public LabelProvider
{
public:
    static constexpr double kCoherenceThreshold = 0.15;

    std::string identity() const override { return "stub-labeler"; }
    std::string complete(LabelRequest const & request) override;
};

/// The bundled few-shot template, with comment lines removed.
std::string_view label_prompt_template();
std::string_view label_prompt_template_id();

std::string build_label_prompt(std::span<std::string const> entity_surfaces);

/// nullopt stands for the "no label" answer.
std::optional<std::string> parse_label_response(std::string_view raw);

struct LabeledCluster
{
    Cluster cluster;
    std::string label;

    bool operator==(LabeledCluster const &) const = default;
};

struct LabelingReport
{
    std::size_t labeled = 0;
    std::size_t no_label = 0;
    std::size_t failed = 0;
    std::vector<std::string> warnings;
};

/// Up to kMaxPromptEntities members, by (frequency desc, surface asc).
std::vector<LabelMember> prompt_members(Cluster const & cluster, EntityTable const & table);

/// Labels every cluster and drops the "no label" ones. Provider failures
/// count as "no label" and add a warning to `report`. Output follows
/// cluster order regardless of `parallelism`.
std::vector<LabeledCluster> label_clusters(
    ClusterSet const & clusters,
    EntityTable const & table,
    LabelProvider & provider,
    std::size_t parallelism = 1,
    LabelingReport * report = nullptr);

}  // namespace autohist
