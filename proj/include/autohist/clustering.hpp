#pragma once

#include "autohist/embedding.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace autohist {

/// Symmetric cosine-distance matrix, d(i,j) = 1 - cos(v_i, v_j) in [0, 2].
class DistanceMatrix
{
public:
    /// Takes a row-major n*n matrix. Throws std::invalid_argument when the
    /// matrix is not square, not symmetric, has a non-zero diagonal or has
    /// entries outside [0, 2].
    DistanceMatrix(std::size_t n, std::vector<double> values);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> values_;
};

/// Throws std::invalid_argument for fewer than two vectors or mixed
/// dimensions.
DistanceMatrix pairwise_distances(std::span<EmbeddingVector const> vectors, std::size_t jobs = 1);

enum class Linkage { average, complete, single };

std::optional<Linkage> parse_linkage(std::string_view name);
std::string_view to_string(Linkage linkage);

struct Cluster
{
    std::vector<std::size_t> entity_ids;  // sorted ascending
    double cutoff;

    bool operator==(Cluster const &) const = default;
};

/// One merge of the agglomeration. `first` and `second` are the smallest
/// member ids of the merged clusters, first < second.
struct Merge
{
    std::size_t first;
    std::size_t second;
    double distance;
};

/// Runs agglomeration until the closest pair is farther than `max_cutoff`
/// and returns the merges in order. Closest pairs are chosen by distance,
/// then by (smallest id of the lower cluster, smallest id of the other).
std::vector<Merge> merge_sequence(DistanceMatrix const & matrix, double max_cutoff, Linkage linkage = Linkage::average);

/// Clusters left after applying every merge of `merges` up to the first
/// one whose distance exceeds `cutoff`. Ordered by smallest member id.
std::vector<Cluster> clusters_at(std::size_t n, std::span<Merge const> merges, double cutoff);

/// Agglomerative clustering: start from singletons, merge the closest
/// pair while its linkage distance is <= cutoff. cutoff must lie in (0, 2].
std::vector<Cluster> agglomerate(DistanceMatrix const & matrix, double cutoff, Linkage linkage = Linkage::average);

struct ClusterSet
{
    std::vector<Cluster> clusters;
    std::vector<double> cutoffs_used;
    /// Clusters produced at each cutoff before size filtering, parallel to
    /// cutoffs_used.
    std::vector<std::size_t> raw_counts;
};

inline std::vector<double> default_cutoffs() { return {0.2, 0.35, 0.5, 0.65, 0.8}; }
inline constexpr std::size_t kDefaultMinClusterSize = 3;
inline constexpr std::size_t kDefaultMaxClusterSize = 50;

/// Union of agglomerate() over all cutoffs (strictly increasing, each in
/// (0, 2]). Clusters outside [min_size, max_size] are dropped; identical
/// member sets keep the instance from the smallest cutoff.
ClusterSet multi_cutoff_cluster(
    DistanceMatrix const & matrix,
    std::span<double const> cutoffs,
    std::size_t min_size = kDefaultMinClusterSize,
    std::size_t max_size = kDefaultMaxClusterSize,
    Linkage linkage = Linkage::average);

}  // namespace autohist
