#include "autohist/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

namespace autohist {

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values)
    : n_(n)
    , values_(std::move(values))
{
    if (n_ == 0 || values_.size() != n_ * n_) {
        throw std::invalid_argument("distance matrix must be a non-empty n*n array");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        if ((*this)(i, i) != 0.0) {
            throw std::invalid_argument("distance matrix diagonal must be zero");
        }
        for (std::size_t j = i + 1; j < n_; ++j) {
            double const d = (*this)(i, j);
            if (!(d >= 0.0 && d <= 2.0)) {
                throw std::invalid_argument("distance matrix entries must lie in [0, 2]");
            }
            if (d != (*this)(j, i)) {
                throw std::invalid_argument("distance matrix must be symmetric");
            }
        }
    }
}

DistanceMatrix pairwise_distances(std::span<EmbeddingVector const> vectors, std::size_t jobs)
{
    auto const n = vectors.size();
    if (n < 2) {
        throw std::invalid_argument("pairwise_distances needs at least 2 vectors");
    }
    for (auto const & v : vectors) {
        if (v.dimension() != vectors.front().dimension()) {
            throw std::invalid_argument("pairwise_distances inputs have mixed dimensions");
        }
    }
    std::vector<double> d(n * n, 0.0);
    auto fill_rows = [&](std::size_t worker, std::size_t workers) {
        for (std::size_t i = worker; i < n; i += workers) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double const dist = std::clamp(1.0 - cosine_similarity(vectors[i], vectors[j]), 0.0, 2.0);
                d[i * n + j] = dist;
                d[j * n + i] = dist;
            }
        }
    };
    jobs = std::clamp<std::size_t>(jobs == 0 ? std::thread::hardware_concurrency() : jobs, 1, n);
    if (jobs == 1) {
        fill_rows(0, 1);
    } else {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back(fill_rows, w, jobs);
        }
    }
    return DistanceMatrix(n, std::move(d));
}

std::optional<Linkage> parse_linkage(std::string_view name)
{
    if (name == "average") {
        return Linkage::average;
    }
    if (name == "complete") {
        return Linkage::complete;
    }
    if (name == "single") {
        return Linkage::single;
    }
    return std::nullopt;
}

std::string_view to_string(Linkage linkage)
{
    switch (linkage) {
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
    case Linkage::single: return "single";
    }
    return "average";
}

namespace {

/// Cluster slots are indexed by the cluster's smallest member id, so a
/// merge of slots a < b always keeps slot a.
class Agglomerator
{
public:
    Agglomerator(DistanceMatrix const & m, Linkage linkage)
        : n_(m.size())
        , linkage_(linkage)
        , value_(n_ * n_)
        , size_(n_, 1)
        , active_(n_, true)
        , nn_(n_, kNone)
        , nn_dist_(n_, kInf)
    {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                value_[i * n_ + j] = m(i, j);
            }
        }
        for (std::size_t i = 0; i < n_; ++i) {
            refresh(i);
        }
    }

    std::vector<Merge> run(double max_cutoff)
    {
        std::vector<Merge> merges;
        while (true) {
            std::size_t best = kNone;
            for (std::size_t i = 0; i < n_; ++i) {
                if (!active_[i] || nn_[i] == kNone) {
                    continue;
                }
                if (best == kNone || before(i, best)) {
                    best = i;
                }
            }
            if (best == kNone || nn_dist_[best] > max_cutoff) {
                break;
            }
            auto const a = std::min(best, nn_[best]);
            auto const b = std::max(best, nn_[best]);
            merges.push_back(Merge{a, b, nn_dist_[best]});
            merge(a, b);
        }
        return merges;
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    double distance(std::size_t i, std::size_t j) const
    {
        double const v = value_[i * n_ + j];
        if (linkage_ == Linkage::average) {
            return v / (static_cast<double>(size_[i]) * static_cast<double>(size_[j]));
        }
        return v;
    }

    /// Row i's candidate pair precedes row k's: distance, then the pair of
    /// smallest member ids.
    bool before(std::size_t i, std::size_t k) const
    {
        if (nn_dist_[i] != nn_dist_[k]) {
            return nn_dist_[i] < nn_dist_[k];
        }
        auto const pi = std::minmax(i, nn_[i]);
        auto const pk = std::minmax(k, nn_[k]);
        return pi < pk;
    }

    void refresh(std::size_t i)
    {
        nn_[i] = kNone;
        nn_dist_[i] = kInf;
        for (std::size_t j = 0; j < n_; ++j) {
            if (j == i || !active_[j]) {
                continue;
            }
            double const d = distance(i, j);
            if (d < nn_dist_[i]) {
                nn_dist_[i] = d;
                nn_[i] = j;
            }
        }
    }

    void merge(std::size_t a, std::size_t b)
    {
        for (std::size_t k = 0; k < n_; ++k) {
            if (!active_[k] || k == a || k == b) {
                continue;
            }
            double & ak = value_[a * n_ + k];
            double const bk = value_[b * n_ + k];
            switch (linkage_) {
            case Linkage::average: ak += bk; break;  // sums of member distances
            case Linkage::complete: ak = std::max(ak, bk); break;
            case Linkage::single: ak = std::min(ak, bk); break;
            }
            value_[k * n_ + a] = ak;
        }
        size_[a] += size_[b];
        active_[b] = false;
        refresh(a);
        for (std::size_t k = 0; k < n_; ++k) {
            if (!active_[k] || k == a) {
                continue;
            }
            if (nn_[k] == a || nn_[k] == b) {
                refresh(k);
                continue;
            }
            double const d = distance(k, a);
            if (d < nn_dist_[k] || (d == nn_dist_[k] && a < nn_[k])) {
                nn_dist_[k] = d;
                nn_[k] = a;
            }
        }
    }

    std::size_t n_;
    Linkage linkage_;
    std::vector<double> value_;
    std::vector<std::size_t> size_;
    std::vector<bool> active_;
    std::vector<std::size_t> nn_;
    std::vector<double> nn_dist_;
};

void check_cutoff(double cutoff)
{
    if (!(cutoff > 0.0 && cutoff <= 2.0)) {
        throw std::invalid_argument("cutoff must lie in (0, 2], got " + std::to_string(cutoff));
    }
}

}  // namespace

std::vector<Merge> merge_sequence(DistanceMatrix const & matrix, double max_cutoff, Linkage linkage)
{
    check_cutoff(max_cutoff);
    return Agglomerator(matrix, linkage).run(max_cutoff);
}

std::vector<Cluster> clusters_at(std::size_t n, std::span<Merge const> merges, double cutoff)
{
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (auto const & m : merges) {
        if (m.distance > cutoff) {
            break;
        }
        auto const ra = find(m.first);
        auto const rb = find(m.second);
        parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::vector<std::vector<std::size_t>> groups(n);
    for (std::size_t i = 0; i < n; ++i) {
        groups[find(i)].push_back(i);
    }
    std::vector<Cluster> clusters;
    for (auto & g : groups) {
        if (!g.empty()) {
            clusters.push_back(Cluster{std::move(g), cutoff});
        }
    }
    return clusters;
}

std::vector<Cluster> agglomerate(DistanceMatrix const & matrix, double cutoff, Linkage linkage)
{
    auto const merges = merge_sequence(matrix, cutoff, linkage);
    return clusters_at(matrix.size(), merges, cutoff);
}

ClusterSet multi_cutoff_cluster(
    DistanceMatrix const & matrix,
    std::span<double const> cutoffs,
    std::size_t min_size,
    std::size_t max_size,
    Linkage linkage)
{
    if (cutoffs.empty()) {
        throw std::invalid_argument("at least one cutoff is required");
    }
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        check_cutoff(cutoffs[i]);
        if (i > 0 && !(cutoffs[i] > cutoffs[i - 1])) {
            throw std::invalid_argument("cutoffs must be strictly increasing");
        }
    }
    if (min_size > max_size) {
        throw std::invalid_argument("min cluster size exceeds max cluster size");
    }

    // Agglomeration at a smaller cutoff performs a prefix of the merges
    // made at a larger one, so one pass serves every cutoff.
    auto const merges = merge_sequence(matrix, cutoffs.back(), linkage);

    ClusterSet out;
    std::set<std::vector<std::size_t>> seen;
    for (double cutoff : cutoffs) {
        auto clusters = clusters_at(matrix.size(), merges, cutoff);
        out.cutoffs_used.push_back(cutoff);
        out.raw_counts.push_back(clusters.size());
        for (auto & c : clusters) {
            auto const size = c.entity_ids.size();
            if (size < min_size || size > max_size) {
                continue;
            }
            if (seen.insert(c.entity_ids).second) {
                out.clusters.push_back(std::move(c));
            }
        }
    }
    return out;
}

}  // namespace autohist
