#include "autohist/histogram.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace autohist;
using autohist::testing::corpus_of;

namespace {

Histogram with_counts(std::string id, std::string label, std::vector<std::size_t> counts)
{
    Histogram h;
    h.id = std::move(id);
    h.label = std::move(label);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        h.buckets.push_back(Bucket{i, {"e" + std::to_string(i)}, counts[i]});
        h.total_count += counts[i];
    }
    h.entropy = count_entropy(h.buckets);
    return h;
}

std::vector<std::string> ids(std::vector<Histogram> const & hs)
{
    std::vector<std::string> out;
    for (auto const & h : hs) {
        out.push_back(h.id);
    }
    return out;
}

}  // namespace

TEST(ContainsEntityTest, ReferenceCases)
{
    std::vector<std::string> cancer{"cancer"};
    EXPECT_TRUE(contains_entity(tokenize("cancer risk rises"), cancer));
    EXPECT_FALSE(contains_entity(tokenize("cancerous cells"), cancer));
    std::vector<std::string> covid{"covid", "19"};
    EXPECT_TRUE(contains_entity(tokenize("covid 19 vaccine"), covid));
    EXPECT_FALSE(contains_entity(tokenize("covid and 19"), covid));
    EXPECT_FALSE(contains_entity(tokenize(""), cancer));
    EXPECT_THROW(contains_entity(tokenize("cancer"), std::vector<std::string>{}), std::invalid_argument);
}

TEST(BuildHistogramTest, HandCounted)
{
    auto corpus = corpus_of({"cancer cancer", "cancer flu"});
    auto table = extract_entities(corpus);
    LabeledCluster labeled{Cluster{{0, 1}, 0.5}, "conditions"};
    auto h = build_histogram(labeled, table, corpus);
    ASSERT_EQ(h.buckets.size(), 2u);
    EXPECT_EQ(h.buckets[0].text(), "cancer");
    EXPECT_EQ(h.buckets[0].count, 2u);
    EXPECT_EQ(h.buckets[1].text(), "flu");
    EXPECT_EQ(h.buckets[1].count, 1u);
    EXPECT_EQ(h.total_count, 3u);
    EXPECT_EQ(h.source, HistogramSource::automatic);
    EXPECT_EQ(h.id.size(), 16u);
    EXPECT_NEAR(h.entropy, -(2.0 / 3 * std::log(2.0 / 3) + 1.0 / 3 * std::log(1.0 / 3)), 1e-12);
}

TEST(BuildHistogramTest, IdIsContentHash)
{
    std::vector<std::string> a{"flu", "cancer"};
    std::vector<std::string> b{"cancer", "flu"};
    EXPECT_EQ(auto_histogram_id("x", a), auto_histogram_id("x", b));
    EXPECT_NE(auto_histogram_id("x", a), auto_histogram_id("y", a));
    // Length prefixing keeps "ab"+"c" distinct from "a"+"bc".
    EXPECT_NE(auto_histogram_id("ab", std::vector<std::string>{"c"}), auto_histogram_id("a", std::vector<std::string>{"bc"}));
}

TEST(BuildHistogramTest, UnknownEntityIsAnError)
{
    auto corpus = corpus_of({"cancer"});
    auto table = extract_entities(corpus);
    std::vector<std::size_t> bad{5};
    EXPECT_THROW(make_histogram("x", "x", HistogramSource::user, bad, table, corpus), HistogramError);
}

TEST(EntropyTest, ReferenceCases)
{
    EXPECT_EQ(with_counts("a", "a", {7}).entropy, 0.0);
    EXPECT_NEAR(with_counts("a", "a", {4, 4}).entropy, std::log(2.0), 1e-15);
    EXPECT_NEAR(with_counts("a", "a", {1, 1, 1, 1}).entropy, std::log(4.0), 1e-15);
}

TEST(EntropyProperty, BoundedByLogBucketCount)
{
    std::mt19937 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::size_t> counts(1 + rng() % 12);
        for (auto & c : counts) {
            c = 1 + rng() % 50;
        }
        auto h = with_counts("a", "a", counts);
        EXPECT_GE(h.entropy, 0.0);
        EXPECT_LE(h.entropy, std::log(static_cast<double>(counts.size())) + 1e-12);
    }
}

TEST(SortHistogramsTest, TotalWithLabelTieBreak)
{
    std::vector<Histogram> hs{with_counts("1", "c", {5}), with_counts("2", "a", {9}), with_counts("3", "b", {9})};
    EXPECT_EQ(ids(sort_histograms(hs, SortKey::total_count)), (std::vector<std::string>{"2", "3", "1"}));
}

TEST(SortHistogramsTest, EntropyPrefersUniform)
{
    std::vector<Histogram> hs{with_counts("spike", "s", {8}), with_counts("uniform", "u", {2, 2, 2, 2})};
    EXPECT_EQ(ids(sort_histograms(hs, SortKey::entropy)), (std::vector<std::string>{"uniform", "spike"}));
}

TEST(SortHistogramsTest, EmptyAndIdTieBreak)
{
    EXPECT_TRUE(sort_histograms({}, SortKey::entropy).empty());
    std::vector<Histogram> hs{with_counts("b", "same", {3}), with_counts("a", "same", {3})};
    EXPECT_EQ(ids(sort_histograms(hs, SortKey::total_count)), (std::vector<std::string>{"a", "b"}));
}

TEST(SortKeyTest, Names)
{
    EXPECT_EQ(parse_sort_key("total"), SortKey::total_count);
    EXPECT_EQ(parse_sort_key("entropy"), SortKey::entropy);
    EXPECT_FALSE(parse_sort_key("banana"));
}

TEST(SelectBucketTest, ReturnsPostings)
{
    auto corpus = corpus_of({"cancer cancer", "cancer flu"});
    auto table = extract_entities(corpus);
    LabeledCluster labeled{Cluster{{0, 1}, 0.5}, "conditions"};
    auto h = build_histogram(labeled, table, corpus);
    EXPECT_EQ(select_bucket(h, 0, table), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(select_bucket(h, 1, table), (std::vector<std::size_t>{1}));
    EXPECT_THROW(select_bucket(h, 7, table), HistogramError);
}

TEST(SelectBucketProperty, CountEqualsSelectionSize)
{
    auto corpus = corpus_of({"heart lung heart", "lung kidney", "kidney heart", "liver", "heart"});
    auto table = extract_entities(corpus);
    std::vector<std::size_t> all;
    for (auto const & e : table.entities()) {
        all.push_back(e.id);
    }
    auto h = make_histogram("u", "organs", HistogramSource::user, all, table, corpus);
    for (auto const & b : h.buckets) {
        EXPECT_EQ(select_bucket(h, b.entity_id, table).size(), b.count);
        EXPECT_EQ(b.count, autohist::testing::brute_force_postings(corpus, b.surface).size());
    }
}
