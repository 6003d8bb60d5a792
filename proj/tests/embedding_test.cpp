#include "autohist/embedding.hpp"
#include "autohist/providers.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <cmath>
#include <thread>

using namespace autohist;

namespace {

class CountingProvider final : public EmbeddingProvider
{
public:
    explicit CountingProvider(std::size_t batch) : batch_(batch) {}

    std::string identity() const override { return "counting"; }
    std::size_t dimension() const override { return 64; }
    std::size_t batch_size() const override { return batch_; }
    std::vector<EmbeddingVector> embed(std::span<std::string const> texts) override
    {
        ++calls;
        max_batch = std::max(max_batch.load(), texts.size());
        std::vector<EmbeddingVector> out;
        for (auto const & t : texts) {
            out.push_back(StubEmbeddingProvider::embed_one(t));
        }
        return out;
    }

    std::atomic<int> calls{0};
    std::atomic<std::size_t> max_batch{0};

private:
    std::size_t batch_;
};

double norm(EmbeddingVector const & v)
{
    double s = 0;
    for (double c : v.components()) {
        s += c * c;
    }
    return std::sqrt(s);
}

/// Independent re-statement of the stub definition, on ASCII input.
std::vector<double> reference_stub(std::string const & ascii_lower)
{
    std::string padded = "^" + ascii_lower + "$";
    std::vector<double> acc(64, 0.0);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        std::uint64_t h = 14695981039346656037ull;
        for (std::size_t j = i; j < i + 3; ++j) {
            h ^= static_cast<unsigned char>(padded[j]);
            h *= 1099511628211ull;
        }
        acc[h % 64] += (h >> 63) ? -1.0 : 1.0;
    }
    double n = 0;
    for (double c : acc) {
        n += c * c;
    }
    n = std::sqrt(n);
    if (n == 0) {
        acc.assign(64, 0.0);
        acc[0] = 1.0;
        return acc;
    }
    for (double & c : acc) {
        c /= n;
    }
    return acc;
}

}  // namespace

TEST(StubEmbeddingTest, Deterministic)
{
    auto a = StubEmbeddingProvider::embed_one("disease");
    auto b = StubEmbeddingProvider::embed_one("disease");
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.dimension(), 64u);
}

TEST(StubEmbeddingTest, MatchesReferenceDefinition)
{
    for (std::string text : {"disease", "guitar", "a", "covid-19", "x y z"}) {
        auto v = StubEmbeddingProvider::embed_one(text);
        auto ref = reference_stub(text);
        for (std::size_t i = 0; i < 64; ++i) {
            EXPECT_NEAR(v[i], ref[i], 1e-12) << text << " component " << i;
        }
    }
}

TEST(StubEmbeddingTest, EmptyTextIsFirstBasisVector)
{
    EXPECT_EQ(StubEmbeddingProvider::embed_one(""), EmbeddingVector::basis(64, 0));
}

TEST(StubEmbeddingTest, CaseAndNormalizationInsensitive)
{
    EXPECT_EQ(StubEmbeddingProvider::embed_one("Disease"), StubEmbeddingProvider::embed_one("disease"));
    EXPECT_EQ(StubEmbeddingProvider::embed_one("CAFE\xCC\x81"), StubEmbeddingProvider::embed_one("caf\xC3\xA9"));
}

TEST(StubEmbeddingTest, StringSimilarTextsAreCloser)
{
    auto disease = StubEmbeddingProvider::embed_one("disease");
    auto diseases = StubEmbeddingProvider::embed_one("diseases");
    auto guitar = StubEmbeddingProvider::embed_one("guitar");
    EXPECT_GT(cosine_similarity(disease, diseases), cosine_similarity(disease, guitar));
}

TEST(StubEmbeddingTest, UnitNorm)
{
    for (std::string text : {"a", "hello world", "\xE6\x97\xA5\xE6\x9C\xAC", "123"}) {
        EXPECT_NEAR(norm(StubEmbeddingProvider::embed_one(text)), 1.0, 1e-12);
    }
}

TEST(EmbeddingVectorTest, Validation)
{
    EXPECT_THROW(EmbeddingVector::normalized({}), EmbeddingError);
    EXPECT_THROW(EmbeddingVector::normalized({0.0, 0.0}), EmbeddingError);
    EXPECT_THROW(EmbeddingVector::normalized({NAN, 1.0}), EmbeddingError);
    EXPECT_THROW(EmbeddingVector::from_unit({0.5, 0.5}), EmbeddingError);
    auto v = EmbeddingVector::normalized({3.0, 4.0});
    EXPECT_DOUBLE_EQ(v[0], 0.6);
    EXPECT_DOUBLE_EQ(v[1], 0.8);
}

TEST(CosineTest, ReferenceCases)
{
    auto v = EmbeddingVector::normalized({1.0, 2.0, 3.0});
    auto neg = EmbeddingVector::normalized({-1.0, -2.0, -3.0});
    EXPECT_DOUBLE_EQ(cosine_similarity(v, v), 1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity(v, neg), -1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity(EmbeddingVector::basis(3, 0), EmbeddingVector::basis(3, 1)), 0.0);
    EXPECT_THROW(cosine_similarity(v, EmbeddingVector::basis(2, 0)), EmbeddingError);
}

TEST(CentroidTest, ReferenceCases)
{
    auto v = EmbeddingVector::normalized({1.0, 2.0, 3.0});
    std::vector<EmbeddingVector> one{v};
    std::vector<EmbeddingVector> two{v, v};
    EXPECT_NEAR(cosine_similarity(centroid(one), v), 1.0, 1e-15);
    EXPECT_NEAR(cosine_similarity(centroid(two), v), 1.0, 1e-15);
    std::vector<EmbeddingVector> axes{EmbeddingVector::basis(4, 0), EmbeddingVector::basis(4, 1)};
    auto c = centroid(axes);
    EXPECT_NEAR(c[0], 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(c[1], 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(c[2], 0.0);
    EXPECT_THROW(centroid(std::vector<EmbeddingVector>{}), EmbeddingError);
    std::vector<EmbeddingVector> opposite{v, EmbeddingVector::normalized({-1.0, -2.0, -3.0})};
    EXPECT_THROW(centroid(opposite), EmbeddingError);
}

TEST(EmbedBatchTest, EmptyInput)
{
    CountingProvider provider(100);
    EXPECT_TRUE(embed_batch({}, provider, nullptr).empty());
    EXPECT_EQ(provider.calls, 0);
}

TEST(EmbedBatchTest, DuplicatesShareVectors)
{
    CountingProvider provider(100);
    EmbeddingCache cache;
    std::vector<std::string> texts{"a", "b", "a"};
    auto out = embed_batch(texts, provider, &cache);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0], out[2]);
    EXPECT_EQ(cache.size(), 2u);
}

TEST(EmbedBatchTest, ColdCacheCallCountIsCeiling)
{
    CountingProvider provider(100);
    EmbeddingCache cache;
    std::vector<std::string> texts;
    for (int i = 0; i < 2001; ++i) {
        texts.push_back("text " + std::to_string(i));
    }
    auto out = embed_batch(texts, provider, &cache);
    EXPECT_EQ(out.size(), 2001u);
    EXPECT_LE(provider.calls, 21);
    EXPECT_LE(provider.max_batch, 100u);

    // Warm cache: no further calls.
    embed_batch(texts, provider, &cache);
    EXPECT_LE(provider.calls, 21);
}

TEST(EmbedBatchTest, CacheIsTransparent)
{
    CountingProvider provider(3);
    EmbeddingCache cache;
    std::vector<std::string> texts{"Flu", "cancer", "  flu ", "measles", "covid 19"};
    auto cached = embed_batch(texts, provider, &cache);
    auto again = embed_batch(texts, provider, &cache);
    auto uncached = embed_batch(texts, provider, nullptr);
    EXPECT_EQ(cached, again);
    EXPECT_EQ(cached, uncached);
    EXPECT_EQ(cached[0], cached[2]);
    EXPECT_EQ(embed_text("Flu", provider, &cache), cached[0]);
}

TEST(EmbedBatchTest, WrongResultCountIsAnError)
{
    struct Short final : EmbeddingProvider
    {
        std::string identity() const override { return "short"; }
        std::size_t dimension() const override { return 64; }
        std::size_t batch_size() const override { return 10; }
        std::vector<EmbeddingVector> embed(std::span<std::string const>) override { return {}; }
    } provider;
    std::vector<std::string> texts{"a"};
    EXPECT_THROW(embed_batch(texts, provider, nullptr), EmbeddingError);
}

TEST(EmbeddingCacheTest, ConcurrentReadersAndWriters)
{
    EmbeddingCache cache;
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&cache, t] {
            for (int i = 0; i < 200; ++i) {
                auto key = std::to_string(i % 50);
                cache.insert("p", key, StubEmbeddingProvider::embed_one(key));
                auto hit = cache.find("p", std::to_string((i + t) % 50));
                if (hit) {
                    EXPECT_EQ(hit->dimension(), 64u);
                }
            }
        });
    }
    threads.clear();
    EXPECT_EQ(cache.size(), 50u);
}

namespace {

/// Local HTTP server standing in for a remote embedding endpoint.
class MockEndpoint
{
public:
    explicit MockEndpoint(std::function<void(httplib::Request const &, httplib::Response &)> handler)
    {
        server_.Post("/embed", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::jthread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockEndpoint() { server_.stop(); }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/embed"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::jthread thread_;
};

RetryPolicy no_sleep(std::vector<std::chrono::milliseconds> * waits)
{
    RetryPolicy p;
    p.sleep = [waits](std::chrono::milliseconds d) { waits->push_back(d); };
    return p;
}

}  // namespace

TEST(RemoteEmbeddingTest, RoundTrip)
{
    std::atomic<int> hits{0};
    MockEndpoint mock([&](httplib::Request const & req, httplib::Response & res) {
        ++hits;
        auto body = nlohmann::json::parse(req.body);
        EXPECT_EQ(req.get_header_value("Authorization"), "Bearer sekret");
        nlohmann::json out = {{"embeddings", nlohmann::json::array()}};
        for (auto const & t : body.at("texts")) {
            out["embeddings"].push_back({t.get<std::string>().size() + 1.0, 1.0, 0.0});
        }
        res.set_content(out.dump(), "application/json");
    });
    ::setenv("AUTOHIST_TEST_TOKEN", "sekret", 1);
    EmbeddingProviderConfig config{ProviderKind::remote, 3, mock.url(), "AUTOHIST_TEST_TOKEN", 2};
    std::vector<std::chrono::milliseconds> waits;
    RemoteEmbeddingProvider provider(config, no_sleep(&waits));
    EXPECT_EQ(provider.dimension(), 3u);
    std::vector<std::string> texts{"a", "bb", "ccc"};
    auto out = embed_batch(texts, provider, nullptr);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_NEAR(out[0][0], 2.0 / std::sqrt(5.0), 1e-12);
    EXPECT_EQ(hits, 2);
    EXPECT_TRUE(waits.empty());
}

TEST(RemoteEmbeddingTest, RetriesThenSucceeds)
{
    std::atomic<int> hits{0};
    MockEndpoint mock([&](httplib::Request const &, httplib::Response & res) {
        if (++hits < 3) {
            res.status = 503;
            return;
        }
        res.set_content(R"({"embeddings": [[1, 0]]})", "application/json");
    });
    EmbeddingProviderConfig config{ProviderKind::remote, 2, mock.url(), "", 10};
    std::vector<std::chrono::milliseconds> waits;
    RemoteEmbeddingProvider provider(config, no_sleep(&waits));
    std::vector<std::string> texts{"x"};
    auto out = provider.embed(texts);
    EXPECT_EQ(out[0], EmbeddingVector::basis(2, 0));
    EXPECT_EQ(hits, 3);
    EXPECT_EQ(waits, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(500), std::chrono::milliseconds(1000)}));
}

TEST(RemoteEmbeddingTest, GivesUpAfterThreeAttempts)
{
    std::atomic<int> hits{0};
    MockEndpoint mock([&](httplib::Request const &, httplib::Response & res) {
        ++hits;
        res.status = 500;
    });
    EmbeddingProviderConfig config{ProviderKind::remote, 2, mock.url(), "", 10};
    std::vector<std::chrono::milliseconds> waits;
    RemoteEmbeddingProvider provider(config, no_sleep(&waits));
    std::vector<std::string> texts{"x"};
    EXPECT_THROW(provider.embed(texts), ProviderError);
    EXPECT_EQ(hits, 3);
}

TEST(RemoteEmbeddingTest, DimensionMismatchIsAnError)
{
    MockEndpoint mock([](httplib::Request const &, httplib::Response & res) {
        res.set_content(R"({"embeddings": [[1, 0, 0]]})", "application/json");
    });
    EmbeddingProviderConfig config{ProviderKind::remote, 2, mock.url(), "", 10};
    std::vector<std::chrono::milliseconds> waits;
    RemoteEmbeddingProvider provider(config, no_sleep(&waits));
    std::vector<std::string> texts{"x"};
    EXPECT_THROW(provider.embed(texts), EmbeddingError);
}

TEST(EndpointTest, Parse)
{
    auto e = Endpoint::parse("https://api.example.com:8443/v1/embed");
    EXPECT_EQ(e.scheme, "https");
    EXPECT_EQ(e.host, "api.example.com");
    EXPECT_EQ(e.port, 8443);
    EXPECT_EQ(e.path, "/v1/embed");
    EXPECT_EQ(Endpoint::parse("http://localhost").port, 80);
    EXPECT_THROW(Endpoint::parse("ftp://x"), ProviderError);
}
