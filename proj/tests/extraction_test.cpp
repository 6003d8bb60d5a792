#include "autohist/extraction.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

using namespace autohist;
using autohist::testing::corpus_of;

namespace {

std::vector<TokenKind> kinds(std::vector<Token> const & tokens)
{
    std::vector<TokenKind> out;
    for (auto const & t : tokens) {
        out.push_back(t.kind);
    }
    return out;
}

}  // namespace

TEST(TokenizeTest, HyphenatedWordAndPunctuation)
{
    auto tokens = tokenize("Covid-19 spreads fast.");
    std::vector<Token> expected{
        {"covid-19", TokenKind::word}, {"spreads", TokenKind::word}, {"fast", TokenKind::word}};
    EXPECT_EQ(tokens, expected);
}

TEST(TokenizeTest, Empty) { EXPECT_TRUE(tokenize("").empty()); }

TEST(TokenizeTest, NumberKinds)
{
    EXPECT_EQ(
        kinds(tokenize("I took 2 pills")),
        (std::vector<TokenKind>{TokenKind::word, TokenKind::word, TokenKind::number, TokenKind::word}));
}

TEST(TokenizeTest, DecimalsAndApostrophes)
{
    auto tokens = tokenize("Take 2.5 mg, don't skip. End.");
    ASSERT_GE(tokens.size(), 4u);
    EXPECT_EQ(tokens[1], (Token{"2.5", TokenKind::number}));
    EXPECT_EQ(tokens[3].surface, "don't");
    EXPECT_EQ(tokens.back().surface, "end");
}

TEST(TokenizeTest, SurfacesAreNormalized)
{
    // Decomposed e + combining acute composes to U+00E9 under NFC.
    auto tokens = tokenize("CAFE\xCC\x81");
    ASSERT_EQ(tokens.size(), 1u);
    EXPECT_EQ(tokens[0].surface, "caf\xC3\xA9");
}

TEST(TokenizeTest, TrailingJoinersAreSeparators)
{
    auto tokens = tokenize("well- -known 'quoted'");
    std::vector<std::string> surfaces;
    for (auto const & t : tokens) {
        surfaces.push_back(t.surface);
    }
    EXPECT_EQ(surfaces, (std::vector<std::string>{"well", "known", "quoted"}));
}

TEST(NumberSurfaceTest, Grammar)
{
    EXPECT_TRUE(is_number_surface("2"));
    EXPECT_TRUE(is_number_surface("2.50"));
    EXPECT_FALSE(is_number_surface("2."));
    EXPECT_FALSE(is_number_surface(".5"));
    EXPECT_FALSE(is_number_surface("1.2.3"));
    EXPECT_FALSE(is_number_surface("19a"));
    EXPECT_FALSE(is_number_surface(""));
}

TEST(ClassifyPosTest, ReferenceExamples)
{
    std::vector<Token> tokens{{"2", TokenKind::number}, {"the", TokenKind::word}, {"cancer", TokenKind::word}};
    EXPECT_EQ(classify_pos(tokens), (std::vector<PosTag>{PosTag::number, PosTag::other, PosTag::noun}));
}

TEST(ClassifyPosTest, OutputLengthMatchesInput)
{
    auto tokens = tokenize("The patients were running quickly to the 3 hospitals");
    EXPECT_EQ(classify_pos(tokens).size(), tokens.size());
}

TEST(ClassifyPosTest, SuffixRulesAndWhitelist)
{
    auto const & tagger = default_tagger();
    EXPECT_EQ(tagger.tag_word("running"), PosTag::other);
    EXPECT_EQ(tagger.tag_word("quickly"), PosTag::other);
    EXPECT_EQ(tagger.tag_word("worked"), PosTag::other);
    EXPECT_EQ(tagger.tag_word("morning"), PosTag::noun);
    // Stem shorter than three code points keeps the word a noun.
    EXPECT_EQ(tagger.tag_word("bed"), PosTag::noun);
}

TEST(ClassifyPosTest, PluggableTagger)
{
    RuleTagger tagger({"cancer"}, {}, {});
    std::vector<Token> tokens{{"cancer", TokenKind::word}, {"flu", TokenKind::word}};
    EXPECT_EQ(classify_pos(tokens, tagger), (std::vector<PosTag>{PosTag::other, PosTag::noun}));
}

TEST(ExtractEntitiesTest, HandCountedExample)
{
    auto corpus = corpus_of({"cancer cancer", "cancer flu"});
    auto table = extract_entities(corpus);
    ASSERT_EQ(table.size(), 2u);
    EXPECT_EQ(table.k_cap(), 2000u);
    auto const * cancer = table.find("cancer");
    auto const * flu = table.find("flu");
    ASSERT_NE(cancer, nullptr);
    ASSERT_NE(flu, nullptr);
    EXPECT_EQ(cancer->id, 0u);
    EXPECT_EQ(cancer->frequency, 3u);
    EXPECT_EQ(cancer->postings, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(flu->frequency, 1u);
    EXPECT_EQ(flu->postings, (std::vector<std::size_t>{1}));
}

TEST(ExtractEntitiesTest, CapKeepsMostFrequent)
{
    auto corpus = corpus_of({"cancer cancer", "cancer flu"});
    auto table = extract_entities(corpus, {.k_cap = 1});
    ASSERT_EQ(table.size(), 1u);
    EXPECT_EQ(table.at(0).text(), "cancer");
}

TEST(ExtractEntitiesTest, DropsStopwordsAndKeepsNumbers)
{
    auto corpus = corpus_of({"the patient took 2 pills", "the patient"});
    auto table = extract_entities(corpus);
    EXPECT_EQ(table.find("the"), nullptr);
    EXPECT_NE(table.find("2"), nullptr);
    EXPECT_EQ(table.at(0).text(), "patient");
}

TEST(ExtractEntitiesTest, ZeroEntitiesIsAnError)
{
    auto corpus = corpus_of({"the and of", "was were"});
    EXPECT_THROW(extract_entities(corpus), ExtractionError);
}

TEST(ExtractEntitiesTest, ParallelMatchesSequential)
{
    std::vector<std::string> texts;
    std::mt19937 rng(7);
    std::vector<std::string> vocab{"apple", "pear", "plum", "fig", "kiwi", "lime", "date", "melon", "42", "7"};
    for (int i = 0; i < 300; ++i) {
        std::string t;
        for (int w = 0; w < 6; ++w) {
            t += vocab[rng() % vocab.size()] + " ";
        }
        texts.push_back(t);
    }
    auto corpus = corpus_of(texts);
    auto one = extract_entities(corpus, {.jobs = 1});
    auto many = extract_entities(corpus, {.jobs = 8});
    EXPECT_EQ(one, many);
}

TEST(EntityTableTest, RejectsBadOrdering)
{
    std::vector<Entity> entities{{0, {"a"}, 1, {0}}, {1, {"b"}, 2, {0, 1}}};
    EXPECT_THROW(EntityTable(entities, 10), std::invalid_argument);
}

TEST(EntityTableTest, RejectsTooManyEntities)
{
    std::vector<Entity> entities{{0, {"a"}, 2, {0}}, {1, {"b"}, 1, {0}}};
    EXPECT_THROW(EntityTable(entities, 1), std::invalid_argument);
}

// Property: on random corpora every entity's frequency and postings equal a
// brute-force scan, and everything left out is no more frequent than the
// last kept entity.
TEST(ExtractEntitiesProperty, MatchesBruteForce)
{
    std::mt19937 rng(20231);
    std::vector<std::string> vocab{"heart", "lung", "kidney", "the", "and", "running", "12", "3.5", "liver",
                                   "brain", "is", "quickly", "bone", "skin", "x"};
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<std::string> texts;
        int const n = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            std::string t;
            int const len = 1 + static_cast<int>(rng() % 8);
            for (int w = 0; w < len; ++w) {
                t += vocab[rng() % vocab.size()];
                t += (rng() % 4 == 0) ? ", " : " ";
            }
            texts.push_back(t);
        }
        auto corpus = corpus_of(texts);
        std::size_t const cap = 1 + rng() % 10;
        EntityTable table;
        try {
            table = extract_entities(corpus, {.k_cap = cap});
        } catch (ExtractionError const &) {
            continue;
        }
        ASSERT_LE(table.size(), cap);

        std::map<std::string, std::size_t> all;
        for (auto const & ex : corpus.examples()) {
            auto tokens = tokenize(ex.text);
            auto tags = classify_pos(tokens);
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                bool keep = tags[i] == PosTag::number
                    || (tags[i] == PosTag::noun && tokens[i].surface.size() >= 2);
                if (keep) {
                    ++all[tokens[i].surface];
                }
            }
        }
        ASSERT_EQ(table.size(), std::min(cap, all.size()));
        for (auto const & e : table.entities()) {
            EXPECT_EQ(e.frequency, all.at(e.text()));
            EXPECT_EQ(e.postings, autohist::testing::brute_force_postings(corpus, e.surface));
        }
        std::size_t const floor = table.entities().back().frequency;
        for (auto const & [surface, freq] : all) {
            if (table.find(surface) == nullptr) {
                EXPECT_LE(freq, floor);
            }
        }
    }
}
