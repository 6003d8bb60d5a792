#include "autohist/corpus.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace autohist;
using autohist::testing::TempDir;

TEST(CorpusTest, TxtLinesSkipsBlankLines)
{
    TempDir dir;
    auto path = dir.write("c.txt", "first example\n   \nsecond example\n");
    auto corpus = load_corpus(path, CorpusFormat::txt_lines);
    ASSERT_EQ(corpus.size(), 2u);
    EXPECT_EQ(corpus.at(0).id, 0u);
    EXPECT_EQ(corpus.at(1).id, 1u);
    EXPECT_EQ(corpus.at(1).text, "second example");
}

TEST(CorpusTest, TextIsPreservedByteExact)
{
    TempDir dir;
    auto path = dir.write("c.txt", "  Caf\xC3\xA9  with  spaces\t\r\nnext\n");
    auto corpus = load_corpus(path, CorpusFormat::txt_lines);
    EXPECT_EQ(corpus.at(0).text, "  Caf\xC3\xA9  with  spaces\t");
}

TEST(CorpusTest, IdenticalFileGivesIdenticalDigest)
{
    TempDir dir;
    auto path = dir.write("c.jsonl", "{\"text\": \"a\"}\n{\"text\": \"b\"}\n");
    auto first = load_corpus(path, CorpusFormat::jsonl);
    auto second = load_corpus(path, CorpusFormat::jsonl);
    EXPECT_EQ(first.source_digest(), second.source_digest());
    EXPECT_EQ(first.source_digest().size(), 64u);
    EXPECT_TRUE(std::equal(
        first.examples().begin(), first.examples().end(), second.examples().begin(), second.examples().end()));
}

TEST(CorpusTest, DigestIsFormatIndependent)
{
    TempDir dir;
    auto a = load_corpus(dir.write("c.jsonl", "{\"text\": \"alpha\"}\n{\"text\": \"beta\"}\n"), CorpusFormat::jsonl);
    auto b = load_corpus(dir.write("c.txt", "alpha\nbeta\n"), CorpusFormat::txt_lines);
    auto c = load_corpus(dir.write("c.csv", "id,text\n1,alpha\n2,beta\n"), CorpusFormat::csv);
    EXPECT_EQ(a.source_digest(), b.source_digest());
    EXPECT_EQ(a.source_digest(), c.source_digest());
}

TEST(CorpusTest, DigestIsOrderAndContentSensitive)
{
    auto base = compute_source_digest(std::vector<std::string>{"a", "b"});
    EXPECT_NE(base, compute_source_digest(std::vector<std::string>{"b", "a"}));
    EXPECT_NE(base, compute_source_digest(std::vector<std::string>{"a", "c"}));
    // Length prefixes keep concatenation boundaries distinct.
    EXPECT_NE(
        compute_source_digest(std::vector<std::string>{"ab", "c"}),
        compute_source_digest(std::vector<std::string>{"a", "bc"}));
}

TEST(CorpusTest, JsonlMissingTextNamesTheLine)
{
    TempDir dir;
    auto path = dir.write("c.jsonl", "{\"text\": \"ok\"}\n\n{\"body\": \"nope\"}\n");
    try {
        load_corpus(path, CorpusFormat::jsonl);
        FAIL() << "expected CorpusError";
    } catch (CorpusError const & e) {
        std::string const what = e.what();
        EXPECT_NE(what.find(":3:"), std::string::npos) << what;
        EXPECT_NE(what.find("\"text\""), std::string::npos) << what;
    }
}

TEST(CorpusTest, JsonlRejectsInvalidJson)
{
    TempDir dir;
    auto path = dir.write("c.jsonl", "{\"text\": \"ok\"}\n{not json\n");
    EXPECT_THROW(load_corpus(path, CorpusFormat::jsonl), CorpusError);
}

TEST(CorpusTest, JsonlSkipsWhitespaceOnlyText)
{
    TempDir dir;
    auto path = dir.write("c.jsonl", "{\"text\": \"  \"}\n{\"text\": \"real\"}\n");
    auto corpus = load_corpus(path, CorpusFormat::jsonl);
    ASSERT_EQ(corpus.size(), 1u);
    EXPECT_EQ(corpus.at(0).text, "real");
}

TEST(CorpusTest, CsvHandlesQuotesAndEmbeddedNewlines)
{
    TempDir dir;
    auto path = dir.write("c.csv", "label,text\nx,\"hello, \"\"world\"\"\"\ny,\"two\nlines\"\nz,plain\n");
    auto corpus = load_corpus(path, CorpusFormat::csv);
    ASSERT_EQ(corpus.size(), 3u);
    EXPECT_EQ(corpus.at(0).text, "hello, \"world\"");
    EXPECT_EQ(corpus.at(1).text, "two\nlines");
    EXPECT_EQ(corpus.at(2).text, "plain");
}

TEST(CorpusTest, CsvErrors)
{
    TempDir dir;
    EXPECT_THROW(load_corpus(dir.write("a.csv", "label,body\nx,y\n"), CorpusFormat::csv), CorpusError);
    try {
        load_corpus(dir.write("b.csv", "label,text\nx,ok\ny\n"), CorpusFormat::csv);
        FAIL() << "expected CorpusError";
    } catch (CorpusError const & e) {
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_corpus(dir.write("c.csv", "text\n\"unterminated\n"), CorpusFormat::csv), CorpusError);
}

TEST(CorpusTest, ZeroUsableExamplesIsAnError)
{
    TempDir dir;
    EXPECT_THROW(load_corpus(dir.write("c.txt", "\n  \n\t\n"), CorpusFormat::txt_lines), CorpusError);
}

TEST(CorpusTest, UnreadableFileIsAnError)
{
    EXPECT_THROW(load_corpus("/nonexistent/corpus.txt", CorpusFormat::txt_lines), CorpusError);
}

TEST(CorpusTest, MaxExamplesIsEnforced)
{
    TempDir dir;
    auto path = dir.write("c.txt", "a\nb\nc\n");
    EXPECT_THROW(load_corpus(path, CorpusFormat::txt_lines, 2), CorpusError);
    EXPECT_EQ(load_corpus(path, CorpusFormat::txt_lines, 3).size(), 3u);
}

TEST(CorpusTest, GetExamples)
{
    auto corpus = autohist::testing::corpus_of({"zero", "one"});
    EXPECT_TRUE(corpus.get_examples(std::vector<std::size_t>{}).empty());
    auto out = corpus.get_examples(std::vector<std::size_t>{1, 0});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].text, "one");
    EXPECT_EQ(out[1].text, "zero");
    EXPECT_THROW(corpus.get_examples(std::vector<std::size_t>{2}), std::out_of_range);
}

TEST(CorpusTest, FormatNames)
{
    EXPECT_EQ(parse_corpus_format("jsonl"), CorpusFormat::jsonl);
    EXPECT_EQ(parse_corpus_format("csv"), CorpusFormat::csv);
    EXPECT_EQ(parse_corpus_format("txt-lines"), CorpusFormat::txt_lines);
    EXPECT_FALSE(parse_corpus_format("pdf"));
    EXPECT_EQ(infer_corpus_format("x/data.jsonl"), CorpusFormat::jsonl);
    EXPECT_EQ(infer_corpus_format("x/data.csv"), CorpusFormat::csv);
    EXPECT_EQ(infer_corpus_format("x/data.txt"), CorpusFormat::txt_lines);
}
