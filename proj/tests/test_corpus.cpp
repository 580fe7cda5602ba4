#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include "mhts/corpus.hpp"
#include "mhts/errors.hpp"
#include "mhts/fsutil.hpp"
#include "mhts/text.hpp"
#include "support/testutil.hpp"

using namespace mhts;
using mhts::test::TempDir;

namespace {

Paragraph make_paragraph(int index, int words, const std::string& stem = "w") {
    Paragraph p;
    p.index = index;
    for (int i = 0; i < words; ++i) {
        if (i) p.text += ' ';
        p.text += stem + std::to_string(i);
    }
    p.token_count = words;
    return p;
}

}  // namespace

TEST_CASE("load_document rejects missing, empty and binary files") {
    TempDir dir;
    CHECK_THROWS_AS(load_document(dir.str() + "/nope.txt"), UsageError);

    write_file_atomic(dir.path() / "empty.txt", "   \n  \n");
    CHECK_THROWS_WITH_AS(load_document(dir.str() + "/empty.txt"),
                         doctest::Contains("empty document"), UsageError);

    std::string binary = "abc";
    binary.push_back('\0');
    binary += "def";
    write_file_atomic(dir.path() / "blob.bin", binary);
    CHECK_THROWS_WITH_AS(load_document(dir.str() + "/blob.bin"),
                         doctest::Contains("non-text"), UsageError);
}

TEST_CASE("load_document normalizes line endings and derives id") {
    TempDir dir;
    write_file_atomic(dir.path() / "novel.txt", "a\r\nb\rc");
    Document doc = load_document(dir.str() + "/novel.txt");
    CHECK(doc.text == "a\nb\nc");
    CHECK(doc.id == "novel");
}

TEST_CASE("split_paragraphs: blank-line boundaries, runs collapse") {
    WhitespaceTokenizer tok;
    Document doc;
    doc.text = "p1 one\n\np2 two";
    auto paragraphs = split_paragraphs(doc, tok);
    REQUIRE(paragraphs.size() == 2);
    CHECK(paragraphs[0].index == 0);
    CHECK(paragraphs[0].text == "p1 one");
    CHECK(paragraphs[0].token_count == 2);
    CHECK(paragraphs[1].text == "p2 two");

    doc.text = "p1\n\n\n\np2";
    CHECK(split_paragraphs(doc, tok).size() == 2);

    doc.text = "p1\n  \t \np2";  // whitespace-only line is blank
    CHECK(split_paragraphs(doc, tok).size() == 2);
}

TEST_CASE("split_paragraphs agrees with an independent splitter on the toy corpus") {
    Document doc = load_document(mhts::test::repo_dir() + "/data/toy/corpus.txt");
    WhitespaceTokenizer tok;
    auto paragraphs = split_paragraphs(doc, tok);

    // oracle: split on blank lines with a dumb state machine over lines
    std::vector<std::string> oracle;
    {
        std::string cur;
        std::istringstream in(doc.text);
        std::string line;
        auto blank = [](const std::string& l) {
            return l.find_first_not_of(" \t") == std::string::npos;
        };
        while (std::getline(in, line)) {
            if (blank(line)) {
                if (!cur.empty()) oracle.push_back(cur), cur.clear();
            } else {
                if (!cur.empty()) cur += "\n";
                cur += line;
            }
        }
        if (!cur.empty()) oracle.push_back(cur);
    }
    REQUIRE(paragraphs.size() == oracle.size());
    for (size_t i = 0; i < oracle.size(); ++i) CHECK(paragraphs[i].text == trim(oracle[i]));
}

TEST_CASE("count_tokens basics and unknown tokenizer id") {
    WhitespaceTokenizer tok;
    CHECK(tok.count_tokens("") == 0);
    CHECK(tok.count_tokens("a b c") == 3);
    CHECK(tok.count_tokens("  a\t b \n") == 2);
    CHECK_THROWS_WITH_AS(make_tokenizer("sentencepiece"), doctest::Contains("unknown tokenizer"),
                         UsageError);
}

TEST_CASE("pack_chunks greedy rule") {
    WhitespaceTokenizer tok;
    std::vector<Paragraph> paragraphs{make_paragraph(0, 600, "a"), make_paragraph(1, 300, "b"),
                                      make_paragraph(2, 200, "c")};
    auto chunks = pack_chunks(paragraphs, tok, 1024);
    REQUIRE(chunks.size() == 2);
    // whitespace tokenizer: "\n\n" joins contribute no tokens
    CHECK(chunks[0].token_count == 900);
    CHECK(chunks[0].para_begin == 0);
    CHECK(chunks[0].para_end == 1);
    CHECK(chunks[1].token_count == 200);
    CHECK(chunks[1].para_begin == 2);
    CHECK(chunks[1].para_end == 2);
    CHECK_FALSE(chunks[0].forced_split);
    CHECK(chunks[0].index == 0);
    CHECK(chunks[1].index == 1);
}

TEST_CASE("pack_chunks hard-splits an oversize paragraph") {
    WhitespaceTokenizer tok;
    std::vector<Paragraph> paragraphs{make_paragraph(0, 2100)};
    auto chunks = pack_chunks(paragraphs, tok, 1024);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].token_count == 1024);
    CHECK(chunks[1].token_count == 1024);
    CHECK(chunks[2].token_count == 52);
    for (const Chunk& c : chunks) {
        CHECK(c.forced_split);
        CHECK(c.para_begin == 0);
        CHECK(c.para_end == 0);
    }
    CHECK(reconstruct_text(chunks) == paragraphs[0].text);
}

TEST_CASE("pack_chunks rejects max_tokens < 1") {
    WhitespaceTokenizer tok;
    std::vector<Paragraph> paragraphs{make_paragraph(0, 3)};
    CHECK_THROWS_AS(pack_chunks(paragraphs, tok, 0), UsageError);
}

TEST_CASE("pack_chunks properties on random corpora") {
    WhitespaceTokenizer tok;
    std::mt19937_64 rng(20240811);
    for (int round = 0; round < 25; ++round) {
        int n_paragraphs = 1 + static_cast<int>(rng() % 30);
        int64_t max_tokens = 8 + static_cast<int64_t>(rng() % 40);
        std::vector<Paragraph> paragraphs;
        bool any_oversize = false;
        for (int i = 0; i < n_paragraphs; ++i) {
            int words = 1 + static_cast<int>(rng() % 60);
            if (words > max_tokens) any_oversize = true;
            paragraphs.push_back(make_paragraph(i, words, "p" + std::to_string(i) + "w"));
        }
        auto chunks = pack_chunks(paragraphs, tok, max_tokens);

        // lossless coverage
        std::string joined;
        for (size_t i = 0; i < paragraphs.size(); ++i) {
            if (i) joined += kParagraphDelimiter;
            joined += paragraphs[i].text;
        }
        CHECK(reconstruct_text(chunks) == joined);

        // bound + recorded counts honest
        for (const Chunk& c : chunks) {
            CHECK(c.token_count == tok.count_tokens(c.text));
            if (!c.forced_split) CHECK(c.token_count <= max_tokens);
        }

        // greedy maximality (skip pairs that touch forced splits)
        if (!any_oversize) {
            for (size_t i = 0; i + 1 < chunks.size(); ++i) {
                int64_t first_para_tokens =
                    paragraphs[static_cast<size_t>(chunks[i + 1].para_begin)].token_count;
                CHECK(chunks[i].token_count + first_para_tokens > max_tokens);
            }
        }

        // determinism
        auto again = pack_chunks(paragraphs, tok, max_tokens);
        REQUIRE(again.size() == chunks.size());
        for (size_t i = 0; i < chunks.size(); ++i) CHECK(again[i].text == chunks[i].text);
    }
}

TEST_CASE("chunking a 2 MB corpus with the bundled bpe vocabulary stays fast and lossless") {
    auto tokenizer = make_tokenizer("bpe", mhts::test::repo_dir() + "/data/vocab/english.vocab");
    // deterministic pseudo-prose built from a rotating word pool
    static const char* kPool[] = {"the",     "morning",  "tide",   "carried", "every",
                                  "fisherman", "toward", "harbour", "while",  "church",
                                  "bells",   "answered", "from",   "distant", "cliffs",
                                  "and",     "nobody",   "spoke",  "of",      "storms"};
    std::string text;
    text.reserve(2'200'000);
    uint64_t state = 99;
    int words_in_sentence = 0, sentences_in_paragraph = 0;
    while (text.size() < 2'000'000) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        text += kPool[(state >> 33) % 20];
        if (++words_in_sentence >= 12 + int((state >> 21) % 10)) {
            text += '.';
            words_in_sentence = 0;
            if (++sentences_in_paragraph >= 5 + int((state >> 13) % 4)) {
                text += "\n\n";
                sentences_in_paragraph = 0;
                continue;
            }
        }
        text += ' ';
    }

    auto start = std::chrono::steady_clock::now();
    Document doc;
    doc.text = text;
    auto paragraphs = split_paragraphs(doc, *tokenizer);
    auto chunks = pack_chunks(paragraphs, *tokenizer, 1024);
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    CHECK(chunks.size() > 100);
    for (const Chunk& c : chunks) {
        if (!c.forced_split) CHECK(c.token_count <= 1024);
    }
    std::string joined;
    for (size_t i = 0; i < paragraphs.size(); ++i) {
        if (i) joined += kParagraphDelimiter;
        joined += paragraphs[i].text;
    }
    CHECK(reconstruct_text(chunks) == joined);
    CHECK(elapsed < 30.0);
}

TEST_CASE("chunk json round-trip") {
    Chunk c;
    c.index = 7;
    c.text = "some text";
    c.token_count = 2;
    c.para_begin = 3;
    c.para_end = 5;
    c.forced_split = true;
    Chunk back = chunk_from_json(chunk_to_json(c));
    CHECK(back.index == c.index);
    CHECK(back.text == c.text);
    CHECK(back.token_count == c.token_count);
    CHECK(back.para_begin == c.para_begin);
    CHECK(back.para_end == c.para_end);
    CHECK(back.forced_split == c.forced_split);
}
