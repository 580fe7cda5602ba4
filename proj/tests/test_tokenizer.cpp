#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mhts/errors.hpp"
#include "mhts/fsutil.hpp"
#include "mhts/tokenizer.hpp"
#include "support/testutil.hpp"

using namespace mhts;
using mhts::test::TempDir;

namespace {

std::string write_vocab(const TempDir& dir, const std::vector<std::string>& lines) {
    std::string path = dir.str() + "/vocab.txt";
    std::string content;
    for (const auto& l : lines) content += l + "\n";
    write_file_atomic(path, content);
    return path;
}

// Independent greedy matcher: linear scan over the vocabulary at every
// position, longest literal match wins, single byte otherwise.
int64_t oracle_count(const std::vector<std::string>& vocab, const std::string& text) {
    int64_t count = 0;
    size_t i = 0;
    while (i < text.size()) {
        size_t best = 0;
        for (const std::string& token : vocab) {
            if (token.size() > best && text.compare(i, token.size(), token) == 0) {
                best = token.size();
            }
        }
        i += best == 0 ? 1 : best;
        ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("whitespace tokenizer spans and counts agree") {
    WhitespaceTokenizer tok;
    auto spans = tok.token_spans("  alpha\tbeta  gamma ");
    REQUIRE(spans.size() == 3);
    CHECK(spans[0] == TokenSpan{2, 7});
    CHECK(spans[1] == TokenSpan{8, 12});
    CHECK(spans[2] == TokenSpan{14, 19});
    CHECK(tok.count_tokens("  alpha\tbeta  gamma ") == 3);
}

TEST_CASE("bpe tokenizer: longest match with byte fallback") {
    TempDir dir;
    std::vector<std::string> vocab = {" the", "the", " th", "he", "er", "ing", "a", "t", "h",
                                      "e", "r", " ", "."};
    auto tok = make_tokenizer("bpe", write_vocab(dir, vocab));
    // "the" -> ["the"]; " thering" -> [" the", "r", "ing"]
    CHECK(tok->count_tokens("the") == 1);
    CHECK(tok->count_tokens(" thering") == 3);
    auto spans = tok->token_spans(" thering");
    REQUIRE(spans.size() == 3);
    CHECK(spans[0] == TokenSpan{0, 4});
    CHECK(spans[1] == TokenSpan{4, 5});
    CHECK(spans[2] == TokenSpan{5, 8});
}

TEST_CASE("bpe tokenizer matches an independent greedy oracle") {
    TempDir dir;
    std::vector<std::string> vocab = {" and",  "and", " to", "to",  " of", "of", " in",
                                      " str",  "str", "ing", "ed ", "er",  "on", "an",
                                      "th",    "he",  " a",  " b",  " c",  "a",  "b",
                                      "c",     "d",   "e",   " ",   "\\n"};
    auto tok = make_tokenizer("bpe", write_vocab(dir, vocab));
    std::vector<std::string> decoded_vocab = vocab;
    decoded_vocab.back() = "\n";  // the file carried the escape

    std::mt19937_64 rng(77);
    const std::string alphabet = "abcdeto ni\n";
    for (int round = 0; round < 40; ++round) {
        std::string text;
        size_t len = rng() % 120;
        for (size_t i = 0; i < len; ++i) text.push_back(alphabet[rng() % alphabet.size()]);
        CHECK(tok->count_tokens(text) == oracle_count(decoded_vocab, text));
        // spans tile the text exactly
        auto spans = tok->token_spans(text);
        size_t pos = 0;
        for (auto [b, e] : spans) {
            CHECK(b == pos);
            CHECK(e > b);
            pos = e;
        }
        CHECK(pos == text.size());
    }
}

TEST_CASE("bpe vocabulary errors") {
    TempDir dir;
    CHECK_THROWS_AS(make_tokenizer("bpe", dir.str() + "/missing.txt"), UsageError);
    CHECK_THROWS_AS(make_tokenizer("bpe", ""), UsageError);
    write_file_atomic(dir.path() / "empty.txt", "\n\n");
    CHECK_THROWS_AS(make_tokenizer("bpe", dir.str() + "/empty.txt"), UsageError);
}

TEST_CASE("bundled english vocabulary loads and tokenizes prose plausibly") {
    auto tok = make_tokenizer("bpe", mhts::test::repo_dir() + "/data/vocab/english.vocab");
    std::string sentence =
        " It was the best of times, it was the worst of times, it was the age of wisdom.";
    int64_t n = tok->count_tokens(sentence);
    // GPT-style tokenizers land near 4-5 chars per token on English prose
    CHECK(n >= 12);
    CHECK(n <= 40);
    // determinism
    CHECK(tok->count_tokens(sentence) == n);
}
