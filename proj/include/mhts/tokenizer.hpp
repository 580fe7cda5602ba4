#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <string>
#include <string_view>
#include <vector>

namespace mhts {

// Byte offsets [begin, end) of each token in the input.
using TokenSpan = std::pair<size_t, size_t>;

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::string id() const = 0;
    virtual std::vector<TokenSpan> token_spans(std::string_view text) const = 0;
    virtual int64_t count_tokens(std::string_view text) const {
        return static_cast<int64_t>(token_spans(text).size());
    }
};

// Maximal runs of non-whitespace bytes. Deterministic and vocabulary-free;
// the tokenizer the test suite leans on.
class WhitespaceTokenizer : public Tokenizer {
public:
    std::string id() const override { return "whitespace"; }
    std::vector<TokenSpan> token_spans(std::string_view text) const override;
    int64_t count_tokens(std::string_view text) const override;
};

// Greedy longest-match over a subword vocabulary file (one token per line,
// leading spaces significant), with single-byte fallback for anything the
// vocabulary misses. Consumes GPT-style vocabularies where frequent words
// carry their leading space.
class BpeVocabTokenizer : public Tokenizer {
public:
    explicit BpeVocabTokenizer(const std::string& vocab_path);
    std::string id() const override { return "bpe"; }
    std::vector<TokenSpan> token_spans(std::string_view text) const override;
    int64_t count_tokens(std::string_view text) const override;
    size_t vocab_size() const { return vocab_size_; }

private:
    struct TrieNode {
        std::vector<std::pair<unsigned char, int32_t>> children;  // sorted by byte
        bool terminal = false;
    };
    int32_t find_child(int32_t node, unsigned char c) const;
    size_t match_longest(std::string_view text, size_t pos) const;

    std::vector<TrieNode> trie_;
    size_t vocab_size_ = 0;
    size_t max_token_len_ = 0;
};

// Known ids: "whitespace", "bpe" (requires vocab_path). Anything else
// throws UsageError("unknown tokenizer id: ...").
std::unique_ptr<Tokenizer> make_tokenizer(const std::string& tokenizer_id,
                                          const std::string& vocab_path = "");

}  // namespace mhts
