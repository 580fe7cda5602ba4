#include "mhts/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "mhts/errors.hpp"

namespace mhts {

std::vector<TokenSpan> WhitespaceTokenizer::token_spans(std::string_view text) const {
    std::vector<TokenSpan> spans;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        size_t b = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > b) spans.emplace_back(b, i);
    }
    return spans;
}

int64_t WhitespaceTokenizer::count_tokens(std::string_view text) const {
    int64_t count = 0;
    bool in_token = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_token) ++count;
        in_token = !space;
    }
    return count;
}

BpeVocabTokenizer::BpeVocabTokenizer(const std::string& vocab_path) {
    std::ifstream in(vocab_path, std::ios::binary);
    if (!in) throw UsageError("cannot open tokenizer vocabulary: " + vocab_path);
    trie_.emplace_back();
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        // Escapes for tokens that cannot live on a plain line.
        std::string token;
        token.reserve(line.size());
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '\\' && i + 1 < line.size()) {
                char c = line[++i];
                if (c == 'n') token.push_back('\n');
                else if (c == 't') token.push_back('\t');
                else if (c == 's') token.push_back(' ');
                else token.push_back(c);
            } else {
                token.push_back(line[i]);
            }
        }
        if (token.empty()) continue;
        int32_t node = 0;
        for (unsigned char c : token) {
            // linear scan; children get sorted for binary search after the build
            int32_t next = -1;
            for (const auto& [byte, child] : trie_[static_cast<size_t>(node)].children) {
                if (byte == c) {
                    next = child;
                    break;
                }
            }
            if (next < 0) {
                next = static_cast<int32_t>(trie_.size());
                trie_[static_cast<size_t>(node)].children.emplace_back(c, next);
                trie_.emplace_back();
            }
            node = next;
        }
        if (!trie_[static_cast<size_t>(node)].terminal) {
            trie_[static_cast<size_t>(node)].terminal = true;
            ++vocab_size_;
        }
        max_token_len_ = std::max(max_token_len_, token.size());
    }
    if (vocab_size_ == 0) throw UsageError("empty tokenizer vocabulary: " + vocab_path);
    // sorted child lists make the per-byte lookup a binary search
    for (TrieNode& node : trie_) {
        std::sort(node.children.begin(), node.children.end());
    }
}

int32_t BpeVocabTokenizer::find_child(int32_t node, unsigned char c) const {
    const auto& kids = trie_[static_cast<size_t>(node)].children;
    auto it = std::lower_bound(kids.begin(), kids.end(), std::make_pair(c, int32_t{-1}),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    if (it != kids.end() && it->first == c) return it->second;
    return -1;
}

size_t BpeVocabTokenizer::match_longest(std::string_view text, size_t pos) const {
    int32_t node = 0;
    size_t best = 0;
    size_t limit = std::min(text.size() - pos, max_token_len_);
    for (size_t k = 0; k < limit; ++k) {
        unsigned char c = static_cast<unsigned char>(text[pos + k]);
        node = find_child(node, c);
        if (node < 0) break;
        if (trie_[static_cast<size_t>(node)].terminal) best = k + 1;
    }
    return best;
}

std::vector<TokenSpan> BpeVocabTokenizer::token_spans(std::string_view text) const {
    std::vector<TokenSpan> spans;
    spans.reserve(text.size() / 4 + 1);
    size_t i = 0;
    while (i < text.size()) {
        size_t len = match_longest(text, i);
        if (len == 0) len = 1;  // byte fallback
        spans.emplace_back(i, i + len);
        i += len;
    }
    return spans;
}

int64_t BpeVocabTokenizer::count_tokens(std::string_view text) const {
    int64_t count = 0;
    size_t i = 0;
    while (i < text.size()) {
        size_t len = match_longest(text, i);
        if (len == 0) len = 1;
        ++count;
        i += len;
    }
    return count;
}

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& tokenizer_id,
                                          const std::string& vocab_path) {
    if (tokenizer_id == "whitespace") return std::make_unique<WhitespaceTokenizer>();
    if (tokenizer_id == "bpe") {
        if (vocab_path.empty()) {
            throw UsageError("tokenizer 'bpe' requires a vocabulary path");
        }
        return std::make_unique<BpeVocabTokenizer>(vocab_path);
    }
    throw UsageError("unknown tokenizer id: " + tokenizer_id);
}

}  // namespace mhts
