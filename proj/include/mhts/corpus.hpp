#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhts/tokenizer.hpp"

namespace mhts {

struct Document {
    std::string id;
    std::string text;  // newline-normalized
    std::string source_path;
};

struct Paragraph {
    int index = 0;
    std::string text;
    int64_t token_count = 0;
};

struct Chunk {
    int index = 0;
    std::string text;
    int64_t token_count = 0;
    int para_begin = 0;  // inclusive
    int para_end = 0;    // inclusive
    bool forced_split = false;
};

// Reads a UTF-8 plaintext file, normalizes line endings, derives the id
// from the filename stem. Rejects empty and non-text content.
Document load_document(const std::string& path);

std::vector<Paragraph> split_paragraphs(const Document& doc, const Tokenizer& tokenizer);

// Greedy paragraph packing: a paragraph joins the open chunk when the
// joined text still fits max_tokens, otherwise a new chunk starts. A lone
// paragraph over the budget is hard-split at token boundaries into chunks
// flagged forced_split.
std::vector<Chunk> pack_chunks(std::span<const Paragraph> paragraphs, const Tokenizer& tokenizer,
                               int64_t max_tokens);

// Inverse of packing: paragraphs joined by the blank-line delimiter.
// Forced-split pieces of one paragraph are concatenated without it.
std::string reconstruct_text(std::span<const Chunk> chunks);

nlohmann::json chunk_to_json(const Chunk& chunk);
Chunk chunk_from_json(const nlohmann::json& j);

inline constexpr const char* kParagraphDelimiter = "\n\n";

}  // namespace mhts
