#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mhts {

// CRLF and lone CR become LF.
std::string normalize_newlines(std::string_view text);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Collapses every whitespace run to a single space and trims; used for
// fuzzy text comparisons, never for stored artifacts.
std::string collapse_whitespace(std::string_view s);

// Splits on runs of one-or-more blank lines. A line consisting only of
// whitespace counts as blank. Empty paragraphs are dropped.
std::vector<std::string> split_blank_line_paragraphs(std::string_view text);

// Naive sentence splitter: breaks after '.', '!' or '?' followed by
// whitespace or end of text. Good enough for prompt scaffolding and the
// scripted provider; not a linguistic tool.
std::vector<std::string> split_sentences(std::string_view text);

std::vector<std::string> split_words(std::string_view text);

bool is_valid_utf8(std::string_view text);

// First whitespace-delimited word, lowercased, letters only.
std::string first_word_lower(std::string_view text);

}  // namespace mhts
