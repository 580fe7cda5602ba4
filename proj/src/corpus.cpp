#include "mhts/corpus.hpp"

#include <filesystem>

#include "mhts/errors.hpp"
#include "mhts/fsutil.hpp"
#include "mhts/text.hpp"

namespace mhts {

Document load_document(const std::string& path) {
    if (!std::filesystem::exists(path)) throw UsageError("missing file: " + path);
    std::string raw = read_file(path);
    if (!is_valid_utf8(raw)) throw UsageError("non-text content: " + path);
    Document doc;
    doc.text = normalize_newlines(raw);
    if (trim(doc.text).empty()) throw UsageError("empty document: " + path);
    doc.source_path = path;
    doc.id = std::filesystem::path(path).stem().string();
    return doc;
}

std::vector<Paragraph> split_paragraphs(const Document& doc, const Tokenizer& tokenizer) {
    std::vector<Paragraph> out;
    std::vector<std::string> parts = split_blank_line_paragraphs(doc.text);
    out.reserve(parts.size());
    for (size_t i = 0; i < parts.size(); ++i) {
        Paragraph p;
        p.index = static_cast<int>(i);
        p.text = std::move(parts[i]);
        p.token_count = tokenizer.count_tokens(p.text);
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

// Splits one oversize paragraph at token-start boundaries so that the
// concatenation of the pieces is byte-identical to the paragraph.
std::vector<Chunk> hard_split_paragraph(const Paragraph& para, const Tokenizer& tokenizer,
                                        int64_t max_tokens) {
    std::vector<TokenSpan> spans = tokenizer.token_spans(para.text);
    std::vector<size_t> cuts;
    cuts.push_back(0);
    for (size_t t = static_cast<size_t>(max_tokens); t < spans.size();
         t += static_cast<size_t>(max_tokens)) {
        cuts.push_back(spans[t].first);
    }
    cuts.push_back(para.text.size());

    std::vector<Chunk> pieces;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        Chunk c;
        c.text = para.text.substr(cuts[i], cuts[i + 1] - cuts[i]);
        c.token_count = tokenizer.count_tokens(c.text);
        c.para_begin = para.index;
        c.para_end = para.index;
        c.forced_split = true;
        pieces.push_back(std::move(c));
    }
    return pieces;
}

}  // namespace

std::vector<Chunk> pack_chunks(std::span<const Paragraph> paragraphs, const Tokenizer& tokenizer,
                               int64_t max_tokens) {
    if (max_tokens < 1) throw UsageError("max_tokens must be >= 1");

    std::vector<Chunk> chunks;
    Chunk open;
    bool has_open = false;

    auto flush = [&]() {
        if (has_open) {
            chunks.push_back(std::move(open));
            open = Chunk{};
            has_open = false;
        }
    };

    for (const Paragraph& para : paragraphs) {
        if (!has_open && para.token_count > max_tokens) {
            for (Chunk& piece : hard_split_paragraph(para, tokenizer, max_tokens)) {
                chunks.push_back(std::move(piece));
            }
            continue;
        }
        if (!has_open) {
            open.text = para.text;
            open.token_count = tokenizer.count_tokens(open.text);
            open.para_begin = para.index;
            open.para_end = para.index;
            has_open = true;
            continue;
        }
        std::string joined = open.text + kParagraphDelimiter + para.text;
        int64_t joined_count = tokenizer.count_tokens(joined);
        if (joined_count <= max_tokens) {
            open.text = std::move(joined);
            open.token_count = joined_count;
            open.para_end = para.index;
        } else {
            flush();
            if (para.token_count > max_tokens) {
                for (Chunk& piece : hard_split_paragraph(para, tokenizer, max_tokens)) {
                    chunks.push_back(std::move(piece));
                }
            } else {
                open.text = para.text;
                open.token_count = tokenizer.count_tokens(open.text);
                open.para_begin = para.index;
                open.para_end = para.index;
                has_open = true;
            }
        }
    }
    flush();

    for (size_t i = 0; i < chunks.size(); ++i) chunks[i].index = static_cast<int>(i);
    return chunks;
}

std::string reconstruct_text(std::span<const Chunk> chunks) {
    std::string out;
    for (size_t i = 0; i < chunks.size(); ++i) {
        if (i > 0) {
            const Chunk& prev = chunks[i - 1];
            const Chunk& cur = chunks[i];
            bool same_forced_paragraph = prev.forced_split && cur.forced_split &&
                                         prev.para_begin == cur.para_begin &&
                                         prev.para_end == cur.para_end;
            if (!same_forced_paragraph) out += kParagraphDelimiter;
        }
        out += chunks[i].text;
    }
    return out;
}

nlohmann::json chunk_to_json(const Chunk& chunk) {
    return nlohmann::json{{"index", chunk.index},
                          {"text", chunk.text},
                          {"token_count", chunk.token_count},
                          {"paragraph_span", {chunk.para_begin, chunk.para_end}},
                          {"forced_split", chunk.forced_split}};
}

Chunk chunk_from_json(const nlohmann::json& j) {
    Chunk c;
    c.index = j.at("index").get<int>();
    c.text = j.at("text").get<std::string>();
    c.token_count = j.at("token_count").get<int64_t>();
    c.para_begin = j.at("paragraph_span").at(0).get<int>();
    c.para_end = j.at("paragraph_span").at(1).get<int>();
    c.forced_split = j.value("forced_split", false);
    return c;
}

}  // namespace mhts
