#include "mhts/text.hpp"

#include <cctype>

namespace mhts {

std::string normalize_newlines(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\r') {
            out.push_back('\n');
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = true;  // leading whitespace dropped
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(c);
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::vector<std::string> split_blank_line_paragraphs(std::string_view text) {
    std::vector<std::string> paragraphs;
    std::string current;
    size_t pos = 0;
    auto flush = [&]() {
        std::string p = trim(current);
        if (!p.empty()) paragraphs.push_back(std::move(p));
        current.clear();
    };
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line =
            nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        if (trim(line).empty()) {
            flush();
        } else {
            if (!current.empty()) current.push_back('\n');
            current.append(line);
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    flush();
    return paragraphs;
}

namespace {

// "Mr. Peggotty" must not end a sentence.
bool ends_with_abbreviation(const std::string& s) {
    static const char* kAbbrev[] = {"mr", "mrs", "ms", "dr", "st", "no"};
    size_t end = s.size();
    if (end == 0 || s[end - 1] != '.') return false;
    --end;
    size_t begin = end;
    while (begin > 0 && std::isalpha(static_cast<unsigned char>(s[begin - 1]))) --begin;
    if (begin == end) return false;
    std::string word = to_lower(std::string_view(s).substr(begin, end - begin));
    for (const char* a : kAbbrev) {
        if (word == a) return true;
    }
    return false;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        current.push_back(c);
        bool terminal = (c == '.' || c == '!' || c == '?');
        bool boundary = terminal && (i + 1 == text.size() ||
                                     std::isspace(static_cast<unsigned char>(text[i + 1])));
        if (boundary && c == '.' && ends_with_abbreviation(current)) boundary = false;
        if (boundary) {
            std::string s = trim(current);
            if (!s.empty()) out.push_back(std::move(s));
            current.clear();
        }
    }
    std::string tail = trim(current);
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) {
                out.push_back(current);
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

bool is_valid_utf8(std::string_view text) {
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        size_t extra;
        if (c < 0x80) {
            if (c == 0) return false;  // NUL means binary content for our purposes
            extra = 0;
        } else if ((c & 0xE0) == 0xC0) {
            if (c < 0xC2) return false;  // overlong
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
        } else if ((c & 0xF8) == 0xF0) {
            if (c > 0xF4) return false;
            extra = 3;
        } else {
            return false;
        }
        for (size_t j = 1; j <= extra; ++j) {
            if (i + j >= n) return false;
            if ((static_cast<unsigned char>(text[i + j]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

std::string first_word_lower(std::string_view text) {
    size_t b = 0;
    while (b < text.size() && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    std::string out;
    while (b < text.size() && std::isalpha(static_cast<unsigned char>(text[b]))) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[b]))));
        ++b;
    }
    return out;
}

}  // namespace mhts
