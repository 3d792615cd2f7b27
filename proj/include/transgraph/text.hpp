#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace transgraph {

// ---------------------------------------------------------------------------
// UTF-8 handling. Inputs are expected to be valid UTF-8; invalid bytes are
// treated as single opaque codepoints so the scanners never stall.
// ---------------------------------------------------------------------------

struct Utf8Char {
    char32_t cp = 0;
    std::size_t offset = 0;  // byte offset in the original string
    std::size_t size = 0;    // byte length of the encoding
};

inline std::size_t utf8_decode(std::string_view s, std::size_t pos, char32_t& cp) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) {
        cp = b0;
        return 1;
    }
    std::size_t len = 0;
    char32_t value = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        value = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        value = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        value = b0 & 0x07;
    } else {
        cp = b0;  // stray continuation byte
        return 1;
    }
    if (pos + len > s.size()) {
        cp = b0;
        return 1;
    }
    for (std::size_t i = 1; i < len; ++i) {
        const auto bi = static_cast<unsigned char>(s[pos + i]);
        if ((bi & 0xC0) != 0x80) {
            cp = b0;
            return 1;
        }
        value = (value << 6) | (bi & 0x3F);
    }
    cp = value;
    return len;
}

inline std::vector<Utf8Char> utf8_chars(std::string_view s) {
    std::vector<Utf8Char> out;
    out.reserve(s.size());
    std::size_t pos = 0;
    while (pos < s.size()) {
        Utf8Char c;
        c.offset = pos;
        c.size = utf8_decode(s, pos, c.cp);
        pos += c.size;
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Codepoint classes used by the tokenizer and the sentence segmenter.
// ---------------------------------------------------------------------------

inline bool is_space_cp(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
        case 0x00A0:  // no-break space
        case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F:
        case 0x3000:  // ideographic space
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Han, kana and hangul; each such character counts as one token.
inline bool is_cjk_cp(char32_t cp) {
    return (cp >= 0x3400 && cp <= 0x4DBF) ||    // CJK ext A
           (cp >= 0x4E00 && cp <= 0x9FFF) ||    // CJK unified
           (cp >= 0xF900 && cp <= 0xFAFF) ||    // CJK compatibility
           (cp >= 0x3040 && cp <= 0x309F) ||    // hiragana
           (cp >= 0x30A0 && cp <= 0x30FF) ||    // katakana
           (cp >= 0x31F0 && cp <= 0x31FF) ||    // katakana phonetic ext
           (cp >= 0xAC00 && cp <= 0xD7AF) ||    // hangul syllables
           (cp >= 0x1100 && cp <= 0x11FF) ||    // hangul jamo
           (cp >= 0x20000 && cp <= 0x2A6DF);    // CJK ext B
}

// Punctuation and symbols; each such character is one token on its own.
inline bool is_punct_cp(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
               (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
    }
    return (cp >= 0x2010 && cp <= 0x205E) ||    // general punctuation
           (cp >= 0x00A1 && cp <= 0x00BF && cp != 0x00B5 && cp != 0x00BA && cp != 0x00AA) ||
           cp == 0x00D7 || cp == 0x00F7 ||
           (cp >= 0x3001 && cp <= 0x303F) ||    // CJK punctuation
           (cp >= 0xFF01 && cp <= 0xFF0F) ||    // fullwidth ! " # ... /
           (cp >= 0xFF1A && cp <= 0xFF20) ||    // fullwidth : ; < ... @
           (cp >= 0xFF3B && cp <= 0xFF40) ||
           (cp >= 0xFF5B && cp <= 0xFF65) ||
           cp == 0x0589 || cp == 0x058A ||      // armenian stops
           cp == 0x061F || cp == 0x060C ||      // arabic question/comma
           cp == 0x0964 || cp == 0x0965;        // devanagari danda
}

// Word characters are whatever is left: letters and digits of any script
// that is not CJK.
inline bool is_word_cp(char32_t cp) {
    return !is_space_cp(cp) && !is_punct_cp(cp) && !is_cjk_cp(cp);
}

// ---------------------------------------------------------------------------
// Default tokenizer: maximal runs of word characters form one token each,
// every punctuation character is one token, every CJK character is one
// token, whitespace separates. Deterministic and language-agnostic; close
// enough to LLM token counts for window bookkeeping.
// ---------------------------------------------------------------------------

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = 0;
        const std::size_t len = utf8_decode(text, pos, cp);
        if (is_space_cp(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else if (is_punct_cp(cp) || is_cjk_cp(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
            tokens.emplace_back(text.substr(pos, len));
        } else {
            current.append(text.substr(pos, len));
        }
        pos += len;
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    std::string_view run;
    bool in_run = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = 0;
        const std::size_t len = utf8_decode(text, pos, cp);
        if (is_space_cp(cp)) {
            if (in_run) { ++n; in_run = false; }
        } else if (is_punct_cp(cp) || is_cjk_cp(cp)) {
            if (in_run) { ++n; in_run = false; }
            ++n;
        } else {
            in_run = true;
        }
        pos += len;
        (void)run;
    }
    if (in_run) ++n;
    return n;
}

// Named tokenizer registry. "default" is the rule set above; "whitespace"
// splits on blanks only (useful when comparing against external scorers).
using TokenizerFn = std::vector<std::string> (*)(std::string_view);

inline std::vector<std::string> tokenize_whitespace(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) tokens.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return tokens;
}

inline TokenizerFn tokenizer_by_id(const std::string& id) {
    if (id.empty() || id == "default") return &tokenize;
    if (id == "whitespace") return &tokenize_whitespace;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Small string helpers.
// ---------------------------------------------------------------------------

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    std::size_t pos = 0;
    while (pos < s.size()) {
        char32_t cp = 0;
        const std::size_t len = utf8_decode(s, pos, cp);
        if (is_space_cp(cp)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) {
                out.push_back(' ');
                pending_space = false;
            }
            out.append(s.substr(pos, len));
        }
        pos += len;
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline bool contains_cjk(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        char32_t cp = 0;
        pos += utf8_decode(s, pos, cp);
        if (is_cjk_cp(cp)) return true;
    }
    return false;
}

// Replaces every "{name}" placeholder that has an entry in `values`;
// unknown braces (for example JSON schema snippets inside a prompt) are
// left untouched.
inline std::string render_template(
    std::string_view tmpl,
    const std::vector<std::pair<std::string, std::string>>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const std::size_t close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const std::string_view name = tmpl.substr(i + 1, close - i - 1);
                bool replaced = false;
                for (const auto& [key, value] : values) {
                    if (name == key) {
                        out.append(value);
                        i = close + 1;
                        replaced = true;
                        break;
                    }
                }
                if (replaced) continue;
            }
        }
        out.push_back(tmpl[i]);
        ++i;
    }
    return out;
}

// FNV-1a 64-bit; used for content-addressed run ids.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

}  // namespace transgraph
