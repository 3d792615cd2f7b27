#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "transgraph/errors.hpp"
#include "transgraph/text.hpp"

namespace transgraph {

// A contiguous sentence of the source document. `char_span` offsets tile
// the document in order (inter-sentence whitespace attaches to the span of
// the sentence it follows); `text` is the core text without surrounding
// whitespace and starts at byte `text_begin`.
struct Sentence {
    int index = 0;
    std::string text;
    std::size_t span_begin = 0;
    std::size_t span_end = 0;
    std::size_t text_begin = 0;
    std::string gap_after;  // whitespace between this sentence and the next
    std::size_t token_count = 0;

    std::size_t text_end() const { return text_begin + text.size(); }
};

namespace detail {

inline bool is_terminal_cp(char32_t cp) {
    switch (cp) {
        case U'.': case U'!': case U'?':
        case 0x2026:  // horizontal ellipsis
        case 0x3002:  // ideographic full stop
        case 0xFF01:  // fullwidth !
        case 0xFF1F:  // fullwidth ?
        case 0xFF0E:  // fullwidth .
            return true;
        default:
            return false;
    }
}

// CJK terminals end a sentence even without trailing whitespace.
inline bool is_cjk_terminal_cp(char32_t cp) {
    return cp == 0x3002 || cp == 0xFF01 || cp == 0xFF1F || cp == 0xFF0E;
}

inline bool is_closer_cp(char32_t cp) {
    switch (cp) {
        case U'"': case U'\'': case U')': case U']':
        case 0x201D: case 0x2019: case 0x00BB:
        case 0xFF09: case 0x300D: case 0x300F:
        case 0x3009: case 0x300B: case 0xFF63:
            return true;
        default:
            return false;
    }
}

// Abbreviations that keep a following '.' from ending the sentence.
// Single letters are deliberately absent so initials still split.
inline const std::unordered_set<std::string>& abbreviation_guard() {
    static const std::unordered_set<std::string> guard = {
        "dr", "mr", "mrs", "ms", "prof", "sr", "jr", "st", "vs", "etc",
        "e.g", "i.e", "fig", "eq", "cf", "al", "inc", "ltd", "co", "corp",
        "approx", "ca", "resp", "vol", "ed", "eds", "pp"};
    return guard;
}

// Word (plus embedded dots) immediately before position `idx`.
inline std::string word_before(const std::vector<Utf8Char>& chars, std::size_t idx,
                               std::string_view doc) {
    if (idx == 0) return {};
    std::size_t begin = idx;
    while (begin > 0) {
        const char32_t cp = chars[begin - 1].cp;
        if (is_word_cp(cp) || cp == U'.') {
            --begin;
        } else {
            break;
        }
    }
    if (begin == idx) return {};
    const std::size_t lo = chars[begin].offset;
    const std::size_t hi = chars[idx].offset;
    return ascii_lower(doc.substr(lo, hi - lo));
}

}  // namespace detail

// Deterministic rule-based segmentation. Terminal punctuation for Latin,
// Cyrillic and CJK scripts; an abbreviation guard keeps "Dr." and friends
// from splitting; '.' between digits never splits. The language code is
// accepted for interface stability; the rules are script-driven.
inline std::vector<Sentence> segment_sentences(std::string_view document,
                                               const std::string& language = "en") {
    (void)language;
    if (document.empty()) throw EmptyDocument("document is empty");
    const std::vector<Utf8Char> chars = utf8_chars(document);
    const std::size_t n = chars.size();

    std::vector<std::pair<std::size_t, std::size_t>> cores;  // [begin,end) char indices
    std::size_t i = 0;
    while (i < n && is_space_cp(chars[i].cp)) ++i;
    std::size_t core_start = i;
    while (i < n) {
        const char32_t cp = chars[i].cp;
        if (!detail::is_terminal_cp(cp)) {
            ++i;
            continue;
        }
        if (cp == U'.') {
            const bool lone_dot = (i + 1 >= n) || !detail::is_terminal_cp(chars[i + 1].cp);
            if (lone_dot && i + 1 < n && chars[i + 1].cp >= U'0' && chars[i + 1].cp <= U'9') {
                ++i;  // decimal point
                continue;
            }
            if (lone_dot &&
                detail::abbreviation_guard().count(detail::word_before(chars, i, document)) > 0) {
                ++i;
                continue;
            }
        }
        const bool cjk_terminal = detail::is_cjk_terminal_cp(cp);
        std::size_t j = i;
        while (j < n && detail::is_terminal_cp(chars[j].cp)) ++j;
        while (j < n && detail::is_closer_cp(chars[j].cp)) ++j;
        const bool boundary = cjk_terminal || j >= n || is_space_cp(chars[j].cp);
        if (!boundary) {
            i = j;
            continue;
        }
        cores.emplace_back(core_start, j);
        i = j;
        while (i < n && is_space_cp(chars[i].cp)) ++i;
        core_start = i;
    }
    if (core_start < n) cores.emplace_back(core_start, n);
    if (cores.empty()) throw EmptyDocument("document contains no sentences");

    std::vector<Sentence> sentences;
    sentences.reserve(cores.size());
    for (std::size_t k = 0; k < cores.size(); ++k) {
        const auto [cb, ce] = cores[k];
        Sentence s;
        s.index = static_cast<int>(k);
        s.text_begin = chars[cb].offset;
        const std::size_t text_end = ce < n ? chars[ce].offset : document.size();
        s.text = std::string(document.substr(s.text_begin, text_end - s.text_begin));
        s.span_begin = k == 0 ? 0 : sentences.back().span_end;
        const std::size_t next_text_begin =
            k + 1 < cores.size() ? chars[cores[k + 1].first].offset : document.size();
        s.span_end = next_text_begin;
        s.gap_after = std::string(document.substr(text_end, next_text_begin - text_end));
        s.token_count = count_tokens(s.text);
        sentences.push_back(std::move(s));
    }
    return sentences;
}

}  // namespace transgraph
