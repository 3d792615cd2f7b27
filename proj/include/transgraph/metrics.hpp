#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "transgraph/chunker.hpp"
#include "transgraph/errors.hpp"
#include "transgraph/gateway.hpp"
#include "transgraph/text.hpp"

namespace transgraph {

struct TermPair {
    std::string source_term;
    std::string target_term;
};

// ---------------------------------------------------------------------------
// Document-level BLEU.
// ---------------------------------------------------------------------------

// Whole-document BLEU: modified n-gram precisions for n = 1..max_n with a
// geometric mean and the usual brevity penalty. Zero counts for n >= 2 are
// add-one smoothed; a zero unigram count scores 0. The smoothing choice is
// declared in metrics reports since scores are comparable within-run only.
inline constexpr const char* kBleuSmoothingNote = "add-one on zero n-gram counts for n >= 2";

inline double d_bleu(const std::string& hypothesis, const std::string& reference, int max_n = 4,
                     TokenizerFn tokenizer = &tokenize) {
    if (reference.empty()) throw EmptyReference("reference document is empty");
    if (max_n < 1) throw ConfigError("max_n must be >= 1");
    const std::vector<std::string> hyp = (*tokenizer)(hypothesis);
    const std::vector<std::string> ref = (*tokenizer)(reference);
    if (ref.empty()) throw EmptyReference("reference contains no tokens");
    if (hyp.empty()) return 0.0;

    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        std::map<std::vector<std::string>, std::int64_t> ref_counts;
        for (std::size_t i = 0; i + n <= ref.size(); ++i) {
            ref_counts[std::vector<std::string>(ref.begin() + static_cast<std::ptrdiff_t>(i),
                                                ref.begin() + static_cast<std::ptrdiff_t>(i) + n)]++;
        }
        std::map<std::vector<std::string>, std::int64_t> hyp_counts;
        for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
            hyp_counts[std::vector<std::string>(hyp.begin() + static_cast<std::ptrdiff_t>(i),
                                                hyp.begin() + static_cast<std::ptrdiff_t>(i) + n)]++;
        }
        std::int64_t matched = 0;
        std::int64_t total = 0;
        for (const auto& [gram, count] : hyp_counts) {
            total += count;
            const auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) matched += std::min(count, it->second);
        }
        double precision = 0.0;
        if (n == 1) {
            if (matched == 0) return 0.0;
            precision = static_cast<double>(matched) / static_cast<double>(total);
        } else if (matched == 0) {
            precision = 1.0 / static_cast<double>(total + 1);
        } else {
            precision = static_cast<double>(matched) / static_cast<double>(total);
        }
        log_sum += std::log(precision) / static_cast<double>(max_n);
    }
    const double h = static_cast<double>(hyp.size());
    const double r = static_cast<double>(ref.size());
    const double brevity = h >= r ? 1.0 : std::exp(1.0 - r / h);
    return 100.0 * brevity * std::exp(log_sum);
}

// ---------------------------------------------------------------------------
// Terminology accuracy.
// ---------------------------------------------------------------------------

namespace detail {

inline char32_t cp_before(std::string_view s, std::size_t pos) {
    if (pos == 0) return U' ';
    std::size_t start = pos - 1;
    while (start > 0 && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) --start;
    char32_t cp = 0;
    utf8_decode(s, start, cp);
    return cp;
}

inline char32_t cp_at(std::string_view s, std::size_t pos) {
    if (pos >= s.size()) return U' ';
    char32_t cp = 0;
    utf8_decode(s, pos, cp);
    return cp;
}

// Occurrence check: substring match for CJK terms, word-boundary match
// otherwise.
inline bool term_occurs(std::string_view haystack, std::string_view term) {
    if (term.empty()) return false;
    const bool cjk = contains_cjk(term);
    std::size_t pos = 0;
    while ((pos = haystack.find(term, pos)) != std::string_view::npos) {
        if (cjk) return true;
        const bool left_ok = !is_word_cp(cp_before(haystack, pos));
        const bool right_ok = !is_word_cp(cp_at(haystack, pos + term.size()));
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

}  // namespace detail

// Fraction of term pairs whose target rendering occurs in the hypothesis.
// Comparison is case-folded and whitespace-normalized; duplicates in the
// term list count once per occurrence.
inline double terminology_accuracy(const std::string& hypothesis,
                                   const std::vector<TermPair>& terms) {
    if (terms.empty()) throw NoTerms("term list is empty");
    const std::string haystack = ascii_lower(collapse_whitespace(hypothesis));
    std::size_t hits = 0;
    for (const TermPair& pair : terms) {
        const std::string needle = ascii_lower(collapse_whitespace(pair.target_term));
        if (detail::term_occurs(haystack, needle)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(terms.size());
}

// ---------------------------------------------------------------------------
// Chunking overlap rate.
// ---------------------------------------------------------------------------

// Agreement between two chunkings of the same sentence set. Each a-chunk
// is matched to the b-chunk sharing the most sentences (earliest wins a
// tie) and scored as |overlap| / max(|a|, |b|); the document score is the
// mean over a's chunks.
inline double chunk_overlap_rate(const std::vector<Chunk>& a, const std::vector<Chunk>& b) {
    auto flatten = [](const std::vector<Chunk>& chunks) {
        std::vector<int> all;
        for (const Chunk& c : chunks) {
            all.insert(all.end(), c.sentence_indices.begin(), c.sentence_indices.end());
        }
        std::sort(all.begin(), all.end());
        return all;
    };
    const std::vector<int> flat_a = flatten(a);
    const std::vector<int> flat_b = flatten(b);
    if (flat_a != flat_b) {
        throw PartitionMismatch("chunkings cover different sentence sets");
    }
    for (const std::vector<int>& flat : {flat_a, flat_b}) {
        for (std::size_t i = 1; i < flat.size(); ++i) {
            if (flat[i] == flat[i - 1]) throw PartitionMismatch("duplicate sentence index");
        }
    }
    if (a.empty()) throw PartitionMismatch("empty chunking");

    double sum = 0.0;
    for (const Chunk& ca : a) {
        const std::set<int> sa(ca.sentence_indices.begin(), ca.sentence_indices.end());
        std::size_t best_overlap = 0;
        std::size_t best_size = 1;
        for (const Chunk& cb : b) {
            std::size_t overlap = 0;
            for (const int idx : cb.sentence_indices) overlap += sa.count(idx);
            if (overlap > best_overlap) {
                best_overlap = overlap;
                best_size = cb.sentence_indices.size();
            }
        }
        sum += static_cast<double>(best_overlap) /
               static_cast<double>(std::max(sa.size(), best_size));
    }
    return sum / static_cast<double>(a.size());
}

// ---------------------------------------------------------------------------
// Cost reporting.
// ---------------------------------------------------------------------------

// Per-run cost figures: token averages are per call, call and total-token
// averages are per document.
struct CostReport {
    double avg_input_tokens = 0.0;
    double avg_output_tokens = 0.0;
    double avg_calls = 0.0;
    double avg_total_tokens = 0.0;
};

inline CostReport cost_report(const CostLedger& ledger, int n_documents) {
    if (n_documents < 1) throw ConfigError("n_documents must be >= 1");
    CostReport report;
    if (ledger.calls > 0) {
        report.avg_input_tokens =
            static_cast<double>(ledger.input_tokens) / static_cast<double>(ledger.calls);
        report.avg_output_tokens =
            static_cast<double>(ledger.output_tokens) / static_cast<double>(ledger.calls);
    }
    report.avg_calls = static_cast<double>(ledger.calls) / static_cast<double>(n_documents);
    report.avg_total_tokens =
        static_cast<double>(ledger.total_tokens()) / static_cast<double>(n_documents);
    return report;
}

inline json to_json(const CostReport& report) {
    return {{"avg_input_tokens", report.avg_input_tokens},
            {"avg_output_tokens", report.avg_output_tokens},
            {"avg_llm_calls", report.avg_calls},
            {"avg_total_tokens", report.avg_total_tokens}};
}

// ---------------------------------------------------------------------------
// External scores (e.g. neural metrics computed out of process).
// ---------------------------------------------------------------------------

// Reads line-oriented {metric, document_id, score} records and groups them
// by document. Unknown document ids are rejected.
inline std::map<std::string, std::map<std::string, double>> ingest_external_scores(
    const std::string& path, const std::set<std::string>& known_document_ids) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open external score file: " + path);
    std::map<std::string, std::map<std::string, double>> scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const json record = json::parse(stripped, nullptr, false);
        if (record.is_discarded() || !record.is_object() || !record.contains("metric") ||
            !record.contains("document_id") || !record.contains("score") ||
            !record.at("score").is_number()) {
            throw ParseError("bad external score record at line " + std::to_string(line_no));
        }
        const std::string doc_id = record.at("document_id").get<std::string>();
        if (known_document_ids.count(doc_id) == 0) {
            throw UnknownDocument("external score for unknown document: " + doc_id);
        }
        scores[doc_id][record.at("metric").get<std::string>()] =
            record.at("score").get<double>();
    }
    return scores;
}

// ---------------------------------------------------------------------------
// Report assembly.
// ---------------------------------------------------------------------------

struct MetricsReport {
    std::optional<double> d_bleu;
    std::optional<double> terminology_accuracy;
    std::map<std::string, double> external_scores;
    CostLedger cost;
    std::string tokenizer_id = "default";
};

inline json to_json(const MetricsReport& report) {
    json out = json::object();
    if (report.d_bleu) out["d_bleu"] = *report.d_bleu;
    if (report.terminology_accuracy) out["terminology_accuracy"] = *report.terminology_accuracy;
    if (!report.external_scores.empty()) out["external_scores"] = report.external_scores;
    out["cost"] = to_json(report.cost);
    out["notes"] = {{"bleu_smoothing", kBleuSmoothingNote}, {"tokenizer", report.tokenizer_id}};
    return out;
}

// --- term files: one "source<TAB>target" pair per line ---

inline std::vector<TermPair> parse_term_lines(const std::string& content) {
    std::vector<TermPair> terms;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        const std::string line = content.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError("term line " + std::to_string(line_no) + " has no tab separator");
        }
        TermPair pair{trim(line.substr(0, tab)), trim(line.substr(tab + 1))};
        if (pair.source_term.empty() || pair.target_term.empty()) {
            throw ParseError("term line " + std::to_string(line_no) + " has an empty side");
        }
        terms.push_back(std::move(pair));
    }
    return terms;
}

}  // namespace transgraph
