#pragma once

#include <optional>
#include <string>
#include <vector>

#include "transgraph/chunker.hpp"
#include "transgraph/errors.hpp"
#include "transgraph/gateway.hpp"
#include "transgraph/graph.hpp"
#include "transgraph/prompts.hpp"
#include "transgraph/sentences.hpp"
#include "transgraph/translator.hpp"

namespace transgraph {

enum class StrategyId {
    kSentMt,
    kOnePass,
    kTransgraph,
    kFixedChunking,
    kNoRel,
    kSeqContext,
};

inline const char* to_string(StrategyId strategy) {
    switch (strategy) {
        case StrategyId::kSentMt: return "sent_mt";
        case StrategyId::kOnePass: return "one_pass";
        case StrategyId::kTransgraph: return "transgraph";
        case StrategyId::kFixedChunking: return "fixed_chunking";
        case StrategyId::kNoRel: return "no_rel";
        case StrategyId::kSeqContext: return "seq_context";
    }
    return "?";
}

inline std::optional<StrategyId> strategy_from(const std::string& s) {
    if (s == "sent_mt") return StrategyId::kSentMt;
    if (s == "one_pass") return StrategyId::kOnePass;
    if (s == "transgraph") return StrategyId::kTransgraph;
    if (s == "fixed_chunking") return StrategyId::kFixedChunking;
    if (s == "no_rel") return StrategyId::kNoRel;
    if (s == "seq_context") return StrategyId::kSeqContext;
    return std::nullopt;
}

// One LLM call per sentence with a minimal prompt, concatenated in order.
inline TranslatedDocument translate_sentence_level(const std::string& document,
                                                   const std::string& src_lang,
                                                   const std::string& tgt_lang, Gateway& gateway,
                                                   bool halt_on_error = true,
                                                   const std::string& language = "en") {
    const std::vector<Sentence> sentences = segment_sentences(document, language);
    TranslatedDocument doc;
    for (const Sentence& sentence : sentences) {
        ChatRequest request;
        request.tag = StageTag::kTranslate;
        request.user_text = prompts::render_sentence_prompt(src_lang, tgt_lang, sentence.text);
        TranslatedChunk tc;
        tc.chunk_id = sentence.index + 1;
        tc.source_text = sentence.text;
        try {
            tc.target_text = gateway.complete(request).text;
        } catch (const BackendRefusal& e) {
            if (halt_on_error) {
                throw TranslationError("sentence " + std::to_string(sentence.index) + ": " +
                                       e.what(), sentence.index + 1);
            }
            tc.failed = true;
        }
        doc.chunks.push_back(std::move(tc));
    }
    for (std::size_t i = 0; i < doc.chunks.size(); ++i) {
        doc.text += doc.chunks[i].target_text;
        if (i + 1 < doc.chunks.size()) {
            doc.text += sentences[i].gap_after.find('\n') != std::string::npos ? "\n" : " ";
        }
    }
    return doc;
}

// Exactly one LLM call containing the full document.
inline TranslatedDocument translate_single_pass(const std::string& document,
                                                const std::string& src_lang,
                                                const std::string& tgt_lang, Gateway& gateway) {
    ChatRequest request;
    request.tag = StageTag::kTranslate;
    request.user_text = prompts::render_document_prompt(src_lang, tgt_lang, document);
    TranslatedChunk tc;
    tc.chunk_id = 1;
    tc.source_text = document;
    tc.target_text = gateway.complete(request).text;
    TranslatedDocument doc;
    doc.text = tc.target_text;
    doc.chunks.push_back(std::move(tc));
    return doc;
}

// Splits the document into min(k, S) chunks whose token counts greedily
// approach total/k, never splitting a sentence. Targets rebalance as
// sentences are consumed so early over- or undershoot does not snowball.
inline std::vector<Chunk> fixed_size_chunks(const std::string& document, int k,
                                            const std::string& language = "en") {
    if (k < 1) throw ConfigError("chunk count k must be >= 1");
    const std::vector<Sentence> sentences = segment_sentences(document, language);
    const int S = static_cast<int>(sentences.size());
    const int n_chunks = std::min(k, S);

    std::vector<Chunk> chunks;
    std::size_t total_remaining = 0;
    for (const Sentence& s : sentences) total_remaining += s.token_count;

    std::size_t next = 0;
    for (int c = 0; c < n_chunks; ++c) {
        const int chunks_left = n_chunks - c;
        const std::size_t first = next;
        std::size_t sum = sentences[next].token_count;
        ++next;
        if (c + 1 == n_chunks) {
            next = static_cast<std::size_t>(S);  // last chunk takes the rest
        } else {
            const double target =
                static_cast<double>(total_remaining) / static_cast<double>(chunks_left);
            while (next < static_cast<std::size_t>(S) &&
                   static_cast<std::size_t>(S) - next > static_cast<std::size_t>(chunks_left - 1)) {
                const double with = std::abs(static_cast<double>(sum + sentences[next].token_count) - target);
                const double without = std::abs(static_cast<double>(sum) - target);
                if (with > without) break;
                sum += sentences[next].token_count;
                ++next;
            }
        }
        Chunk chunk = make_chunk(c + 1, sentences, first, next - 1, "fixed-size chunk");
        std::size_t consumed = 0;
        for (std::size_t s = first; s < next; ++s) consumed += sentences[s].token_count;
        total_remaining -= consumed;
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

// Sequential-context package for chunk j: the previous k chunks in
// ascending order. With a graph, records pick up the edge label when one
// exists (the neutral marker otherwise); without one they stay unlabeled.
inline ContextPackage sequential_context(int j, int k, const std::vector<Chunk>& chunks,
                                         const DiscourseGraph* graph = nullptr) {
    if (k < 1) throw ConfigError("sequential context depth must be >= 1");
    ContextPackage package;
    package.target_id = j;
    std::vector<ContextRecord> labeled;
    if (graph) labeled = in_neighbors(*graph, chunks, j);
    for (int i = std::max(1, j - k); i < j; ++i) {
        ContextRecord record;
        record.neighbor_id = i;
        record.neighbor_text = chunks[static_cast<std::size_t>(i - 1)].text;
        for (const ContextRecord& r : labeled) {
            if (r.neighbor_id == i) {
                record.label = r.label;
                record.reason = r.reason;
                break;
            }
        }
        package.records.push_back(std::move(record));
    }
    return package;
}

}  // namespace transgraph
