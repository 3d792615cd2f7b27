#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "transgraph/errors.hpp"
#include "transgraph/gateway.hpp"
#include "transgraph/prompts.hpp"
#include "transgraph/sentences.hpp"
#include "transgraph/text.hpp"

namespace transgraph {

// A contiguous, sentence-aligned span of the source document. Ids are
// 1-based in document order; `text` joins the member sentences with their
// original inter-sentence whitespace.
struct Chunk {
    int id = 0;
    std::vector<int> sentence_indices;
    std::string text;
    std::size_t token_count = 0;
    std::string rationale;
    std::string gap_after;  // whitespace between this chunk and the next
};

inline Chunk make_chunk(int id, const std::vector<Sentence>& sentences, std::size_t first,
                        std::size_t last, std::string rationale = {}) {
    Chunk chunk;
    chunk.id = id;
    chunk.rationale = std::move(rationale);
    for (std::size_t k = first; k <= last; ++k) {
        chunk.sentence_indices.push_back(sentences[k].index);
        chunk.text += sentences[k].text;
        if (k < last) chunk.text += sentences[k].gap_after;
    }
    chunk.gap_after = sentences[last].gap_after;
    chunk.token_count = count_tokens(chunk.text);
    return chunk;
}

// One grouping proposed by the LLM for a window; indices are already
// mapped to document-global sentence indices by chunk_window.
struct ProposalEntry {
    std::string chunk_id;  // model-assigned; final ids are renumbered
    std::string rationale;
    std::vector<int> sentence_indices;
    bool carry_over = false;
};

struct ChunkProposal {
    std::vector<ProposalEntry> entries;
};

// Sentences fed to one chunking call: deferred carry first, then the run
// of fresh sentences whose cumulative token count first reaches T.
struct WindowSlice {
    std::vector<Sentence> sentences;
    std::size_t carry_count = 0;
    std::size_t next_cursor = 0;

    bool empty() const { return sentences.empty(); }
};

// Consumes whole sentences starting at `cursor` until their cumulative
// token count reaches or exceeds T (at least one if any remain). Carry
// sentences ride along without counting toward T.
inline WindowSlice take_window(const std::vector<Sentence>& sentences, std::size_t cursor,
                               std::size_t T, const std::vector<Sentence>& carry = {}) {
    WindowSlice slice;
    slice.sentences = carry;
    slice.carry_count = carry.size();
    std::size_t consumed = 0;
    std::size_t i = cursor;
    while (i < sentences.size()) {
        slice.sentences.push_back(sentences[i]);
        consumed += sentences[i].token_count;
        ++i;
        if (consumed >= T) break;
    }
    slice.next_cursor = i;
    return slice;
}

namespace detail {

inline std::string render_window_content(const WindowSlice& window) {
    std::string out;
    for (std::size_t k = 0; k < window.sentences.size(); ++k) {
        out += "[" + std::to_string(k) + "] " + window.sentences[k].text;
        if (k + 1 < window.sentences.size()) out += "\n";
    }
    return out;
}

inline StructuredShape chunk_proposal_shape() {
    auto element = std::make_shared<StructuredShape>();
    element->fields = {
        {"chunk_id", StructuredShape::Kind::kAny, false, nullptr},
        {"rationale", StructuredShape::Kind::kString, false, nullptr},
        {"sentence_indices", StructuredShape::Kind::kArray, true, nullptr},
        {"carry_over", StructuredShape::Kind::kBoolean, false, nullptr},
    };
    StructuredShape shape;
    shape.fields = {{"chunks", StructuredShape::Kind::kArray, true, element}};
    return shape;
}

// Validates a parsed proposal against the window and maps the entries'
// window-local indices to document-global ones. Throws CoverageError.
inline ChunkProposal validate_proposal(const json& payload, const WindowSlice& window) {
    const std::size_t window_size = window.sentences.size();
    ChunkProposal proposal;
    const json& entries = payload.at("chunks");
    if (entries.empty()) throw CoverageError("proposal contains no chunks");

    int expected_next = 0;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const json& item = entries.at(e);
        ProposalEntry entry;
        if (item.contains("chunk_id")) {
            const json& cid = item.at("chunk_id");
            entry.chunk_id = cid.is_string() ? cid.get<std::string>() : cid.dump();
        }
        entry.rationale = item.value("rationale", std::string{});
        entry.carry_over = item.value("carry_over", false);
        if (entry.carry_over && e + 1 != entries.size()) {
            throw CoverageError("carry_over set on a non-final chunk");
        }
        for (const json& v : item.at("sentence_indices")) {
            if (!v.is_number_integer()) {
                throw CoverageError("sentence index is not an integer");
            }
            entry.sentence_indices.push_back(v.get<int>());
        }
        if (entry.sentence_indices.empty()) {
            throw CoverageError("chunk with empty sentence_indices");
        }
        for (const int idx : entry.sentence_indices) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= window_size) {
                throw CoverageError("sentence index " + std::to_string(idx) +
                                    " outside the window");
            }
            if (idx != expected_next) {
                throw CoverageError(idx < expected_next
                                        ? "duplicate sentence index " + std::to_string(idx)
                                        : "omitted sentence index " + std::to_string(expected_next));
            }
            ++expected_next;
        }
        proposal.entries.push_back(std::move(entry));
    }
    // Entries must cover a prefix of the window; an uncovered suffix is an
    // implicit carry-over handled by the caller.
    for (auto& entry : proposal.entries) {
        for (int& idx : entry.sentence_indices) {
            idx = window.sentences[static_cast<std::size_t>(idx)].index;
        }
    }
    return proposal;
}

}  // namespace detail

// Prompts the LLM to group the window's sentences into coherent chunks and
// validates the reply. Proposal indices come back document-global.
inline ChunkProposal chunk_window(const WindowSlice& window, Gateway& gateway) {
    if (window.empty()) throw EmptyDocument("chunking window is empty");
    ChatRequest request;
    request.tag = StageTag::kChunk;
    request.user_text = prompts::render_chunk_prompt(detail::render_window_content(window));
    const StructuredShape shape = detail::chunk_proposal_shape();

    const int semantic_retries = gateway.policy().structure_retries;
    std::string base_text = request.user_text;
    for (int attempt = 0; ; ++attempt) {
        const json payload = gateway.complete_structured(request, shape);
        try {
            return detail::validate_proposal(payload, window);
        } catch (const CoverageError& e) {
            if (attempt >= semantic_retries) throw;
            request.user_text = base_text +
                "\n\nYour previous grouping was invalid (" + std::string(e.what()) +
                "). Every sentence index must appear exactly once, in order, starting at 0.";
        }
    }
}

// Segments the document, then loops take_window / chunk_window to
// exhaustion. Carry-over sentences prepend the next window; on the final
// window every remaining sentence is assigned. A window whose proposals
// cannot be repaired becomes a single chunk so the pipeline still makes
// progress.
inline std::vector<Chunk> chunk_document(const std::string& document, std::size_t T,
                                         Gateway& gateway, const std::string& language = "en") {
    if (T < 1) throw ConfigError("window size T must be >= 1");
    const std::vector<Sentence> sentences = segment_sentences(document, language);

    std::vector<Chunk> chunks;
    std::vector<Sentence> carry;
    std::size_t cursor = 0;
    int next_id = 1;

    while (true) {
        WindowSlice window = take_window(sentences, cursor, T, carry);
        if (window.empty()) break;
        cursor = window.next_cursor;
        carry.clear();
        const bool final_window = cursor >= sentences.size();

        ChunkProposal proposal;
        try {
            proposal = chunk_window(window, gateway);
        } catch (const StructureError& e) {
            std::cerr << "[transgraph] chunking window fell back to a single chunk: "
                      << e.what() << "\n";
            ProposalEntry whole;
            for (const Sentence& s : window.sentences) whole.sentence_indices.push_back(s.index);
            proposal.entries.push_back(std::move(whole));
        } catch (const CoverageError& e) {
            std::cerr << "[transgraph] chunking window fell back to a single chunk: "
                      << e.what() << "\n";
            ProposalEntry whole;
            for (const Sentence& s : window.sentences) whole.sentence_indices.push_back(s.index);
            proposal.entries.push_back(std::move(whole));
        }

        // Global index of the first window sentence, for locating entries.
        const int window_base = window.sentences.front().index;
        int covered_until = window_base;
        for (const ProposalEntry& entry : proposal.entries) {
            covered_until = entry.sentence_indices.back() + 1;
            if (entry.carry_over && !final_window) {
                for (const int idx : entry.sentence_indices) {
                    carry.push_back(sentences[static_cast<std::size_t>(idx)]);
                }
                continue;
            }
            const auto first = static_cast<std::size_t>(entry.sentence_indices.front());
            const auto last = static_cast<std::size_t>(entry.sentence_indices.back());
            chunks.push_back(make_chunk(next_id++, sentences, first, last, entry.rationale));
        }
        // Sentences the proposal left untouched trail the window: carry
        // them forward, or flush them as a final chunk.
        const int window_end = window.sentences.back().index + 1;
        if (covered_until < window_end) {
            if (!final_window) {
                for (int idx = covered_until; idx < window_end; ++idx) {
                    carry.push_back(sentences[static_cast<std::size_t>(idx)]);
                }
            } else {
                chunks.push_back(make_chunk(next_id++, sentences,
                                            static_cast<std::size_t>(covered_until),
                                            static_cast<std::size_t>(window_end - 1)));
            }
        }
    }
    return chunks;
}

// Joins chunk texts with the original inter-chunk whitespace; equals the
// source document whenever the document neither starts nor ends with
// whitespace.
inline std::string reconstruct_document(const std::vector<Chunk>& chunks) {
    std::string out;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        out += chunks[i].text;
        if (i + 1 < chunks.size()) out += chunks[i].gap_after;
    }
    return out;
}

// --- chunks.jsonl ---

inline json to_json(const Chunk& chunk) {
    return {{"id", chunk.id},
            {"sentence_indices", chunk.sentence_indices},
            {"text", chunk.text},
            {"token_count", chunk.token_count},
            {"rationale", chunk.rationale},
            {"gap_after", chunk.gap_after}};
}

inline Chunk chunk_from_json(const json& j) {
    Chunk chunk;
    chunk.id = j.at("id").get<int>();
    chunk.sentence_indices = j.at("sentence_indices").get<std::vector<int>>();
    chunk.text = j.at("text").get<std::string>();
    chunk.token_count = j.at("token_count").get<std::size_t>();
    chunk.rationale = j.value("rationale", std::string{});
    chunk.gap_after = j.value("gap_after", std::string{});
    return chunk;
}

inline std::string chunks_to_jsonl(const std::vector<Chunk>& chunks) {
    std::string out;
    for (const Chunk& chunk : chunks) {
        out += to_json(chunk).dump();
        out += "\n";
    }
    return out;
}

inline std::vector<Chunk> chunks_from_jsonl(const std::string& content) {
    std::vector<Chunk> chunks;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        const std::string line = trim(content.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError("invalid chunks.jsonl line: " + line);
        chunks.push_back(chunk_from_json(j));
    }
    return chunks;
}

}  // namespace transgraph
