#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "transgraph/chunker.hpp"
#include "transgraph/errors.hpp"
#include "transgraph/gateway.hpp"
#include "transgraph/graph.hpp"
#include "transgraph/prompts.hpp"

namespace transgraph {

// One neighbor record handed to the translator: the neighbor's source text
// plus the relation that connects it to the target chunk. `label` is empty
// for baselines that strip relations; records without a label but rendered
// in relation mode show a neutral adjacent-context marker.
struct ContextRecord {
    int neighbor_id = 0;
    std::string neighbor_text;
    std::optional<RelationLabel> label;
    std::string reason;
};

struct ContextPackage {
    int target_id = 0;
    std::vector<ContextRecord> records;
};

struct ContextUse {
    int neighbor_id = 0;
    std::optional<RelationLabel> label;
};

struct TranslatedChunk {
    int chunk_id = 0;
    std::string source_text;
    std::string target_text;
    std::vector<ContextUse> context;
    bool failed = false;

    std::vector<int> context_ids() const {
        std::vector<int> ids;
        ids.reserve(context.size());
        for (const ContextUse& use : context) ids.push_back(use.neighbor_id);
        return ids;
    }
};

struct TranslatedDocument {
    std::vector<TranslatedChunk> chunks;
    std::string text;
};

// ---------------------------------------------------------------------------
// Neighborhood retrieval.
// ---------------------------------------------------------------------------

// In-neighbors of chunk j: every stored edge into j, plus symmetric-label
// edges stored outward from j whose other endpoint precedes j (symmetric
// relations flow context forward only). Ordered by neighbor id.
inline std::vector<ContextRecord> in_neighbors(const DiscourseGraph& graph,
                                               const std::vector<Chunk>& chunks, int j) {
    std::vector<ContextRecord> records;
    for (const Edge& edge : graph.edges) {
        int neighbor = 0;
        if (edge.dst == j) {
            neighbor = edge.src;
        } else if (edge.src == j && is_symmetric(edge.label) && edge.dst < j) {
            neighbor = edge.dst;
        } else {
            continue;
        }
        ContextRecord record;
        record.neighbor_id = neighbor;
        record.label = edge.label;
        record.reason = edge.reason;
        if (neighbor >= 1 && static_cast<std::size_t>(neighbor) <= chunks.size()) {
            record.neighbor_text = chunks[static_cast<std::size_t>(neighbor - 1)].text;
        }
        records.push_back(std::move(record));
    }
    std::sort(records.begin(), records.end(),
              [](const ContextRecord& a, const ContextRecord& b) {
                  return a.neighbor_id < b.neighbor_id;
              });
    return records;
}

enum class TieBreak {
    kNearest,   // keep the cap neighbors closest to j, smaller id on ties
    kEarliest,  // keep the cap lowest-numbered neighbors
};

// Caps the in-neighborhood of chunk j. Under the cap every neighbor is
// kept; over it the nearest neighbors win (or the earliest, when
// configured), and the package lists records by ascending neighbor id.
inline ContextPackage select_context(const DiscourseGraph& graph,
                                     const std::vector<Chunk>& chunks, int j, int cap,
                                     TieBreak tie_break = TieBreak::kNearest) {
    if (cap < 1) throw ConfigError("context cap must be >= 1");
    ContextPackage package;
    package.target_id = j;
    std::vector<ContextRecord> records = in_neighbors(graph, chunks, j);
    if (static_cast<int>(records.size()) > cap) {
        if (tie_break == TieBreak::kNearest) {
            std::stable_sort(records.begin(), records.end(),
                             [j](const ContextRecord& a, const ContextRecord& b) {
                                 const int da = std::abs(j - a.neighbor_id);
                                 const int db = std::abs(j - b.neighbor_id);
                                 if (da != db) return da < db;
                                 return a.neighbor_id < b.neighbor_id;
                             });
        }
        records.resize(static_cast<std::size_t>(cap));
        std::sort(records.begin(), records.end(),
                  [](const ContextRecord& a, const ContextRecord& b) {
                      return a.neighbor_id < b.neighbor_id;
                  });
    }
    package.records = std::move(records);
    return package;
}

// ---------------------------------------------------------------------------
// Translation.
// ---------------------------------------------------------------------------

enum class ContextRenderMode {
    kWithRelations,  // relation + reason lines; neutral marker if unlabeled
    kOmitRelations,  // neighbor text only
};

inline std::string render_related_chunks(const ContextPackage& package,
                                         ContextRenderMode mode = ContextRenderMode::kWithRelations) {
    if (package.records.empty()) return "(no related chunks)";
    std::string out;
    for (const ContextRecord& record : package.records) {
        out += "Chunk ID: " + std::to_string(record.neighbor_id) + "\n";
        if (mode == ContextRenderMode::kWithRelations) {
            out += "Relation: ";
            out += record.label ? label_display(*record.label) : "Adjacent Context";
            out += "\n";
            if (!record.reason.empty()) out += "Reason: " + record.reason + "\n";
        }
        out += "Source Text:\n" + record.neighbor_text + "\n\n";
    }
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

// Translates one chunk given its context package. The model's raw text is
// the translation.
inline TranslatedChunk translate_chunk(const Chunk& chunk, const ContextPackage& package,
                                       const std::string& src_lang, const std::string& tgt_lang,
                                       Gateway& gateway,
                                       ContextRenderMode mode = ContextRenderMode::kWithRelations) {
    if (package.target_id != chunk.id) {
        throw ConfigError("context package target " + std::to_string(package.target_id) +
                          " does not match chunk " + std::to_string(chunk.id));
    }
    ChatRequest request;
    request.tag = StageTag::kTranslate;
    request.user_text = prompts::render_translate_prompt(
        src_lang, tgt_lang, render_related_chunks(package, mode), chunk.id, chunk.text);

    TranslatedChunk result;
    result.chunk_id = chunk.id;
    result.source_text = chunk.text;
    for (const ContextRecord& record : package.records) {
        result.context.push_back({record.neighbor_id, record.label});
    }
    try {
        result.target_text = gateway.complete(request).text;
    } catch (const BackendRefusal& e) {
        throw TranslationError("chunk " + std::to_string(chunk.id) + ": " + e.what(), chunk.id);
    }
    return result;
}

struct TranslateOptions {
    std::string src_lang = "en";
    std::string tgt_lang = "de";
    int cap = 5;
    TieBreak tie_break = TieBreak::kNearest;
    bool halt_on_error = true;  // otherwise skip-and-mark
};

// Joins chunk translations in id order: single space between chunks, or a
// newline when the source chunk ended with one.
inline std::string assemble_translation(const std::vector<TranslatedChunk>& translated,
                                        const std::vector<Chunk>& chunks) {
    std::string out;
    for (std::size_t i = 0; i < translated.size(); ++i) {
        out += translated[i].target_text;
        if (i + 1 < translated.size()) {
            const std::string& gap = chunks[i].gap_after;
            out += gap.find('\n') != std::string::npos ? "\n" : " ";
        }
    }
    return out;
}

// Stage 2 end to end: context selection and translation for each chunk in
// stable id order, then concatenation in source order.
inline TranslatedDocument translate_document(const std::vector<Chunk>& chunks,
                                             const DiscourseGraph& graph,
                                             const TranslateOptions& options, Gateway& gateway) {
    if (graph.n_chunks != static_cast<int>(chunks.size())) {
        throw ChunkCountMismatch("graph was built over a different chunking");
    }
    TranslatedDocument doc;
    for (const Chunk& chunk : chunks) {
        const ContextPackage package =
            select_context(graph, chunks, chunk.id, options.cap, options.tie_break);
        try {
            doc.chunks.push_back(translate_chunk(chunk, package, options.src_lang,
                                                 options.tgt_lang, gateway));
        } catch (const TranslationError& e) {
            if (options.halt_on_error) throw;
            TranslatedChunk failed;
            failed.chunk_id = chunk.id;
            failed.source_text = chunk.text;
            failed.failed = true;
            doc.chunks.push_back(std::move(failed));
            std::cerr << "[transgraph] " << e.what() << " (skipped)\n";
        }
    }
    doc.text = assemble_translation(doc.chunks, chunks);
    return doc;
}

// --- translations.jsonl ---

inline json to_json(const TranslatedChunk& chunk) {
    json context = json::array();
    for (const ContextUse& use : chunk.context) {
        json entry = {{"neighbor_id", use.neighbor_id}};
        if (use.label) entry["label"] = label_id(*use.label);
        context.push_back(std::move(entry));
    }
    json out = {{"chunk_id", chunk.chunk_id},
                {"source_text", chunk.source_text},
                {"target_text", chunk.target_text},
                {"context", context}};
    if (chunk.failed) out["failed"] = true;
    return out;
}

inline std::string translations_to_jsonl(const TranslatedDocument& doc) {
    std::string out;
    for (const TranslatedChunk& tc : doc.chunks) {
        out += to_json(tc).dump();
        out += "\n";
    }
    return out;
}

inline TranslatedDocument translations_from_jsonl(const std::string& content) {
    TranslatedDocument doc;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        const std::string line = trim(content.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError("invalid translations.jsonl line: " + line);
        TranslatedChunk tc;
        tc.chunk_id = j.at("chunk_id").get<int>();
        tc.source_text = j.at("source_text").get<std::string>();
        tc.target_text = j.at("target_text").get<std::string>();
        tc.failed = j.value("failed", false);
        for (const json& entry : j.at("context")) {
            ContextUse use;
            use.neighbor_id = entry.at("neighbor_id").get<int>();
            if (entry.contains("label")) {
                use.label = relation_label_from(entry.at("label").get<std::string>());
            }
            tc.context.push_back(std::move(use));
        }
        doc.chunks.push_back(std::move(tc));
    }
    return doc;
}

}  // namespace transgraph
