#pragma once

#include <algorithm>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "transgraph/chunker.hpp"
#include "transgraph/errors.hpp"
#include "transgraph/gateway.hpp"
#include "transgraph/prompts.hpp"

namespace transgraph {

// ---------------------------------------------------------------------------
// Relation schema: ten labels; contrast, comparison and entity coreference
// admit either orientation.
// ---------------------------------------------------------------------------

enum class RelationLabel {
    kBackgroundCore,
    kCoreDetail,
    kProblemSolution,
    kCauseEffect,
    kContrast,
    kComparison,
    kCondition,
    kEvaluation,
    kEntityCoreference,
    kTerminologyDefinition,
};

inline constexpr int kRelationLabelCount = 10;

inline bool is_symmetric(RelationLabel label) {
    return label == RelationLabel::kContrast || label == RelationLabel::kComparison ||
           label == RelationLabel::kEntityCoreference;
}

inline const char* label_id(RelationLabel label) {
    switch (label) {
        case RelationLabel::kBackgroundCore: return "background_core";
        case RelationLabel::kCoreDetail: return "core_detail";
        case RelationLabel::kProblemSolution: return "problem_solution";
        case RelationLabel::kCauseEffect: return "cause_effect";
        case RelationLabel::kContrast: return "contrast";
        case RelationLabel::kComparison: return "comparison";
        case RelationLabel::kCondition: return "condition";
        case RelationLabel::kEvaluation: return "evaluation";
        case RelationLabel::kEntityCoreference: return "entity_coreference";
        case RelationLabel::kTerminologyDefinition: return "terminology_definition";
    }
    return "?";
}

inline const char* label_display(RelationLabel label) {
    switch (label) {
        case RelationLabel::kBackgroundCore: return "Background->Core";
        case RelationLabel::kCoreDetail: return "Core->Detail";
        case RelationLabel::kProblemSolution: return "Problem->Solution";
        case RelationLabel::kCauseEffect: return "Cause->Effect";
        case RelationLabel::kContrast: return "Contrast";
        case RelationLabel::kComparison: return "Comparison";
        case RelationLabel::kCondition: return "Condition";
        case RelationLabel::kEvaluation: return "Evaluation";
        case RelationLabel::kEntityCoreference: return "Entity Coreference";
        case RelationLabel::kTerminologyDefinition: return "Terminology Definition";
    }
    return "?";
}

namespace detail {

// Folds case, arrows, spaces, hyphens and dots into '_' so spelling
// variants of the same label compare equal.
inline std::string normalize_label_text(std::string_view raw) {
    std::string text(raw);
    for (const std::string_view arrow : {std::string_view("->"), std::string_view("=>"),
                                         std::string_view("→"), std::string_view("–>")}) {
        std::size_t pos = 0;
        while ((pos = text.find(arrow, pos)) != std::string::npos) {
            text.replace(pos, arrow.size(), "_");
        }
    }
    std::string out;
    for (const char c : text) {
        if (c >= 'A' && c <= 'Z') {
            out.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (c == ' ' || c == '-' || c == '/' || c == '.' || c == '\t') {
            if (!out.empty() && out.back() != '_') out.push_back('_');
        } else {
            out.push_back(c);
        }
    }
    while (!out.empty() && out.front() == '_') out.erase(out.begin());
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

}  // namespace detail

// Maps free-form relation text onto the schema. Accepts the
// "Motivation->Method" alias for problem_solution.
inline std::optional<RelationLabel> relation_label_from(std::string_view raw) {
    const std::string key = detail::normalize_label_text(raw);
    if (key == "background_core") return RelationLabel::kBackgroundCore;
    if (key == "core_detail") return RelationLabel::kCoreDetail;
    if (key == "problem_solution" || key == "motivation_method" ||
        key == "motivation_method_or_problem_solution") {
        return RelationLabel::kProblemSolution;
    }
    if (key == "cause_effect") return RelationLabel::kCauseEffect;
    if (key == "contrast") return RelationLabel::kContrast;
    if (key == "comparison") return RelationLabel::kComparison;
    if (key == "condition") return RelationLabel::kCondition;
    if (key == "evaluation") return RelationLabel::kEvaluation;
    if (key == "entity_coreference") return RelationLabel::kEntityCoreference;
    if (key == "terminology_definition") return RelationLabel::kTerminologyDefinition;
    return std::nullopt;
}

inline bool is_no_relation_text(std::string_view raw) {
    const std::string key = detail::normalize_label_text(raw);
    return key.empty() || key == "none" || key == "no_relation" || key == "norelation" ||
           key == "null" || key == "no_relation_found";
}

enum class Direction { kForward, kBackward };

// Parsed output of one relation-labeling call. relation == nullopt means
// the pair was judged unrelated; direction is then meaningless.
struct RelationJudgment {
    std::string reason;
    std::optional<RelationLabel> relation;
    Direction direction = Direction::kForward;
};

struct Edge {
    int src = 0;
    int dst = 0;
    RelationLabel label = RelationLabel::kBackgroundCore;
    std::string reason;
};

struct DiscourseGraph {
    int n_chunks = 0;
    int window = 0;
    std::vector<Edge> edges;
};

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

// All forward pairs within the window: {(i,j) : 1 <= i < j <= N, j-i <= w},
// in lexicographic order.
inline std::vector<std::pair<int, int>> enumerate_pairs(int n_chunks, int window) {
    if (window < 1) throw ConfigError("pair window must be >= 1");
    std::vector<std::pair<int, int>> pairs;
    for (int i = 1; i <= n_chunks; ++i) {
        for (int j = i + 1; j <= std::min(n_chunks, i + window); ++j) {
            pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

namespace detail {

inline StructuredShape relation_shape() {
    StructuredShape shape;
    shape.fields = {
        {"reason", StructuredShape::Kind::kString, true, nullptr},
        {"relation", StructuredShape::Kind::kString, true, nullptr},
        {"direction", StructuredShape::Kind::kString, false, nullptr},
    };
    return shape;
}

inline RelationJudgment judgment_from_payload(const json& payload) {
    RelationJudgment judgment;
    judgment.reason = payload.at("reason").get<std::string>();
    const std::string direction = ascii_lower(payload.value("direction", "forward"));
    judgment.direction = direction == "backward" ? Direction::kBackward : Direction::kForward;
    const std::string relation_text = payload.at("relation").get<std::string>();
    if (is_no_relation_text(relation_text)) {
        judgment.relation = std::nullopt;
        judgment.reason = "no relation found";
        return judgment;
    }
    const auto label = relation_label_from(relation_text);
    if (!label) throw UnknownLabel("unknown relation label: " + relation_text);
    judgment.relation = label;
    return judgment;
}

}  // namespace detail

// Asks the LLM whether chunks i and j share a relation. An unmappable
// label triggers one repair retry, then the pair is treated as unrelated.
inline RelationJudgment label_pair(const Chunk& c_i, const Chunk& c_j, Gateway& gateway) {
    ChatRequest request;
    request.tag = StageTag::kRelation;
    request.user_text = prompts::render_relation_prompt(c_i.id, c_j.id, c_i.text, c_j.text);
    const StructuredShape shape = detail::relation_shape();

    const std::string base_text = request.user_text;
    for (int attempt = 0; ; ++attempt) {
        const json payload = gateway.complete_structured(request, shape);
        try {
            return detail::judgment_from_payload(payload);
        } catch (const UnknownLabel& e) {
            if (attempt >= 1) {
                std::cerr << "[transgraph] " << e.what() << "; treating pair (" << c_i.id
                          << "," << c_j.id << ") as unrelated\n";
                RelationJudgment none;
                none.relation = std::nullopt;
                none.reason = "no relation found";
                return none;
            }
            request.user_text = base_text +
                "\n\nYour previous relation value was not one of the allowed categories. "
                "Answer again using exactly one of the listed relation names, or 'none'.";
        }
    }
}

// Turns a judgment for the ordered pair (i, j), i < j, into a stored edge.
// Unrelated pairs are discarded; a backward direction flips the endpoints.
inline std::optional<Edge> resolve_direction(const RelationJudgment& judgment, int i, int j) {
    if (!judgment.relation) return std::nullopt;
    Edge edge;
    edge.label = *judgment.relation;
    edge.reason = judgment.reason;
    if (judgment.direction == Direction::kForward) {
        edge.src = i;
        edge.dst = j;
    } else {
        edge.src = j;
        edge.dst = i;
    }
    return edge;
}

// Labels every forward pair within the window and assembles the graph.
// A pair that exhausts its retries contributes no edge.
inline DiscourseGraph build_graph(const std::vector<Chunk>& chunks, int window,
                                  Gateway& gateway) {
    DiscourseGraph graph;
    graph.n_chunks = static_cast<int>(chunks.size());
    graph.window = window;
    for (const auto& [i, j] : enumerate_pairs(graph.n_chunks, window)) {
        RelationJudgment judgment;
        try {
            judgment = label_pair(chunks[static_cast<std::size_t>(i - 1)],
                                  chunks[static_cast<std::size_t>(j - 1)], gateway);
        } catch (const Error& e) {
            std::cerr << "[transgraph] relation for pair (" << i << "," << j
                      << ") failed: " << e.what() << "\n";
            continue;
        }
        if (auto edge = resolve_direction(judgment, i, j)) {
            graph.edges.push_back(std::move(*edge));
        }
    }
    return graph;
}

// ---------------------------------------------------------------------------
// Graph comparison.
// ---------------------------------------------------------------------------

using CanonicalRelation = std::tuple<int, int, RelationLabel>;

// Symmetric labels canonicalize to unordered endpoints so that (2,3) and
// (3,2) compare equal for, say, contrast.
inline CanonicalRelation canonical_relation(const Edge& edge) {
    if (is_symmetric(edge.label) && edge.src > edge.dst) {
        return {edge.dst, edge.src, edge.label};
    }
    return {edge.src, edge.dst, edge.label};
}

inline std::set<CanonicalRelation> canonical_relation_set(const DiscourseGraph& graph) {
    std::set<CanonicalRelation> out;
    for (const Edge& edge : graph.edges) out.insert(canonical_relation(edge));
    return out;
}

// Jaccard overlap of the two graphs' canonical relation sets; 1 when both
// are empty.
inline double graph_consistency(const DiscourseGraph& a, const DiscourseGraph& b) {
    if (a.n_chunks != b.n_chunks) {
        throw ChunkCountMismatch("graphs cover different chunk counts: " +
                                 std::to_string(a.n_chunks) + " vs " +
                                 std::to_string(b.n_chunks));
    }
    const auto sa = canonical_relation_set(a);
    const auto sb = canonical_relation_set(b);
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& r : sa) inter += sb.count(r);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// Relation accuracy against user-supplied gold labels.
// ---------------------------------------------------------------------------

// One gold judgment for a chunk pair; label == nullopt marks a pair the
// annotator judged unrelated.
struct GoldRelation {
    int src = 0;
    int dst = 0;
    std::optional<RelationLabel> label;
};

// Fraction of gold records the graph reproduces. A labeled record is
// correct when the graph stores an edge with the same label and the same
// orientation (either orientation for symmetric labels); an unrelated
// record is correct when the graph has no edge on that pair.
inline double relation_accuracy(const DiscourseGraph& graph,
                                const std::vector<GoldRelation>& gold) {
    if (gold.empty()) throw ConfigError("gold relation list is empty");
    std::size_t correct = 0;
    for (const GoldRelation& record : gold) {
        const Edge* found = nullptr;
        for (const Edge& edge : graph.edges) {
            const bool same = edge.src == record.src && edge.dst == record.dst;
            const bool flipped = edge.src == record.dst && edge.dst == record.src;
            if (same || flipped) {
                found = &edge;
                if (same) break;
            }
        }
        if (!record.label) {
            correct += found == nullptr;
            continue;
        }
        if (!found || found->label != *record.label) continue;
        const bool orientation_ok = is_symmetric(found->label) ||
                                    (found->src == record.src && found->dst == record.dst);
        correct += orientation_ok;
    }
    return static_cast<double>(correct) / static_cast<double>(gold.size());
}

// Gold files are JSONL: {"src": 1, "dst": 2, "label": "cause_effect"} with
// label "none" for unrelated pairs.
inline std::vector<GoldRelation> gold_relations_from_jsonl(const std::string& content) {
    std::vector<GoldRelation> gold;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        const std::string line = trim(content.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("src") || !j.contains("dst") ||
            !j.contains("label")) {
            throw ParseError("bad gold relation record at line " + std::to_string(line_no));
        }
        GoldRelation record;
        record.src = j.at("src").get<int>();
        record.dst = j.at("dst").get<int>();
        const std::string label_text = j.at("label").get<std::string>();
        if (!is_no_relation_text(label_text)) {
            const auto label = relation_label_from(label_text);
            if (!label) {
                throw ParseError("unknown gold label at line " + std::to_string(line_no) +
                                 ": " + label_text);
            }
            record.label = label;
        }
        gold.push_back(record);
    }
    return gold;
}

// --- graph.json ---

inline json to_json(const DiscourseGraph& graph) {
    json edges = json::array();
    for (const Edge& edge : graph.edges) {
        edges.push_back({{"src", edge.src},
                         {"dst", edge.dst},
                         {"label", label_id(edge.label)},
                         {"direction", edge.src < edge.dst ? "forward" : "backward"},
                         {"reason", edge.reason}});
    }
    return {{"n_chunks", graph.n_chunks}, {"window", graph.window}, {"edges", edges}};
}

inline DiscourseGraph graph_from_json(const json& j) {
    DiscourseGraph graph;
    graph.n_chunks = j.at("n_chunks").get<int>();
    graph.window = j.at("window").get<int>();
    for (const json& e : j.at("edges")) {
        Edge edge;
        edge.src = e.at("src").get<int>();
        edge.dst = e.at("dst").get<int>();
        const auto label = relation_label_from(e.at("label").get<std::string>());
        if (!label) throw ParseError("graph.json has unknown label: " + e.at("label").dump());
        edge.label = *label;
        edge.reason = e.value("reason", std::string{});
        graph.edges.push_back(std::move(edge));
    }
    return graph;
}

}  // namespace transgraph
