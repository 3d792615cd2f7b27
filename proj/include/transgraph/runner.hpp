#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "transgraph/baselines.hpp"
#include "transgraph/chunker.hpp"
#include "transgraph/collection.hpp"
#include "transgraph/cohesion.hpp"
#include "transgraph/errors.hpp"
#include "transgraph/gateway.hpp"
#include "transgraph/graph.hpp"
#include "transgraph/metrics.hpp"
#include "transgraph/translator.hpp"

namespace transgraph {

// ---------------------------------------------------------------------------
// Run configuration.
// ---------------------------------------------------------------------------

struct BackendSpec {
    std::string kind = "mock";  // "mock" or "http"
    std::string fixture;        // mock fixture path
    std::string endpoint;       // http base URL
    std::string model;
    std::string api_key_env = "TRANSGRAPH_API_KEY";

    // Parses "mock:<fixture>" or "http:<endpoint>".
    static BackendSpec parse(const std::string& text) {
        BackendSpec spec;
        const std::size_t colon = text.find(':');
        if (colon == std::string::npos) throw ConfigError("backend must be mock:<fixture> or http:<endpoint>");
        const std::string kind = text.substr(0, colon);
        const std::string rest = text.substr(colon + 1);
        if (kind == "mock") {
            spec.kind = "mock";
            spec.fixture = rest;
        } else if (kind == "http") {
            spec.kind = "http";
            spec.endpoint = rest;
        } else {
            throw ConfigError("unknown backend kind: " + kind);
        }
        return spec;
    }
};

enum class FailurePolicy { kHalt, kSkip };

struct RunConfig {
    StrategyId strategy = StrategyId::kTransgraph;
    std::string src_lang = "en";
    std::string tgt_lang = "de";
    int T = 100;       // chunking window, in tokens
    int window = 10;   // pair window w
    int cap = 5;       // in-neighborhood cap
    int fixed_k = 10;  // chunk count for the fixed-size baseline
    int seq_depth = 5; // previous-chunk depth for no_rel / seq_context
    bool seq_attach_labels = true;  // seq_context picks up graph labels
    TieBreak tie_break = TieBreak::kNearest;
    std::string tokenizer_id = "default";
    BackendSpec backend;
    DecodingParams decoding;
    RetryPolicy retry;
    FailurePolicy failure_policy = FailurePolicy::kHalt;
    std::string out_dir = "runs";
    std::string judge_model = "gemini-2.5-flash";  // documented default name only

    void validate() const {
        if (T < 1) throw ConfigError("T must be >= 1");
        if (window < 1) throw ConfigError("window must be >= 1");
        if (cap < 1) throw ConfigError("cap must be >= 1");
        if (fixed_k < 1) throw ConfigError("fixed_k must be >= 1");
        if (!tokenizer_by_id(tokenizer_id)) throw ConfigError("unknown tokenizer: " + tokenizer_id);
        decoding.validate();
    }
};

// Everything that determines run content; out_dir is a deployment detail
// and deliberately absent so identical runs hash and serialize identically
// wherever they land.
inline json canonical_config_json(const RunConfig& config) {
    return {{"strategy", to_string(config.strategy)},
            {"src_lang", config.src_lang},
            {"tgt_lang", config.tgt_lang},
            {"T", config.T},
            {"window", config.window},
            {"cap", config.cap},
            {"fixed_k", config.fixed_k},
            {"seq_depth", config.seq_depth},
            {"seq_attach_labels", config.seq_attach_labels},
            {"tie_break", config.tie_break == TieBreak::kNearest ? "nearest" : "earliest"},
            {"tokenizer", config.tokenizer_id},
            {"backend",
             {{"kind", config.backend.kind},
              {"fixture", config.backend.fixture},
              {"endpoint", config.backend.endpoint},
              {"model", config.backend.model},
              {"api_key_env", config.backend.api_key_env}}},
            {"decoding",
             {{"temperature", config.decoding.temperature},
              {"top_p", config.decoding.top_p},
              {"max_output_tokens", config.decoding.max_output_tokens}}},
            {"failure_policy", config.failure_policy == FailurePolicy::kHalt ? "halt" : "skip"},
            {"judge_model", config.judge_model}};
}

inline json to_json(const RunConfig& config) {
    json j = canonical_config_json(config);
    j["out_dir"] = config.out_dir;
    return j;
}

inline void apply_config_json(RunConfig& config, const json& j) {
    if (j.contains("strategy")) {
        const auto strategy = strategy_from(j.at("strategy").get<std::string>());
        if (!strategy) throw ConfigError("unknown strategy: " + j.at("strategy").dump());
        config.strategy = *strategy;
    }
    if (j.contains("src_lang")) config.src_lang = j.at("src_lang").get<std::string>();
    if (j.contains("tgt_lang")) config.tgt_lang = j.at("tgt_lang").get<std::string>();
    if (j.contains("T")) config.T = j.at("T").get<int>();
    if (j.contains("window")) config.window = j.at("window").get<int>();
    if (j.contains("cap")) config.cap = j.at("cap").get<int>();
    if (j.contains("fixed_k")) config.fixed_k = j.at("fixed_k").get<int>();
    if (j.contains("seq_depth")) config.seq_depth = j.at("seq_depth").get<int>();
    if (j.contains("seq_attach_labels")) config.seq_attach_labels = j.at("seq_attach_labels").get<bool>();
    if (j.contains("tie_break")) {
        const std::string mode = j.at("tie_break").get<std::string>();
        if (mode == "nearest") {
            config.tie_break = TieBreak::kNearest;
        } else if (mode == "earliest") {
            config.tie_break = TieBreak::kEarliest;
        } else {
            throw ConfigError("tie_break must be nearest or earliest");
        }
    }
    if (j.contains("tokenizer")) config.tokenizer_id = j.at("tokenizer").get<std::string>();
    if (j.contains("backend")) {
        const json& b = j.at("backend");
        if (b.is_string()) {
            config.backend = BackendSpec::parse(b.get<std::string>());
        } else {
            if (b.contains("kind")) config.backend.kind = b.at("kind").get<std::string>();
            if (b.contains("fixture")) config.backend.fixture = b.at("fixture").get<std::string>();
            if (b.contains("endpoint")) config.backend.endpoint = b.at("endpoint").get<std::string>();
            if (b.contains("model")) config.backend.model = b.at("model").get<std::string>();
            if (b.contains("api_key_env")) config.backend.api_key_env = b.at("api_key_env").get<std::string>();
        }
    }
    if (j.contains("decoding")) {
        const json& d = j.at("decoding");
        if (d.contains("temperature")) config.decoding.temperature = d.at("temperature").get<double>();
        if (d.contains("top_p")) config.decoding.top_p = d.at("top_p").get<double>();
        if (d.contains("max_output_tokens")) config.decoding.max_output_tokens = d.at("max_output_tokens").get<int>();
    }
    if (j.contains("retry")) {
        const json& r = j.at("retry");
        if (r.contains("transport_retries")) config.retry.transport_retries = r.at("transport_retries").get<int>();
        if (r.contains("structure_retries")) config.retry.structure_retries = r.at("structure_retries").get<int>();
        if (r.contains("backoff_base_ms")) config.retry.backoff_base_ms = r.at("backoff_base_ms").get<int>();
    }
    if (j.contains("failure_policy")) {
        const std::string policy = j.at("failure_policy").get<std::string>();
        if (policy == "halt") {
            config.failure_policy = FailurePolicy::kHalt;
        } else if (policy == "skip") {
            config.failure_policy = FailurePolicy::kSkip;
        } else {
            throw ConfigError("failure_policy must be halt or skip");
        }
    }
    if (j.contains("judge_model")) config.judge_model = j.at("judge_model").get<std::string>();
    if (j.contains("out_dir")) config.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("out")) config.out_dir = j.at("out").get<std::string>();
}

// Backend construction is a customization point so the CLI can add the
// HTTP backend without every library user paying for the dependency.
using BackendFactory = std::shared_ptr<Backend> (*)(const BackendSpec&);

inline std::shared_ptr<Backend> make_mock_backend(const BackendSpec& spec) {
    if (spec.kind != "mock") {
        throw ConfigError("no factory registered for backend kind '" + spec.kind + "'");
    }
    if (spec.fixture.empty()) throw ConfigError("mock backend needs a fixture path");
    return MockBackend::from_file(spec.fixture);
}

// ---------------------------------------------------------------------------
// Strategy execution for one document.
// ---------------------------------------------------------------------------

struct StrategyRun {
    TranslatedDocument translation;
    std::vector<Chunk> chunks;                 // empty for sent_mt / one_pass
    std::optional<DiscourseGraph> graph;
};

inline StrategyRun run_strategy(const RunConfig& config, const std::string& source,
                                Gateway& gateway) {
    StrategyRun run;
    const bool halt = config.failure_policy == FailurePolicy::kHalt;
    TranslateOptions options;
    options.src_lang = config.src_lang;
    options.tgt_lang = config.tgt_lang;
    options.cap = config.cap;
    options.tie_break = config.tie_break;
    options.halt_on_error = halt;

    switch (config.strategy) {
        case StrategyId::kSentMt:
            run.translation = translate_sentence_level(source, config.src_lang, config.tgt_lang,
                                                       gateway, halt, config.src_lang);
            return run;
        case StrategyId::kOnePass:
            run.translation = translate_single_pass(source, config.src_lang, config.tgt_lang, gateway);
            return run;
        case StrategyId::kTransgraph:
            run.chunks = chunk_document(source, static_cast<std::size_t>(config.T), gateway,
                                        config.src_lang);
            run.graph = build_graph(run.chunks, config.window, gateway);
            run.translation = translate_document(run.chunks, *run.graph, options, gateway);
            return run;
        case StrategyId::kFixedChunking:
            run.chunks = fixed_size_chunks(source, config.fixed_k, config.src_lang);
            run.graph = build_graph(run.chunks, config.window, gateway);
            run.translation = translate_document(run.chunks, *run.graph, options, gateway);
            return run;
        case StrategyId::kNoRel:
        case StrategyId::kSeqContext: {
            run.chunks = chunk_document(source, static_cast<std::size_t>(config.T), gateway,
                                        config.src_lang);
            const bool with_graph = config.strategy == StrategyId::kSeqContext;
            if (with_graph) run.graph = build_graph(run.chunks, config.window, gateway);
            const DiscourseGraph* graph_ptr =
                with_graph && config.seq_attach_labels ? &*run.graph : nullptr;
            const ContextRenderMode mode = with_graph ? ContextRenderMode::kWithRelations
                                                      : ContextRenderMode::kOmitRelations;
            for (const Chunk& chunk : run.chunks) {
                const ContextPackage package =
                    sequential_context(chunk.id, config.seq_depth, run.chunks, graph_ptr);
                try {
                    run.translation.chunks.push_back(translate_chunk(
                        chunk, package, config.src_lang, config.tgt_lang, gateway, mode));
                } catch (const TranslationError& e) {
                    if (halt) throw;
                    TranslatedChunk failed;
                    failed.chunk_id = chunk.id;
                    failed.source_text = chunk.text;
                    failed.failed = true;
                    run.translation.chunks.push_back(std::move(failed));
                    std::cerr << "[transgraph] " << e.what() << " (skipped)\n";
                }
            }
            run.translation.text = assemble_translation(run.translation.chunks, run.chunks);
            return run;
        }
    }
    throw ConfigError("unhandled strategy");
}

// ---------------------------------------------------------------------------
// DOT export.
// ---------------------------------------------------------------------------

// One node per chunk, one labeled directed edge per stored edge, in
// deterministic order.
inline std::string export_graph_dot(const DiscourseGraph& graph) {
    std::ostringstream out;
    out << "digraph discourse {\n";
    out << "  rankdir=LR;\n";
    for (int id = 1; id <= graph.n_chunks; ++id) {
        out << "  c" << id << " [label=\"c" << id << "\"];\n";
    }
    for (const Edge& edge : graph.edges) {
        out << "  c" << edge.src << " -> c" << edge.dst << " [label=\"" << label_id(edge.label)
            << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Pipeline runs over collections.
// ---------------------------------------------------------------------------

struct DocumentRunResult {
    std::string id;
    std::string dir;                               // relative to the run dir
    std::map<std::string, std::string> artifacts;  // name -> filename in dir
    CostLedger ledger;
    bool ok = true;
    std::string error;
};

struct RunArtifacts {
    std::string run_id;
    std::string run_dir;
    std::vector<DocumentRunResult> documents;
    CostLedger totals;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ManifestError("cannot write file: " + path.string());
    out << content;
}

inline std::string run_id_for(const RunConfig& config,
                              const std::vector<DocumentRecord>& collection) {
    std::uint64_t h = fnv1a64(canonical_config_json(config).dump());
    for (const DocumentRecord& doc : collection) {
        h = fnv1a64(doc.id, h);
        h = fnv1a64(doc.source_text, h);
        h = fnv1a64(doc.reference_text, h);
        for (const TermPair& term : doc.terms) {
            h = fnv1a64(term.source_term, h);
            h = fnv1a64(term.target_term, h);
        }
    }
    return to_hex64(h);
}

}  // namespace detail

// Runs the configured strategy over every document, writes the artifact
// tree under out_dir/<run-id>/<doc-id>/ and a run manifest beside it. Run
// ids are content-addressed from the config and collection so accidental
// re-runs land in the same place.
inline RunArtifacts run_pipeline(const RunConfig& config,
                                 const std::vector<DocumentRecord>& collection,
                                 BackendFactory backend_factory = &make_mock_backend) {
    namespace fs = std::filesystem;
    config.validate();
    const TokenizerFn tokenizer = tokenizer_by_id(config.tokenizer_id);

    RunArtifacts artifacts;
    artifacts.run_id = detail::run_id_for(config, collection);
    const fs::path run_dir = fs::path(config.out_dir) / artifacts.run_id;
    artifacts.run_dir = run_dir.string();
    fs::create_directories(run_dir);

    for (const DocumentRecord& doc : collection) {
        DocumentRunResult result;
        result.id = doc.id;
        const fs::path doc_dir = run_dir / doc.id;
        fs::create_directories(doc_dir);
        result.dir = doc.id;

        // A fresh backend and gateway per document keeps scripted ordinals
        // and ledgers independent of document order.
        Gateway gateway(backend_factory(config.backend), config.retry, tokenizer,
                        config.decoding);
        try {
            const StrategyRun run = run_strategy(config, doc.source_text, gateway);

            if (!run.chunks.empty()) {
                detail::write_file(doc_dir / "chunks.jsonl", chunks_to_jsonl(run.chunks));
                result.artifacts["chunks"] = "chunks.jsonl";
            }
            if (run.graph) {
                detail::write_file(doc_dir / "graph.json", to_json(*run.graph).dump(2) + "\n");
                result.artifacts["graph"] = "graph.json";
                detail::write_file(doc_dir / "graph.dot", export_graph_dot(*run.graph));
                result.artifacts["graph_dot"] = "graph.dot";
            }
            detail::write_file(doc_dir / "translations.jsonl",
                               translations_to_jsonl(run.translation));
            result.artifacts["translations"] = "translations.jsonl";
            detail::write_file(doc_dir / "output.txt", run.translation.text);
            result.artifacts["output"] = "output.txt";

            MetricsReport report;
            report.tokenizer_id = config.tokenizer_id;
            report.cost = gateway.ledger();
            if (doc.has_reference) {
                try {
                    report.d_bleu = d_bleu(run.translation.text, doc.reference_text, 4, tokenizer);
                } catch (const Error& e) {
                    std::cerr << "[transgraph] d-BLEU skipped for " << doc.id << ": "
                              << e.what() << "\n";
                }
            }
            if (!doc.terms.empty()) {
                try {
                    report.terminology_accuracy =
                        terminology_accuracy(run.translation.text, doc.terms);
                } catch (const Error& e) {
                    std::cerr << "[transgraph] terminology accuracy skipped for " << doc.id
                              << ": " << e.what() << "\n";
                }
            }
            detail::write_file(doc_dir / "metrics.json", to_json(report).dump(2) + "\n");
            result.artifacts["metrics"] = "metrics.json";
        } catch (const Error& e) {
            result.ok = false;
            result.error = e.what();
            result.ledger = gateway.ledger();
            if (config.failure_policy == FailurePolicy::kHalt) {
                artifacts.documents.push_back(std::move(result));
                throw;
            }
            std::cerr << "[transgraph] document " << doc.id << " failed: " << e.what()
                      << " (skipped)\n";
        }
        result.ledger = gateway.ledger();
        artifacts.totals += result.ledger;
        artifacts.documents.push_back(std::move(result));
    }

    json manifest = {{"run_id", artifacts.run_id},
                     {"config", canonical_config_json(config)},
                     {"totals", to_json(artifacts.totals)}};
    json docs = json::array();
    for (const DocumentRunResult& result : artifacts.documents) {
        json entry = {{"id", result.id},
                      {"dir", result.dir},
                      {"status", result.ok ? "ok" : "failed"},
                      {"ledger", to_json(result.ledger)}};
        json names = json::object();
        for (const auto& [name, path] : result.artifacts) names[name] = path;
        entry["artifacts"] = names;
        if (!result.ok) entry["error"] = result.error;
        docs.push_back(std::move(entry));
    }
    manifest["documents"] = docs;
    detail::write_file(run_dir / "manifest.json", manifest.dump(2) + "\n");
    return artifacts;
}

// ---------------------------------------------------------------------------
// Run comparison.
// ---------------------------------------------------------------------------

struct ComparisonRow {
    std::string id;
    std::optional<double> d_bleu_a, d_bleu_b;
    std::optional<double> term_a, term_b;
    std::int64_t calls_a = 0, calls_b = 0;
    std::int64_t tokens_a = 0, tokens_b = 0;
};

struct ComparisonReport {
    std::string run_a, run_b;
    std::vector<ComparisonRow> rows;
};

namespace detail {

inline json load_json_file(const std::filesystem::path& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw ParseError("invalid JSON in " + path.string());
    return j;
}

}  // namespace detail

// Side-by-side metric and cost columns for two runs over the same
// collection.
inline ComparisonReport compare_runs(const std::string& run_a_dir, const std::string& run_b_dir) {
    namespace fs = std::filesystem;
    const json manifest_a = detail::load_json_file(fs::path(run_a_dir) / "manifest.json");
    const json manifest_b = detail::load_json_file(fs::path(run_b_dir) / "manifest.json");

    std::map<std::string, json> docs_a, docs_b;
    for (const json& d : manifest_a.at("documents")) docs_a[d.at("id").get<std::string>()] = d;
    for (const json& d : manifest_b.at("documents")) docs_b[d.at("id").get<std::string>()] = d;
    if (docs_a.size() != docs_b.size()) {
        throw CollectionMismatch("runs cover different document counts");
    }
    for (const auto& [id, unused] : docs_a) {
        if (docs_b.find(id) == docs_b.end()) {
            throw CollectionMismatch("document " + id + " missing from second run");
        }
    }

    ComparisonReport report;
    report.run_a = manifest_a.at("run_id").get<std::string>();
    report.run_b = manifest_b.at("run_id").get<std::string>();
    for (const auto& [id, doc_a] : docs_a) {
        const json& doc_b = docs_b.at(id);
        ComparisonRow row;
        row.id = id;
        const auto fill = [](const std::string& run_dir, const json& doc,
                             std::optional<double>& bleu, std::optional<double>& term,
                             std::int64_t& calls, std::int64_t& tokens) {
            const json& artifacts = doc.at("artifacts");
            if (artifacts.contains("metrics")) {
                const json metrics = detail::load_json_file(
                    fs::path(run_dir) / doc.at("dir").get<std::string>() /
                    artifacts.at("metrics").get<std::string>());
                if (metrics.contains("d_bleu")) bleu = metrics.at("d_bleu").get<double>();
                if (metrics.contains("terminology_accuracy")) {
                    term = metrics.at("terminology_accuracy").get<double>();
                }
            }
            const json& ledger = doc.at("ledger");
            calls = ledger.at("calls").get<std::int64_t>();
            tokens = ledger.at("total_tokens").get<std::int64_t>();
        };
        fill(run_a_dir, doc_a, row.d_bleu_a, row.term_a, row.calls_a, row.tokens_a);
        fill(run_b_dir, doc_b, row.d_bleu_b, row.term_b, row.calls_b, row.tokens_b);
        report.rows.push_back(std::move(row));
    }
    return report;
}

inline json to_json(const ComparisonReport& report) {
    json rows = json::array();
    for (const ComparisonRow& row : report.rows) {
        json entry = {{"id", row.id},
                      {"calls", {{"a", row.calls_a}, {"b", row.calls_b},
                                 {"delta", row.calls_b - row.calls_a}}},
                      {"total_tokens", {{"a", row.tokens_a}, {"b", row.tokens_b},
                                        {"delta", row.tokens_b - row.tokens_a}}}};
        if (row.d_bleu_a && row.d_bleu_b) {
            entry["d_bleu"] = {{"a", *row.d_bleu_a}, {"b", *row.d_bleu_b},
                               {"delta", *row.d_bleu_b - *row.d_bleu_a}};
        }
        if (row.term_a && row.term_b) {
            entry["terminology_accuracy"] = {{"a", *row.term_a}, {"b", *row.term_b},
                                             {"delta", *row.term_b - *row.term_a}};
        }
        rows.push_back(std::move(entry));
    }
    return {{"run_a", report.run_a}, {"run_b", report.run_b}, {"documents", rows}};
}

inline std::string format_comparison(const ComparisonReport& report) {
    std::ostringstream out;
    out << "run A: " << report.run_a << "\nrun B: " << report.run_b << "\n";
    for (const ComparisonRow& row : report.rows) {
        out << row.id << ":";
        if (row.d_bleu_a && row.d_bleu_b) {
            out << "  d-BLEU " << *row.d_bleu_a << " -> " << *row.d_bleu_b;
        }
        if (row.term_a && row.term_b) {
            out << "  term-acc " << *row.term_a << " -> " << *row.term_b;
        }
        out << "  calls " << row.calls_a << " -> " << row.calls_b;
        out << "  tokens " << row.tokens_a << " -> " << row.tokens_b << "\n";
    }
    return out.str();
}

}  // namespace transgraph
