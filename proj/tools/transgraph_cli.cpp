// Command-line front end for the discourse-graph document translation
// pipeline. See README.md for usage examples.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "transgraph/http_backend.hpp"
#include "transgraph/transgraph.hpp"

namespace fs = std::filesystem;
using namespace transgraph;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string backend;
    std::string model;
    std::string api_key_env;
    std::string strategy;
    std::string src_lang, tgt_lang;
    int T = -1, window = -1, cap = -1, seq_depth = -1, fixed_k = -1;
    std::string tokenizer;
    std::string out;
    std::string failure_policy;
    std::string tie_break;
};

void add_global_options(CLI::App& app, GlobalArgs& args) {
    app.add_option("--config", args.config_path, "JSON configuration file");
    app.add_option("--backend", args.backend, "Backend: mock:<fixture> or http:<endpoint>");
    app.add_option("--model", args.model, "Model name for the http backend");
    app.add_option("--api-key-env", args.api_key_env,
                   "Environment variable holding the API credential");
    app.add_option("--strategy", args.strategy,
                   "sent_mt | one_pass | transgraph | fixed_chunking | no_rel | seq_context");
    app.add_option("--src-lang", args.src_lang, "Source language code");
    app.add_option("--tgt-lang", args.tgt_lang, "Target language code");
    app.add_option("-T,--chunk-tokens", args.T, "Chunking window size in tokens");
    app.add_option("-w,--window", args.window, "Pair window for graph construction");
    app.add_option("--cap", args.cap, "In-neighborhood cap for context packaging");
    app.add_option("--seq-depth", args.seq_depth, "Previous-chunk depth for no_rel/seq_context");
    app.add_option("--fixed-k", args.fixed_k, "Chunk count for the fixed_chunking baseline");
    app.add_option("--tokenizer", args.tokenizer, "Tokenizer id (default | whitespace)");
    app.add_option("--out", args.out, "Output directory");
    app.add_option("--failure-policy", args.failure_policy, "halt | skip");
    app.add_option("--tie-break", args.tie_break, "nearest | earliest");
}

RunConfig build_config(const GlobalArgs& args) {
    RunConfig config;
    if (!args.config_path.empty()) {
        const json j = json::parse(read_file(args.config_path), nullptr, false);
        if (j.is_discarded()) throw ConfigError("invalid JSON config: " + args.config_path);
        apply_config_json(config, j);
    }
    json overrides = json::object();
    if (!args.backend.empty()) overrides["backend"] = args.backend;
    if (!args.strategy.empty()) overrides["strategy"] = args.strategy;
    if (!args.src_lang.empty()) overrides["src_lang"] = args.src_lang;
    if (!args.tgt_lang.empty()) overrides["tgt_lang"] = args.tgt_lang;
    if (args.T > 0) overrides["T"] = args.T;
    if (args.window > 0) overrides["window"] = args.window;
    if (args.cap > 0) overrides["cap"] = args.cap;
    if (args.seq_depth > 0) overrides["seq_depth"] = args.seq_depth;
    if (args.fixed_k > 0) overrides["fixed_k"] = args.fixed_k;
    if (!args.tokenizer.empty()) overrides["tokenizer"] = args.tokenizer;
    if (!args.out.empty()) overrides["out_dir"] = args.out;
    if (!args.failure_policy.empty()) overrides["failure_policy"] = args.failure_policy;
    if (!args.tie_break.empty()) overrides["tie_break"] = args.tie_break;
    apply_config_json(config, overrides);
    if (!args.model.empty()) config.backend.model = args.model;
    if (!args.api_key_env.empty()) config.backend.api_key_env = args.api_key_env;
    config.validate();
    return config;
}

Gateway make_gateway(const RunConfig& config) {
    return Gateway(make_any_backend(config.backend), config.retry,
                   tokenizer_by_id(config.tokenizer_id), config.decoding);
}

std::vector<DocumentRecord> collection_from(const std::string& collection_path,
                                            const std::string& doc_path) {
    if (!collection_path.empty()) return load_collection(collection_path);
    if (doc_path.empty()) throw ConfigError("pass --collection <manifest> or --doc <file>");
    DocumentRecord record;
    record.id = fs::path(doc_path).stem().string();
    record.source_text = read_file(doc_path);
    return {record};
}

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    fs::path path(out_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + out_path);
    out << content;
}

int cmd_chunk(const GlobalArgs& args, const std::string& doc_path, const std::string& out_path) {
    const RunConfig config = build_config(args);
    Gateway gateway = make_gateway(config);
    const std::string document = read_file(doc_path);
    const std::vector<Chunk> chunks =
        chunk_document(document, static_cast<std::size_t>(config.T), gateway, config.src_lang);
    write_or_print(out_path, chunks_to_jsonl(chunks));
    std::cerr << chunks.size() << " chunks, " << gateway.ledger().calls << " LLM calls\n";
    return 0;
}

int cmd_graph(const GlobalArgs& args, const std::string& doc_path,
              const std::string& chunks_path, const std::string& out_dir) {
    const RunConfig config = build_config(args);
    Gateway gateway = make_gateway(config);
    std::vector<Chunk> chunks;
    if (!chunks_path.empty()) {
        chunks = chunks_from_jsonl(read_file(chunks_path));
    } else {
        chunks = chunk_document(read_file(doc_path), static_cast<std::size_t>(config.T),
                                gateway, config.src_lang);
    }
    const DiscourseGraph graph = build_graph(chunks, config.window, gateway);
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    fs::create_directories(dir);
    write_or_print((dir / "graph.json").string(), to_json(graph).dump(2) + "\n");
    write_or_print((dir / "graph.dot").string(), export_graph_dot(graph));
    std::cerr << graph.edges.size() << " edges over " << graph.n_chunks << " chunks, "
              << gateway.ledger().calls << " LLM calls\n";
    return 0;
}

int cmd_translate(const GlobalArgs& args, const std::string& collection_path,
                  const std::string& doc_path) {
    const RunConfig config = build_config(args);
    const std::vector<DocumentRecord> collection = collection_from(collection_path, doc_path);
    const RunArtifacts artifacts = run_pipeline(config, collection, &make_any_backend);
    std::cout << "run " << artifacts.run_id << " -> " << artifacts.run_dir << "\n";
    bool any_failed = false;
    for (const DocumentRunResult& doc : artifacts.documents) {
        std::cout << "  " << doc.id << ": " << (doc.ok ? "ok" : "FAILED") << ", "
                  << doc.ledger.calls << " calls, " << doc.ledger.total_tokens()
                  << " tokens\n";
        any_failed = any_failed || !doc.ok;
    }
    return any_failed ? 1 : 0;
}

int cmd_evaluate(const std::string& hyp_path, const std::string& ref_path,
                 const std::string& terms_path, const std::string& external_path,
                 const std::string& graph_path, const std::string& gold_path,
                 const std::string& doc_id, const std::string& tokenizer_id,
                 const std::string& out_path) {
    const std::string hypothesis = hyp_path.empty() ? std::string{} : read_file(hyp_path);
    MetricsReport report;
    report.tokenizer_id = tokenizer_id.empty() ? "default" : tokenizer_id;
    const TokenizerFn tokenizer = tokenizer_by_id(report.tokenizer_id);
    if (!tokenizer) throw ConfigError("unknown tokenizer: " + tokenizer_id);
    if (!ref_path.empty()) {
        report.d_bleu = d_bleu(hypothesis, read_file(ref_path), 4, tokenizer);
    }
    if (!terms_path.empty()) {
        report.terminology_accuracy =
            terminology_accuracy(hypothesis, parse_term_lines(read_file(terms_path)));
    }
    if (!external_path.empty()) {
        const std::string id = doc_id.empty() ? fs::path(hyp_path).stem().string() : doc_id;
        const auto scores = ingest_external_scores(external_path, {id});
        if (const auto it = scores.find(id); it != scores.end()) {
            report.external_scores = it->second;
        }
    }
    if (!gold_path.empty()) {
        if (graph_path.empty()) throw ConfigError("--gold needs --graph");
        const json j = json::parse(read_file(graph_path), nullptr, false);
        if (j.is_discarded()) throw ParseError("invalid graph.json: " + graph_path);
        report.external_scores["graph_accuracy"] = relation_accuracy(
            graph_from_json(j), gold_relations_from_jsonl(read_file(gold_path)));
    }
    write_or_print(out_path, to_json(report).dump(2) + "\n");
    return 0;
}

int cmd_cohesion(const GlobalArgs& args, const std::string& source_path,
                 const std::string& translation_path, const std::string& dimension_name,
                 const std::string& pre_annotated_path, const std::string& out_path) {
    std::vector<CohesionDimension> dimensions;
    if (dimension_name == "both" || dimension_name.empty()) {
        dimensions = {CohesionDimension::kCoreference, CohesionDimension::kConjunction};
    } else {
        const auto dim = cohesion_dimension_from(dimension_name);
        if (!dim) throw ConfigError("dimension must be coreference, conjunction or both");
        dimensions = {*dim};
    }

    json out = json::object();
    if (!pre_annotated_path.empty()) {
        // Score an already-evaluated annotation without a judge call.
        if (dimensions.size() != 1) {
            throw ConfigError("--pre-annotated needs an explicit --dimension");
        }
        const AnnotatedText annotated =
            parse_annotations(read_file(pre_annotated_path), dimensions.front(), true);
        const CohesionScore score = score_cohesion(annotated.spans);
        out[to_string(dimensions.front())] = to_json(score);
    } else {
        const RunConfig config = build_config(args);
        Gateway gateway = make_gateway(config);
        const std::string source = read_file(source_path);
        const std::string translation = read_file(translation_path);
        for (const CohesionDimension dim : dimensions) {
            const CohesionResult result = evaluate_cohesion(source, translation, dim, gateway);
            out[to_string(dim)] = to_json(result);
        }
    }
    write_or_print(out_path, out.dump(2) + "\n");
    return 0;
}

int cmd_compare(const std::string& run_a, const std::string& run_b, const std::string& out_path) {
    const ComparisonReport report = compare_runs(run_a, run_b);
    if (!out_path.empty()) write_or_print(out_path, to_json(report).dump(2) + "\n");
    std::cout << format_comparison(report);
    return 0;
}

int cmd_export_dot(const std::string& graph_path, const std::string& out_path) {
    const json j = json::parse(read_file(graph_path), nullptr, false);
    if (j.is_discarded()) throw ParseError("invalid graph.json: " + graph_path);
    write_or_print(out_path, export_graph_dot(graph_from_json(j)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discourse-graph guided document translation pipeline"};
    app.require_subcommand(1);
    GlobalArgs args;

    auto* chunk_cmd = app.add_subcommand("chunk", "Segment and chunk one document");
    std::string chunk_doc, chunk_out;
    add_global_options(*chunk_cmd, args);
    chunk_cmd->add_option("--doc", chunk_doc, "Source document")->required();
    chunk_cmd->add_option("--out-file", chunk_out, "chunks.jsonl destination (stdout if omitted)");

    auto* graph_cmd = app.add_subcommand("graph", "Build the discourse graph for one document");
    std::string graph_doc, graph_chunks, graph_out;
    add_global_options(*graph_cmd, args);
    graph_cmd->add_option("--doc", graph_doc, "Source document");
    graph_cmd->add_option("--chunks", graph_chunks, "Existing chunks.jsonl (skips chunking)");
    graph_cmd->add_option("--out-dir", graph_out, "Directory for graph.json / graph.dot");

    auto* translate_cmd = app.add_subcommand("translate", "Run a translation strategy");
    std::string translate_collection, translate_doc;
    add_global_options(*translate_cmd, args);
    translate_cmd->add_option("--collection", translate_collection, "Collection manifest");
    translate_cmd->add_option("--doc", translate_doc, "Single source document");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a translation");
    std::string eval_hyp, eval_ref, eval_terms, eval_external, eval_doc_id, eval_tok, eval_out;
    evaluate_cmd->add_option("--hypothesis", eval_hyp, "System output")->required();
    evaluate_cmd->add_option("--reference", eval_ref, "Reference translation");
    evaluate_cmd->add_option("--terms", eval_terms, "Term pairs (source<TAB>target per line)");
    evaluate_cmd->add_option("--external", eval_external, "External score file (jsonl)");
    evaluate_cmd->add_option("--doc-id", eval_doc_id, "Document id for external scores");
    evaluate_cmd->add_option("--tokenizer", eval_tok, "Tokenizer id");
    evaluate_cmd->add_option("--out-file", eval_out, "metrics.json destination");

    auto* cohesion_cmd = app.add_subcommand("cohesion", "LLM-as-judge cohesion evaluation");
    std::string coh_source, coh_translation, coh_dimension = "both", coh_pre, coh_out;
    add_global_options(*cohesion_cmd, args);
    cohesion_cmd->add_option("--source", coh_source, "Source document");
    cohesion_cmd->add_option("--translation", coh_translation, "Translated document");
    cohesion_cmd->add_option("--dimension", coh_dimension, "coreference | conjunction | both");
    cohesion_cmd->add_option("--pre-annotated", coh_pre,
                             "Score an already-evaluated annotation file (no judge call)");
    cohesion_cmd->add_option("--out-file", coh_out, "cohesion.json destination");

    auto* compare_cmd = app.add_subcommand("compare", "Compare two runs");
    std::string cmp_a, cmp_b, cmp_out;
    compare_cmd->add_option("--run-a", cmp_a, "First run directory")->required();
    compare_cmd->add_option("--run-b", cmp_b, "Second run directory")->required();
    compare_cmd->add_option("--out-file", cmp_out, "comparison.json destination");

    auto* dot_cmd = app.add_subcommand("export-dot", "Convert graph.json to DOT");
    std::string dot_graph, dot_out;
    dot_cmd->add_option("--graph", dot_graph, "graph.json path")->required();
    dot_cmd->add_option("--out-file", dot_out, "DOT destination (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (chunk_cmd->parsed()) return cmd_chunk(args, chunk_doc, chunk_out);
        if (graph_cmd->parsed()) return cmd_graph(args, graph_doc, graph_chunks, graph_out);
        if (translate_cmd->parsed()) return cmd_translate(args, translate_collection, translate_doc);
        if (evaluate_cmd->parsed()) {
            return cmd_evaluate(eval_hyp, eval_ref, eval_terms, eval_external, eval_doc_id,
                                eval_tok, eval_out);
        }
        if (cohesion_cmd->parsed()) {
            return cmd_cohesion(args, coh_source, coh_translation, coh_dimension, coh_pre,
                                coh_out);
        }
        if (compare_cmd->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out);
        if (dot_cmd->parsed()) return cmd_export_dot(dot_graph, dot_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
