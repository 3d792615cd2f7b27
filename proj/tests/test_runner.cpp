#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>

#include "test_support.hpp"
#include "transgraph/transgraph.hpp"

using namespace transgraph;
using testsupport::proposal_json;
using testsupport::relation_json;
using Catch::Approx;

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tg_runner" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Three documents of three sentences each, with references and terms, plus
// a fixture that answers chunking, relations and translations for all of
// them.
struct FixtureCollection {
    fs::path dir;
    std::string manifest_path;
    std::string fixture_path;
};

FixtureCollection write_fixture_collection() {
    FixtureCollection fc;
    fc.dir = fresh_dir("collection");
    const std::vector<std::string> ids = {"doc1", "doc2", "doc3"};
    json documents = json::array();
    for (std::size_t d = 0; d < ids.size(); ++d) {
        const std::string tag = ids[d];
        const std::string source = "The " + tag + " graph helps. The " + tag +
                                   " terms persist. Costs stay low.";
        const std::string reference = "Der " + tag + " Graph hilft. Die " + tag +
                                      " Begriffe bleiben. Kosten bleiben niedrig.";
        std::ofstream(fc.dir / (tag + ".src.txt")) << source;
        std::ofstream(fc.dir / (tag + ".ref.txt")) << reference;
        std::ofstream(fc.dir / (tag + ".terms.tsv")) << "graph\tGraph\nterms\tBegriffe\n";
        documents.push_back({{"id", tag},
                             {"source", tag + ".src.txt"},
                             {"reference", tag + ".ref.txt"},
                             {"terms", tag + ".terms.tsv"}});
    }
    const json manifest = {{"documents", documents}};
    fc.manifest_path = (fc.dir / "manifest.json").string();
    std::ofstream(fc.dir / "manifest.json") << manifest.dump(2);

    std::ofstream fixture(fc.dir / "fixture.jsonl");
    // one window per document (T is large), grouped {0}, {1,2}
    fixture << json{{"tag", "chunk"}, {"ordinal", 0},
                    {"response", proposal_json({{0}, {1, 2}})}}.dump()
            << "\n";
    // one pair (1,2) per document
    fixture << json{{"tag", "relation"}, {"ordinal", 0},
                    {"response", relation_json("terminology_definition", "forward",
                                               "first chunk introduces the term")}}
                   .dump()
            << "\n";
    for (const std::string& tag : ids) {
        // the "C. SPECIFIC" suffix pins the needle to the current-chunk
        // section so related-chunk echoes of the same text cannot match
        fixture << json{{"tag", "translate"},
                        {"contains", "The " + tag + " graph helps.\n\nC. SPECIFIC"},
                        {"response", "Der " + tag + " Graph hilft."}}.dump()
                << "\n";
        fixture << json{{"tag", "translate"},
                        {"contains", "The " + tag + " terms persist. Costs stay low."},
                        {"response", "Die " + tag + " Begriffe bleiben. Kosten bleiben niedrig."}}
                       .dump()
                << "\n";
        // single-pass and sentence-level fall back to a tag default
    }
    fixture << json{{"tag", "translate"}, {"response", "Pauschale Antwort."}}.dump() << "\n";
    fixture.close();
    fc.fixture_path = (fc.dir / "fixture.jsonl").string();
    return fc;
}

RunConfig config_for(const FixtureCollection& fc, StrategyId strategy, const fs::path& out) {
    RunConfig config;
    config.strategy = strategy;
    config.backend.kind = "mock";
    config.backend.fixture = fc.fixture_path;
    config.retry.backoff_base_ms = 0;
    config.out_dir = out.string();
    return config;
}

std::map<std::string, std::string> slurp_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            files[fs::relative(entry.path(), root).string()] = read_file(entry.path());
        }
    }
    return files;
}

}  // namespace

TEST_CASE("load_collection resolves files and orders by id") {
    const FixtureCollection fc = write_fixture_collection();
    const auto records = load_collection(fc.manifest_path);
    REQUIRE(records.size() == 3);
    CHECK(records[0].id == "doc1");
    CHECK(records[2].id == "doc3");
    CHECK(records[0].has_reference);
    CHECK(records[0].terms.size() == 2);
    CHECK(records[0].source_text.find("doc1 graph helps") != std::string::npos);
}

TEST_CASE("load_collection rejects duplicates and bad manifests") {
    const fs::path dir = fresh_dir("badmanifest");
    std::ofstream(dir / "m.json") << R"({"documents": [
        {"id": "a", "source_text": "X."}, {"id": "a", "source_text": "Y."}]})";
    CHECK_THROWS_AS(load_collection((dir / "m.json").string()), DuplicateId);
    std::ofstream(dir / "m2.json") << R"({"nope": 1})";
    CHECK_THROWS_AS(load_collection((dir / "m2.json").string()), ManifestError);
    CHECK_THROWS_AS(load_collection((dir / "missing.json").string()), ManifestError);
}

TEST_CASE("documents without terms simply skip the terminology metric") {
    const fs::path dir = fresh_dir("noterms");
    std::ofstream(dir / "m.json")
        << R"({"documents": [{"id": "a", "source_text": "One. Two.", "reference_text": "Eins. Zwei."}]})";
    const auto records = load_collection((dir / "m.json").string());
    REQUIRE(records.size() == 1);
    CHECK(records[0].terms.empty());
}

TEST_CASE("transgraph pipeline writes all artifacts with contracted call counts") {
    const FixtureCollection fc = write_fixture_collection();
    const auto records = load_collection(fc.manifest_path);
    const RunConfig config = config_for(fc, StrategyId::kTransgraph, fresh_dir("run_tg"));
    const RunArtifacts artifacts = run_pipeline(config, records);

    REQUIRE(artifacts.documents.size() == 3);
    for (const DocumentRunResult& doc : artifacts.documents) {
        CHECK(doc.ok);
        for (const char* name : {"chunks", "graph", "graph_dot", "translations", "output",
                                 "metrics"}) {
            REQUIRE(doc.artifacts.count(name) == 1);
            CHECK(fs::exists(fs::path(artifacts.run_dir) / doc.dir / doc.artifacts.at(name)));
        }
        // 1 window + |P| = 1 pair + N = 2 chunks
        CHECK(doc.ledger.per_tag.at("chunk").calls == 1);
        CHECK(doc.ledger.per_tag.at("relation").calls == 1);
        CHECK(doc.ledger.per_tag.at("translate").calls == 2);
    }
    // artifact files round-trip through their readers
    const DocumentRunResult& first = artifacts.documents[0];
    const fs::path doc_dir = fs::path(artifacts.run_dir) / first.dir;
    const auto chunks = chunks_from_jsonl(read_file(doc_dir / "chunks.jsonl"));
    CHECK(chunks.size() == 2);
    const auto graph = graph_from_json(detail::load_json_file(doc_dir / "graph.json"));
    CHECK(graph.n_chunks == 2);
    REQUIRE(graph.edges.size() == 1);
    CHECK(graph.edges[0].label == RelationLabel::kTerminologyDefinition);

    // metrics carry d-BLEU, terminology accuracy and the ledger snapshot
    const json metrics = detail::load_json_file(doc_dir / "metrics.json");
    CHECK(metrics.at("d_bleu").get<double>() == Approx(100.0).margin(1e-9));
    CHECK(metrics.at("terminology_accuracy").get<double>() == Approx(1.0));
    const CostLedger snapshot = cost_ledger_from_json(metrics.at("cost"));
    std::int64_t per_tag_calls = 0;
    for (const auto& [tag, counters] : snapshot.per_tag) per_tag_calls += counters.calls;
    CHECK(snapshot.calls == per_tag_calls);
    CHECK(snapshot.calls == 4);
}

TEST_CASE("one_pass issues exactly one call per document") {
    const FixtureCollection fc = write_fixture_collection();
    const auto records = load_collection(fc.manifest_path);
    const RunConfig config = config_for(fc, StrategyId::kOnePass, fresh_dir("run_1p"));
    const RunArtifacts artifacts = run_pipeline(config, records);
    for (const DocumentRunResult& doc : artifacts.documents) {
        CHECK(doc.ledger.calls == 1);
    }
}

TEST_CASE("identical config and fixtures reproduce artifacts byte for byte") {
    const FixtureCollection fc = write_fixture_collection();
    const auto records = load_collection(fc.manifest_path);
    const fs::path out_a = fresh_dir("det_a");
    const fs::path out_b = fresh_dir("det_b");
    const RunArtifacts run_a =
        run_pipeline(config_for(fc, StrategyId::kTransgraph, out_a), records);
    const RunArtifacts run_b =
        run_pipeline(config_for(fc, StrategyId::kTransgraph, out_b), records);
    CHECK(run_a.run_id == run_b.run_id);
    const auto tree_a = slurp_tree(fs::path(run_a.run_dir));
    const auto tree_b = slurp_tree(fs::path(run_b.run_dir));
    REQUIRE(!tree_a.empty());
    CHECK(tree_a == tree_b);
}

TEST_CASE("run ids change when the config changes") {
    const FixtureCollection fc = write_fixture_collection();
    const auto records = load_collection(fc.manifest_path);
    RunConfig a = config_for(fc, StrategyId::kTransgraph, fresh_dir("id_a"));
    RunConfig b = a;
    b.cap = 4;
    CHECK(detail::run_id_for(a, records) != detail::run_id_for(b, records));
    RunConfig c = a;
    c.out_dir = "elsewhere";  // deployment detail, same identity
    CHECK(detail::run_id_for(a, records) == detail::run_id_for(c, records));
}

TEST_CASE("skip policy records failed documents and continues") {
    const fs::path dir = fresh_dir("skippy");
    std::ofstream(dir / "m.json") << R"({"documents": [
        {"id": "bad", "source_text": "Unanswered one. Unanswered two."},
        {"id": "good", "source_text": "Costs stay low."}]})";
    // fixture only answers chunking and the translation of the good doc
    std::ofstream fixture(dir / "f.jsonl");
    fixture << json{{"tag", "chunk"}, {"ordinal", 0}, {"response", proposal_json({{0}})}}.dump()
            << "\n";
    fixture << json{{"tag", "translate"}, {"contains", "Costs stay low."}, {"response", "ok"}}
            .dump()
            << "\n";
    fixture.close();

    RunConfig config;
    config.strategy = StrategyId::kNoRel;
    config.backend.kind = "mock";
    config.backend.fixture = (dir / "f.jsonl").string();
    config.retry.backoff_base_ms = 0;
    config.retry.transport_retries = 0;
    config.out_dir = (dir / "out").string();

    const auto records = load_collection((dir / "m.json").string());

    config.failure_policy = FailurePolicy::kSkip;
    const RunArtifacts artifacts = run_pipeline(config, records);
    REQUIRE(artifacts.documents.size() == 2);
    // with skip policy the chunk failure is marked, not fatal
    CHECK(artifacts.documents[0].ok);
    CHECK(artifacts.documents[1].ok);

    config.failure_policy = FailurePolicy::kHalt;
    config.out_dir = (dir / "out_halt").string();
    CHECK_THROWS(run_pipeline(config, records));
}

TEST_CASE("export_graph_dot is well-formed and deterministic") {
    DiscourseGraph empty;
    empty.n_chunks = 2;
    const std::string dot_empty = export_graph_dot(empty);
    CHECK(dot_empty.find("c1 [label=\"c1\"];") != std::string::npos);
    CHECK(dot_empty.find("->") == std::string::npos);

    DiscourseGraph graph;
    graph.n_chunks = 2;
    graph.edges = {{1, 2, RelationLabel::kCauseEffect, "r"}};
    const std::string dot = export_graph_dot(graph);
    CHECK(dot.find("c1 -> c2 [label=\"cause_effect\"];") != std::string::npos);

    // minimal structural parse: braces balance, every edge line references
    // declared nodes
    std::size_t open = 0, close = 0;
    for (const char c : dot) {
        if (c == '{') ++open;
        if (c == '}') ++close;
    }
    CHECK(open == 1);
    CHECK(close == 1);
    std::istringstream lines(dot);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "digraph discourse {");
    while (std::getline(lines, line)) {
        if (line == "}") break;
        CHECK((line.rfind("  ", 0) == 0));
        if (line.find("->") != std::string::npos) {
            CHECK(line.find("c1 -> c2") != std::string::npos);
        }
    }
}

TEST_CASE("compare_runs aligns documents and computes deltas") {
    const FixtureCollection fc = write_fixture_collection();
    const auto records = load_collection(fc.manifest_path);
    const RunArtifacts run_a =
        run_pipeline(config_for(fc, StrategyId::kTransgraph, fresh_dir("cmp_a")), records);
    const RunArtifacts run_b =
        run_pipeline(config_for(fc, StrategyId::kOnePass, fresh_dir("cmp_b")), records);

    const ComparisonReport identity = compare_runs(run_a.run_dir, run_a.run_dir);
    for (const ComparisonRow& row : identity.rows) {
        REQUIRE(row.d_bleu_a.has_value());
        CHECK(*row.d_bleu_a == *row.d_bleu_b);
        CHECK(row.calls_a == row.calls_b);
    }

    const ComparisonReport cross = compare_runs(run_a.run_dir, run_b.run_dir);
    REQUIRE(cross.rows.size() == 3);
    for (const ComparisonRow& row : cross.rows) {
        CHECK(row.calls_a == 4);
        CHECK(row.calls_b == 1);
    }
    const json j = to_json(cross);
    CHECK(j.at("documents").at(0).at("calls").at("delta").get<int>() == -3);

    // different collections are refused
    const fs::path dir = fresh_dir("cmp_other");
    std::ofstream(dir / "m.json") << R"({"documents": [{"id": "solo", "source_text": "One."}]})";
    std::ofstream f(dir / "f.jsonl");
    f << json{{"tag", "translate"}, {"response", "x"}}.dump() << "\n";
    f << json{{"tag", "chunk"}, {"response", proposal_json({{0}})}}.dump() << "\n";
    f.close();
    RunConfig other;
    other.strategy = StrategyId::kOnePass;
    other.backend.fixture = (dir / "f.jsonl").string();
    other.retry.backoff_base_ms = 0;
    other.out_dir = (dir / "out").string();
    const RunArtifacts run_c =
        run_pipeline(other, load_collection((dir / "m.json").string()));
    CHECK_THROWS_AS(compare_runs(run_a.run_dir, run_c.run_dir), CollectionMismatch);
}

TEST_CASE("config json applies overrides and validates") {
    RunConfig config;
    apply_config_json(config, json{{"strategy", "seq_context"},
                                   {"T", 50},
                                   {"window", 4},
                                   {"tie_break", "earliest"},
                                   {"backend", "mock:fix.jsonl"},
                                   {"failure_policy", "skip"}});
    CHECK(config.strategy == StrategyId::kSeqContext);
    CHECK(config.T == 50);
    CHECK(config.window == 4);
    CHECK(config.tie_break == TieBreak::kEarliest);
    CHECK(config.backend.fixture == "fix.jsonl");
    CHECK(config.failure_policy == FailurePolicy::kSkip);
    CHECK_THROWS_AS(apply_config_json(config, json{{"strategy", "bogus"}}), ConfigError);
    RunConfig bad;
    bad.T = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("strategy call-count contracts for ablation baselines") {
    const FixtureCollection fc = write_fixture_collection();
    const auto records = load_collection(fc.manifest_path);

    // no_rel: chunking still runs, the graph does not
    {
        const RunConfig config = config_for(fc, StrategyId::kNoRel, fresh_dir("run_norel"));
        const RunArtifacts artifacts = run_pipeline(config, records);
        for (const DocumentRunResult& doc : artifacts.documents) {
            CHECK(doc.ledger.per_tag.at("chunk").calls == 1);
            CHECK(doc.ledger.per_tag.count("relation") == 0);
            CHECK(doc.ledger.per_tag.at("translate").calls == 2);
        }
    }
    // fixed_chunking: no chunk-stage calls, graph and translation remain
    {
        RunConfig config = config_for(fc, StrategyId::kFixedChunking, fresh_dir("run_fixed"));
        config.fixed_k = 2;
        const RunArtifacts artifacts = run_pipeline(config, records);
        for (const DocumentRunResult& doc : artifacts.documents) {
            CHECK(doc.ledger.per_tag.count("chunk") == 0);
            CHECK(doc.ledger.per_tag.at("relation").calls == 1);
            CHECK(doc.ledger.per_tag.at("translate").calls == 2);
        }
    }
    // seq_context: same stages as transgraph
    {
        const RunConfig config = config_for(fc, StrategyId::kSeqContext, fresh_dir("run_seq"));
        const RunArtifacts artifacts = run_pipeline(config, records);
        for (const DocumentRunResult& doc : artifacts.documents) {
            CHECK(doc.ledger.per_tag.at("chunk").calls == 1);
            CHECK(doc.ledger.per_tag.at("relation").calls == 1);
            CHECK(doc.ledger.per_tag.at("translate").calls == 2);
        }
    }
}
