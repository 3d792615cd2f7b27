#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "transgraph/graph.hpp"

using namespace transgraph;
using testsupport::fast_retries;
using testsupport::relation_json;

namespace {

Chunk chunk_of(int id, const std::string& text) {
    Chunk chunk;
    chunk.id = id;
    chunk.text = text;
    chunk.sentence_indices = {id - 1};
    chunk.token_count = count_tokens(text);
    return chunk;
}

}  // namespace

TEST_CASE("pair enumeration follows the window formula") {
    CHECK(enumerate_pairs(4, 2) == std::vector<std::pair<int, int>>{
                                       {1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}});
    CHECK(enumerate_pairs(3, 10) == std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 3}});
    CHECK(enumerate_pairs(1, 5).empty());
    CHECK(enumerate_pairs(0, 5).empty());
}

TEST_CASE("pair enumeration matches the brute-force double loop") {
    for (int n = 0; n <= 12; ++n) {
        for (int w = 1; w <= 6; ++w) {
            CHECK(enumerate_pairs(n, w) == testsupport::oracle_pairs(n, w));
        }
    }
}

TEST_CASE("label parsing normalizes spelling variants") {
    CHECK(relation_label_from("entity_coreference") == RelationLabel::kEntityCoreference);
    CHECK(relation_label_from("Entity Coreference") == RelationLabel::kEntityCoreference);
    CHECK(relation_label_from("Background->Core") == RelationLabel::kBackgroundCore);
    CHECK(relation_label_from("Background→Core") == RelationLabel::kBackgroundCore);
    CHECK(relation_label_from("CAUSE->EFFECT") == RelationLabel::kCauseEffect);
    CHECK(relation_label_from("Motivation->Method") == RelationLabel::kProblemSolution);
    CHECK(relation_label_from("Motivation->Method or Problem->Solution") ==
          RelationLabel::kProblemSolution);
    CHECK_FALSE(relation_label_from("sibling").has_value());
    CHECK(is_no_relation_text("none"));
    CHECK(is_no_relation_text("No Relation"));
    CHECK_FALSE(is_no_relation_text("contrast"));
}

TEST_CASE("symmetric labels are exactly contrast, comparison, coreference") {
    CHECK(is_symmetric(RelationLabel::kContrast));
    CHECK(is_symmetric(RelationLabel::kComparison));
    CHECK(is_symmetric(RelationLabel::kEntityCoreference));
    CHECK_FALSE(is_symmetric(RelationLabel::kBackgroundCore));
    CHECK_FALSE(is_symmetric(RelationLabel::kTerminologyDefinition));
}

TEST_CASE("label_pair parses a direct judgment") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_tag_default(StageTag::kRelation,
                          relation_json("entity_coreference", "forward", "both mention FeSTE"));
    Gateway gateway(mock, fast_retries());
    const RelationJudgment judgment = label_pair(chunk_of(1, "a"), chunk_of(2, "b"), gateway);
    REQUIRE(judgment.relation.has_value());
    CHECK(*judgment.relation == RelationLabel::kEntityCoreference);
    CHECK(judgment.reason == "both mention FeSTE");
    CHECK(judgment.direction == Direction::kForward);
}

TEST_CASE("label_pair honors the none convention") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_tag_default(StageTag::kRelation,
                          relation_json("none", "forward", "no relation found"));
    Gateway gateway(mock, fast_retries());
    const RelationJudgment judgment = label_pair(chunk_of(1, "a"), chunk_of(2, "b"), gateway);
    CHECK_FALSE(judgment.relation.has_value());
    CHECK(judgment.reason == "no relation found");
}

TEST_CASE("label_pair maps the motivation alias") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_tag_default(StageTag::kRelation,
                          relation_json("Motivation->Method", "forward", "problem then fix"));
    Gateway gateway(mock, fast_retries());
    const RelationJudgment judgment = label_pair(chunk_of(1, "a"), chunk_of(2, "b"), gateway);
    REQUIRE(judgment.relation.has_value());
    CHECK(*judgment.relation == RelationLabel::kProblemSolution);
}

TEST_CASE("unknown label retries once then degrades to no relation") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_ordinal(StageTag::kRelation, 0, relation_json("sibling", "forward", "?"));
    mock->add_ordinal(StageTag::kRelation, 1, relation_json("cousin", "forward", "?"));
    Gateway gateway(mock, fast_retries());
    const RelationJudgment judgment = label_pair(chunk_of(1, "a"), chunk_of(2, "b"), gateway);
    CHECK_FALSE(judgment.relation.has_value());
    CHECK(gateway.ledger().calls == 2);
}

TEST_CASE("resolve_direction definitions") {
    RelationJudgment forward{"r", RelationLabel::kCauseEffect, Direction::kForward};
    const auto e1 = resolve_direction(forward, 2, 5);
    REQUIRE(e1.has_value());
    CHECK(e1->src == 2);
    CHECK(e1->dst == 5);

    RelationJudgment backward{"r", RelationLabel::kTerminologyDefinition, Direction::kBackward};
    const auto e2 = resolve_direction(backward, 2, 5);
    REQUIRE(e2.has_value());
    CHECK(e2->src == 5);
    CHECK(e2->dst == 2);

    RelationJudgment none{"no relation found", std::nullopt, Direction::kForward};
    CHECK_FALSE(resolve_direction(none, 1, 3).has_value());
}

TEST_CASE("build_graph with a no-relation mock yields no edges") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_tag_default(StageTag::kRelation, relation_json("none", "forward", "no relation found"));
    Gateway gateway(mock, fast_retries());
    const auto graph = build_graph({chunk_of(1, "a"), chunk_of(2, "b")}, 10, gateway);
    CHECK(graph.n_chunks == 2);
    CHECK(graph.edges.empty());
}

TEST_CASE("build_graph labels every enumerated pair") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_tag_default(StageTag::kRelation,
                          relation_json("cause_effect", "forward", "because"));
    Gateway gateway(mock, fast_retries());
    const auto graph =
        build_graph({chunk_of(1, "a"), chunk_of(2, "b"), chunk_of(3, "c")}, 2, gateway);
    CHECK(graph.edges.size() == 3);  // |P| for N=3, w=2
    CHECK(gateway.ledger().per_tag.at("relation").calls == 3);
    for (const Edge& edge : graph.edges) {
        CHECK(edge.src != edge.dst);
        CHECK(std::abs(edge.src - edge.dst) <= 2);
    }
}

TEST_CASE("worked example: definition chunk pair labels forward") {
    // Chunks 1 and 2 of the technical-presentation example; the title
    // defines the term the later chunk uses.
    const Chunk c1 = chunk_of(
        1,
        "Hello. My name is Asaf Harari. And I will present our paper, Few-Shot Tabular Data "
        "Enrichment Using Fine-Tuned Transformers Architectures. Data scientists analyze data "
        "and mainly focus on the manipulating the data's existing features. But sometimes, "
        "these features are limited. Feature generation using another data source may add "
        "substantial information. Our research goal is automatic tabular data enrichment using "
        "external sources' free text.");
    const Chunk c2 = chunk_of(
        2,
        "Assume we have a tabular dataset and a knowledge base. We need an automatic process "
        "which involves entity linking and text analysis to extract new features from the "
        "knowledge base's free text. Our framework FeSTE is exactly this automatic process. So "
        "let's see an example in a dataset fed into FeSTE. In this example, the dataset is "
        "university dataset. When its goal is to classify universities into low ranking "
        "universities and high-ranking universities. As knowledge base, we use Wikipedia.");
    auto mock = std::make_shared<MockBackend>();
    mock->add_tag_default(StageTag::kRelation,
                          relation_json("Terminology Definition", "forward",
                                        "the paper title names the framework used later"));
    Gateway gateway(mock, fast_retries());
    const auto graph = build_graph({c1, c2}, 10, gateway);
    REQUIRE(graph.edges.size() == 1);
    CHECK(graph.edges[0].src == 1);
    CHECK(graph.edges[0].dst == 2);
    CHECK(graph.edges[0].label == RelationLabel::kTerminologyDefinition);
}

TEST_CASE("pair failures contribute no edge but do not abort") {
    auto mock = std::make_shared<MockBackend>();
    // pair (1,2) malformed forever; pair (1,3) and (2,3) fine
    mock->add_ordinal(StageTag::kRelation, 0, "not json");
    mock->add_ordinal(StageTag::kRelation, 1, "still not json");
    mock->add_ordinal(StageTag::kRelation, 2, "nope");
    mock->add_tag_default(StageTag::kRelation, relation_json("contrast", "forward", "differs"));
    Gateway gateway(mock, fast_retries());
    const auto graph =
        build_graph({chunk_of(1, "a"), chunk_of(2, "b"), chunk_of(3, "c")}, 2, gateway);
    CHECK(graph.edges.size() == 2);
}

TEST_CASE("graph consistency identity, disjoint and symmetric fixtures") {
    DiscourseGraph a;
    a.n_chunks = 3;
    a.edges = {{1, 2, RelationLabel::kCauseEffect, ""}, {2, 3, RelationLabel::kContrast, ""}};

    CHECK(graph_consistency(a, a) == 1.0);

    DiscourseGraph b;
    b.n_chunks = 3;
    b.edges = {{1, 2, RelationLabel::kCauseEffect, ""}, {3, 2, RelationLabel::kContrast, ""}};
    // contrast is symmetric, so (2,3) == (3,2)
    CHECK(graph_consistency(a, b) == 1.0);

    DiscourseGraph c;
    c.n_chunks = 3;
    c.edges = {{1, 3, RelationLabel::kComparison, ""}};
    CHECK(graph_consistency(a, c) == 0.0);

    DiscourseGraph empty_a, empty_b;
    empty_a.n_chunks = empty_b.n_chunks = 3;
    CHECK(graph_consistency(empty_a, empty_b) == 1.0);

    DiscourseGraph other_size;
    other_size.n_chunks = 4;
    CHECK_THROWS_AS(graph_consistency(a, other_size), ChunkCountMismatch);
}

TEST_CASE("graph consistency is symmetric and directed labels stay directed") {
    DiscourseGraph a, b;
    a.n_chunks = b.n_chunks = 3;
    a.edges = {{1, 2, RelationLabel::kCauseEffect, ""}};
    b.edges = {{2, 1, RelationLabel::kCauseEffect, ""}};  // flipped directed edge differs
    CHECK(graph_consistency(a, b) == 0.0);
    CHECK(graph_consistency(b, a) == graph_consistency(a, b));
}

TEST_CASE("graph json round-trips") {
    DiscourseGraph graph;
    graph.n_chunks = 3;
    graph.window = 5;
    graph.edges = {{1, 2, RelationLabel::kTerminologyDefinition, "defines the term"},
                   {3, 2, RelationLabel::kEntityCoreference, "same entity"}};
    const DiscourseGraph reloaded = graph_from_json(to_json(graph));
    CHECK(reloaded.n_chunks == 3);
    CHECK(reloaded.window == 5);
    REQUIRE(reloaded.edges.size() == 2);
    CHECK(reloaded.edges[0].src == 1);
    CHECK(reloaded.edges[0].label == RelationLabel::kTerminologyDefinition);
    CHECK(reloaded.edges[1].src == 3);
    CHECK(reloaded.edges[1].reason == "same entity");
    CHECK(to_json(graph).at("edges").at(1).at("direction") == "backward");
}
