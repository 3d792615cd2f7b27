#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <thread>

#include "test_support.hpp"
#include "transgraph/gateway.hpp"

using namespace transgraph;
using testsupport::fast_retries;

namespace {

ChatRequest request_for(const std::string& text, StageTag tag = StageTag::kTranslate) {
    ChatRequest request;
    request.user_text = text;
    request.tag = tag;
    return request;
}

}  // namespace

TEST_CASE("scripted echo with ledger increment") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_exact("hi", "ok");
    Gateway gateway(mock, fast_retries());
    const ChatResponse response = gateway.complete(request_for("hi"));
    CHECK(response.text == "ok");
    CHECK(response.backend_id == "mock");
    CHECK(gateway.ledger().calls == 1);
}

TEST_CASE("token accounting is additive across calls") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_exact("a", "ra", 3, 2);
    mock->add_exact("b", "rb", 5, 4);
    Gateway gateway(mock, fast_retries());
    gateway.complete(request_for("a"));
    gateway.complete(request_for("b"));
    const CostLedger ledger = gateway.ledger();
    CHECK(ledger.calls == 2);
    CHECK(ledger.input_tokens == 8);
    CHECK(ledger.output_tokens == 6);
    CHECK(ledger.total_tokens() == 14);
}

TEST_CASE("missing mock entry raises BackendRefusal after retries") {
    auto mock = std::make_shared<MockBackend>();
    RetryPolicy policy = fast_retries();
    policy.transport_retries = 2;
    Gateway gateway(mock, policy);
    CHECK_THROWS_AS(gateway.complete(request_for("unknown")), BackendRefusal);
    // every attempt is charged
    CHECK(gateway.ledger().calls == 3);
}

TEST_CASE("ledger splits counts per stage tag") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_tag_default(StageTag::kChunk, "c");
    mock->add_tag_default(StageTag::kRelation, "r");
    Gateway gateway(mock, fast_retries());
    gateway.complete(request_for("one", StageTag::kChunk));
    gateway.complete(request_for("two", StageTag::kRelation));
    gateway.complete(request_for("three", StageTag::kRelation));
    const CostLedger ledger = gateway.ledger();
    CHECK(ledger.per_tag.at("chunk").calls == 1);
    CHECK(ledger.per_tag.at("relation").calls == 2);
    std::int64_t sum = 0;
    for (const auto& [tag, counters] : ledger.per_tag) sum += counters.calls;
    CHECK(sum == ledger.calls);
}

TEST_CASE("fixture token counts win over estimates") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_exact("with counts", "resp", 100, 50);
    mock->add_exact("without counts", "three token reply");
    Gateway gateway(mock, fast_retries());
    const ChatResponse explicit_counts = gateway.complete(request_for("with counts"));
    CHECK(explicit_counts.input_tokens == 100);
    CHECK(explicit_counts.output_tokens == 50);
    const ChatResponse estimated = gateway.complete(request_for("without counts"));
    CHECK(estimated.input_tokens == 2);  // "without counts"
    CHECK(estimated.output_tokens == 3);
}

TEST_CASE("structured output parses a clean payload") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_exact("q", R"({"reason":"same entity","relation":"entity_coreference","direction":"forward"})");
    Gateway gateway(mock, fast_retries());
    StructuredShape shape;
    shape.fields = {{"reason", StructuredShape::Kind::kString, true, nullptr},
                    {"relation", StructuredShape::Kind::kString, true, nullptr},
                    {"direction", StructuredShape::Kind::kString, true, nullptr}};
    const json payload = gateway.complete_structured(request_for("q"), shape);
    CHECK(payload.at("reason") == "same entity");
    CHECK(payload.at("relation") == "entity_coreference");
    CHECK(payload.at("direction") == "forward");
}

TEST_CASE("structured output survives prose and fences on retry") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_ordinal(StageTag::kRelation, 0, "Sure! Here is my analysis, no JSON though.");
    mock->add_ordinal(StageTag::kRelation, 1,
                      "Here you go:\n```json\n{\"reason\":\"r\",\"relation\":\"contrast\","
                      "\"direction\":\"forward\"}\n```");
    Gateway gateway(mock, fast_retries());
    StructuredShape shape;
    shape.fields = {{"reason", StructuredShape::Kind::kString, true, nullptr},
                    {"relation", StructuredShape::Kind::kString, true, nullptr}};
    const json payload =
        gateway.complete_structured(request_for("q", StageTag::kRelation), shape);
    CHECK(payload.at("relation") == "contrast");
    CHECK(gateway.ledger().calls == 2);
}

TEST_CASE("structured output exhausts retries with StructureError") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_tag_default(StageTag::kRelation, "never json");
    Gateway gateway(mock, fast_retries());
    StructuredShape shape;
    shape.fields = {{"reason", StructuredShape::Kind::kString, true, nullptr}};
    try {
        gateway.complete_structured(request_for("q", StageTag::kRelation), shape, 2);
        FAIL("expected StructureError");
    } catch (const StructureError& e) {
        CHECK(e.raw_text == "never json");
    }
    CHECK(gateway.ledger().calls == 3);  // initial + 2 repair retries
}

TEST_CASE("shape validation rejects wrong types and missing keys") {
    StructuredShape shape;
    shape.fields = {{"name", StructuredShape::Kind::kString, true, nullptr},
                    {"count", StructuredShape::Kind::kInteger, true, nullptr}};
    std::string why;
    CHECK(shape.validate(json{{"name", "x"}, {"count", 3}}, why));
    CHECK_FALSE(shape.validate(json{{"name", "x"}}, why));
    CHECK_FALSE(shape.validate(json{{"name", 1}, {"count", 3}}, why));
    CHECK_FALSE(shape.validate(json::array(), why));
}

TEST_CASE("brace extraction skips strings with braces") {
    const auto block = extract_brace_block("text {\"k\":\"va{lue}\"} tail");
    REQUIRE(block.has_value());
    CHECK(*block == "{\"k\":\"va{lue}\"}");
    CHECK_FALSE(extract_brace_block("no braces here").has_value());
    CHECK_FALSE(extract_brace_block("open { never closes").has_value());
}

TEST_CASE("mock fixture file round-trips") {
    const auto dir = std::filesystem::temp_directory_path() / "tg_gateway_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "fixture.jsonl";
    {
        std::ofstream out(path);
        out << R"({"prompt": "hello", "response": "world", "input_tokens": 1, "output_tokens": 1})" << "\n";
        out << "# comment line\n\n";
        out << R"({"tag": "judge", "ordinal": 0, "response": "first judge reply"})" << "\n";
        out << R"({"contains": "needle", "response": "found"})" << "\n";
    }
    auto mock = MockBackend::from_file(path.string());
    Gateway gateway(mock, fast_retries());
    CHECK(gateway.complete(request_for("hello")).text == "world");
    CHECK(gateway.complete(request_for("hay needle stack")).text == "found");
    CHECK(gateway.complete(request_for("anything", StageTag::kJudge)).text ==
          "first judge reply");
}

TEST_CASE("request validation") {
    auto mock = std::make_shared<MockBackend>();
    Gateway gateway(mock, fast_retries());
    ChatRequest bad;
    bad.user_text = "";
    CHECK_THROWS_AS(gateway.complete(bad), ConfigError);
    ChatRequest bad_decoding = request_for("x");
    bad_decoding.decoding = DecodingParams{};
    bad_decoding.decoding->top_p = 0.0;
    CHECK_THROWS_AS(gateway.complete(bad_decoding), ConfigError);
    CHECK(gateway.decoding().top_p == 1.0);
}

TEST_CASE("concurrent callers keep the ledger consistent") {
    auto mock = std::make_shared<MockBackend>();
    mock->add_tag_default(StageTag::kTranslate, "r");
    Gateway gateway(mock, fast_retries());
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&gateway] {
            for (int i = 0; i < 50; ++i) gateway.complete(request_for("x"));
        });
    }
    for (auto& thread : threads) thread.join();
    CHECK(gateway.ledger().calls == 200);
}

TEST_CASE("estimate_tokens uses the configured tokenizer") {
    auto mock = std::make_shared<MockBackend>();
    Gateway gateway(mock, fast_retries());
    CHECK(gateway.estimate_tokens("") == 0);
    CHECK(gateway.estimate_tokens("Hello world.") == 3);
}
