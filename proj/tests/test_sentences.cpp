#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "test_support.hpp"
#include "transgraph/sentences.hpp"

using namespace transgraph;

TEST_CASE("terminal punctuation splits") {
    const auto sentences = segment_sentences("A. B? C!");
    REQUIRE(sentences.size() == 3);
    CHECK(sentences[0].text == "A.");
    CHECK(sentences[1].text == "B?");
    CHECK(sentences[2].text == "C!");
    CHECK(sentences[0].index == 0);
    CHECK(sentences[2].index == 2);
}

TEST_CASE("CJK full stops split without trailing spaces") {
    const auto sentences = segment_sentences("他走了。她来了。", "zh");
    REQUIRE(sentences.size() == 2);
    CHECK(sentences[0].text == "他走了。");
    CHECK(sentences[1].text == "她来了。");
}

TEST_CASE("abbreviation guard holds the sentence open") {
    const auto sentences = segment_sentences("Dr. Smith left. He returned.");
    REQUIRE(sentences.size() == 2);
    CHECK(sentences[0].text == "Dr. Smith left.");
    CHECK(sentences[1].text == "He returned.");
}

TEST_CASE("more guarded abbreviations") {
    CHECK(segment_sentences("See Fig. 3 for details.").size() == 1);
    CHECK(segment_sentences("Compare apples vs. oranges. Then decide.").size() == 2);
    CHECK(segment_sentences("Use tokens, e.g. words. Then count.").size() == 2);
}

TEST_CASE("decimal points do not split") {
    const auto sentences = segment_sentences("The score is 3.14 points. Nice.");
    REQUIRE(sentences.size() == 2);
    CHECK(sentences[0].text == "The score is 3.14 points.");
}

TEST_CASE("closing quotes attach to the sentence") {
    const auto sentences = segment_sentences("He said \"Stop!\" Then he left.");
    REQUIRE(sentences.size() == 2);
    CHECK(sentences[0].text == "He said \"Stop!\"");
}

TEST_CASE("trailing text without a terminal becomes the last sentence") {
    const auto sentences = segment_sentences("Done. And then");
    REQUIRE(sentences.size() == 2);
    CHECK(sentences[1].text == "And then");
}

TEST_CASE("empty and whitespace-only documents are rejected") {
    CHECK_THROWS_AS(segment_sentences(""), EmptyDocument);
    CHECK_THROWS_AS(segment_sentences("   \n "), EmptyDocument);
}

TEST_CASE("spans tile the document and gaps are preserved") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const std::string doc = testsupport::random_document(rng, 1 + trial % 12);
        const auto sentences = segment_sentences(doc);
        REQUIRE(!sentences.empty());
        CHECK(sentences.front().span_begin == 0);
        CHECK(sentences.back().span_end == doc.size());
        for (std::size_t i = 1; i < sentences.size(); ++i) {
            CHECK(sentences[i].span_begin == sentences[i - 1].span_end);
            CHECK(sentences[i].span_begin < sentences[i].span_end);
        }
        // core text + gap chains reconstruct the document
        std::string rebuilt;
        for (const Sentence& s : sentences) rebuilt += s.text + s.gap_after;
        CHECK(rebuilt == doc);
        for (const Sentence& s : sentences) {
            CHECK(doc.substr(s.text_begin, s.text.size()) == s.text);
            CHECK(s.token_count == count_tokens(s.text));
        }
    }
}
