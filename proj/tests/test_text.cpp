#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "transgraph/text.hpp"

using namespace transgraph;

TEST_CASE("token counting basics") {
    CHECK(count_tokens("") == 0);
    // two words plus the terminal punctuation token
    CHECK(count_tokens("Hello world.") == 3);
    CHECK(count_tokens("one,two") == 3);
    CHECK(count_tokens("   spaced   out   ") == 2);
}

TEST_CASE("CJK text counts one token per character") {
    CHECK(count_tokens("他走了。") == 4);
    CHECK(count_tokens("他走了。她来了。") == 8);
    // mixed script: latin run, CJK chars, punctuation
    CHECK(count_tokens("BERT模型很好!") == 6);
}

TEST_CASE("accented and Cyrillic words stay single tokens") {
    CHECK(count_tokens("café") == 1);
    CHECK(count_tokens("Привет мир") == 2);
    CHECK(count_tokens("naïve approach") == 2);
}

TEST_CASE("tokenize agrees with count_tokens") {
    for (const char* text : {"Hello world.", "他走了。", "a-b c_d", "x (y) z!"}) {
        CHECK(tokenize(text).size() == count_tokens(text));
    }
}

TEST_CASE("concatenation never loses tokens") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> pieces = {"word", "两个", ". ", "x,y", " ", "Fin!", "a"};
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::string a, b;
        for (int i = 0; i < 4; ++i) a += pieces[pick(rng)];
        for (int i = 0; i < 4; ++i) b += pieces[pick(rng)];
        const std::size_t combined = count_tokens(a + b);
        CHECK(combined >= std::max(count_tokens(a), count_tokens(b)));
    }
}

TEST_CASE("whitespace tokenizer splits on blanks only") {
    const auto tokens = tokenize_whitespace("Hello world. Над");
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[1] == "world.");
    CHECK(tokenizer_by_id("whitespace") == &tokenize_whitespace);
    CHECK(tokenizer_by_id("default") == &tokenize);
    CHECK(tokenizer_by_id("nope") == nullptr);
}

TEST_CASE("template rendering replaces only known placeholders") {
    const std::string out = render_template(
        "Chunk {i} vs {j}: {\"schema\": [<ints>]} and {unknown}",
        {{"i", "1"}, {"j", "2"}});
    CHECK(out == "Chunk 1 vs 2: {\"schema\": [<ints>]} and {unknown}");
}

TEST_CASE("collapse_whitespace and trim") {
    CHECK(collapse_whitespace("  a \t b\n\nc ") == "a b c");
    CHECK(trim("  x y  ") == "x y");
    CHECK(trim("\n") == "");
}
