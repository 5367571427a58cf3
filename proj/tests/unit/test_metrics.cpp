#include <random>

#include "doctest.h"

#include "credrag/error.hpp"
#include "credrag/metrics.hpp"
#include "credrag/text.hpp"
#include "support/em_cases.hpp"
#include "support/oracles.hpp"

using namespace credrag;
using namespace credrag::metrics;
using credrag::testing::lcs_oracle;
using credrag::testing::rouge_l_oracle;

namespace {

std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len) {
    static const std::vector<std::string> vocab = {"the", "cat", "sat", "on", "mat", "a", "dog", "ran"};
    std::vector<std::string> out(rng() % (max_len + 1));
    for (auto& t : out) t = vocab[rng() % vocab.size()];
    return out;
}

const std::map<std::string, std::string> kOptions = {
    {"A", "Nikki Haley"}, {"B", "Ron DeSantis"}, {"C", "Mike Pence"}, {"D", "Tim Scott"}};

}  // namespace

TEST_CASE("normalize examples") {
    CHECK(normalize("Tyson  Foods.") == "tyson foods");
    CHECK(normalize("") == "");
    CHECK(normalize("  (A) [b]; \"c\"! ") == "a b c");
}

TEST_CASE("exact_match fixture suite") {
    for (const auto& c : credrag::testing::em_cases()) {
        CAPTURE(c.generation);
        CHECK(exact_match(c.generation, c.answers) == doctest::Approx(c.expected));
    }
    CHECK_THROWS_AS(exact_match("x", {}), PreconditionError);
}

TEST_CASE("exact_match is monotone under generation extension") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        auto toks = random_tokens(rng, 8);
        std::string g = text::join(toks, " ");
        std::string a = toks.empty() ? "cat" : toks[rng() % toks.size()];
        if (exact_match(g, {a}) == 1.0) {
            CHECK(exact_match("Prefix, " + g + " and more.", {a}) == 1.0);
        }
    }
}

TEST_CASE("rouge_l examples") {
    CHECK(rouge_l("the cat sat", "the cat sat") == 1.0);
    CHECK(rouge_l("alpha beta", "gamma delta") == 0.0);
    CHECK(rouge_l("the cat sat", "the cat") == doctest::Approx(0.8));
    CHECK(rouge_l("", "the cat") == 0.0);
}

TEST_CASE("rouge_l agrees with an independent LCS oracle") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        auto a = random_tokens(rng, 20);
        auto b = random_tokens(rng, 20);
        CHECK(lcs_length(a, b) == lcs_oracle(a, b));
        CHECK(rouge_l(text::join(a, " "), text::join(b, " ")) == doctest::Approx(rouge_l_oracle(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("metric properties") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        auto a = random_tokens(rng, 10);
        auto b = random_tokens(rng, 10);
        std::string x = text::join(a, " ");
        std::string y = text::join(b, " ");
        double r = rouge_l(x, y);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        CHECK(r == doctest::Approx(rouge_l(y, x)));
        if (!a.empty()) CHECK(rouge_l(x, x) == 1.0);

        // Case and punctuation changes on either side leave scores alone.
        std::string loud = text::lower(x);
        for (auto& ch : loud) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        std::string punct = "\"" + y + "!\"";
        CHECK(rouge_l(loud, punct) == doctest::Approx(r));
        if (!b.empty()) {
            double em = exact_match(x, {b[0]});
            CHECK((em == 0.0 || em == 1.0));
            CHECK(exact_match(loud + ".", {"(" + b[0] + ")"}) == em);
        }
    }
}

TEST_CASE("mc_accuracy examples") {
    CHECK(mc_accuracy("C) Mike Pence", kOptions, "C"));
    CHECK(mc_accuracy("C)Mike Pence", kOptions, "C"));
    CHECK(mc_accuracy("The answer is Mike Pence", kOptions, "C"));
    CHECK_FALSE(mc_accuracy("unsure", kOptions, "C"));
    CHECK_FALSE(mc_accuracy("A. Nikki Haley", kOptions, "C"));
}

TEST_CASE("extract_choice prefers a standalone letter over option text") {
    CHECK(extract_choice("B) but Mike Pence is mentioned", kOptions) == std::optional<std::string>("B"));
    CHECK(extract_choice("Answer: D", kOptions) == std::optional<std::string>("D"));
    // Capitalized words are not letters; "I" is not an option key.
    CHECK(extract_choice("I think Tim Scott", kOptions) == std::optional<std::string>("D"));
    CHECK(extract_choice("Both Nikki Haley and Mike Pence", kOptions) == std::optional<std::string>("A"));
    CHECK_FALSE(extract_choice("no clue", kOptions).has_value());
}

TEST_CASE("scored items round-trip") {
    ScoredItem s{"q1", "gen", 1.0, 0.5, true, std::nullopt};
    CHECK(scored_item_from_json(to_json(s)) == s);
    ScoredItem e{"q2", "", std::nullopt, std::nullopt, std::nullopt, "backend failed"};
    CHECK(scored_item_from_json(to_json(e)) == e);
}
