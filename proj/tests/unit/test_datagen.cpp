#include <random>
#include <set>

#include "doctest.h"

#include "credrag/datagen.hpp"
#include "credrag/dataset_io.hpp"
#include "credrag/error.hpp"
#include "credrag/metrics.hpp"
#include "credrag/mix_noise.hpp"
#include "support/fixtures.hpp"

using namespace credrag;
using namespace credrag::datagen;
using credrag::testing::doc;
using credrag::testing::item;
using credrag::testing::TempDir;

namespace {

gateway::BackendConfig mock_config(std::vector<gateway::ScriptRule> rules = {},
                                   std::optional<std::string> fallback = std::nullopt) {
    gateway::BackendConfig c;
    c.kind = gateway::BackendKind::ScriptedMock;
    c.id = "mock";
    c.model = "mock-model";
    c.script = std::move(rules);
    c.default_response = std::move(fallback);
    return c;
}

gateway::ScriptRule contains(std::string pattern, std::vector<std::string> responses) {
    gateway::ScriptRule r;
    r.match = gateway::ScriptRule::Match::Contains;
    r.pattern = std::move(pattern);
    r.responses = std::move(responses);
    return r;
}

/// Restates the answer named on the prompt's "Correct answer:" line, except
/// for answers starting with "Reject", which it never mentions.
class AnswerEchoBackend final : public gateway::Backend {
  public:
    std::string generate(const gateway::GenerationRequest& r) override {
        const std::string key = "Correct answer: ";
        auto pos = r.prompt.rfind(key);
        if (pos == std::string::npos) return "no answer line";
        auto end = r.prompt.find('\n', pos);
        std::string answer = r.prompt.substr(pos + key.size(), end - pos - key.size());
        if (answer.starts_with("Reject")) return "The documents disagree.";
        return "The high credibility document supports it. Answer: " + answer;
    }
};

QAItem scored_item(const std::string& id, const std::string& answer) {
    return item(id, "Which company recalled " + id + "?", {answer},
                {doc(id + "a", answer + " recalled products.", 0.9), doc(id + "b", "Weather was mild.", 0.2)});
}

}  // namespace

TEST_CASE("explanations are accepted when they contain the golden answer") {
    gateway::Gateway gw(mock_config({}, "Doc 1 has high credibility and states X, so the answer is X"));
    TextGenerator gen(gw);
    auto q = item("q", "Q?", {"X"}, {doc("d", "X happened.", 0.9, 3)});
    auto r = generate_explanation(gen, q, "X");
    CHECK_FALSE(r.rejected());
    CHECK(r.attempts == 1);
}

TEST_CASE("explanations lacking the answer are rejected after three attempts") {
    gateway::Gateway gw(mock_config({}, "I cannot tell."));
    TextGenerator gen(gw);
    auto q = item("q", "Q?", {"X"}, {doc("d", "X happened.", 0.9, 3)});
    auto r = generate_explanation(gen, q, "X");
    CHECK(r.rejected());
    CHECK(r.attempts == kMaxGenerationAttempts);
    CHECK(gw.backend_calls() == 3);
}

TEST_CASE("explanation acceptance compares normalized text") {
    gateway::Gateway gw(mock_config({}, "So it is x."));
    TextGenerator gen(gw);
    auto q = item("q", "Q?", {"X"}, {doc("d", "X happened.", 0.9, 3)});
    CHECK_FALSE(generate_explanation(gen, q, "X").rejected());
}

TEST_CASE("a later attempt can succeed") {
    gateway::Gateway gw(mock_config({contains("Correct answer", {"unsure", "still unsure", "It is Tyson Foods."})}));
    TextGenerator gen(gw);
    auto q = item("q", "Q?", {"Tyson Foods"}, {doc("d", "t", 0.9, 3)});
    auto r = generate_explanation(gen, q, "Tyson Foods");
    CHECK(r.explanation == std::optional<std::string>("It is Tyson Foods."));
    CHECK(r.attempts == 3);
}

TEST_CASE("explanation preconditions") {
    gateway::Gateway gw(mock_config({}, "x"));
    TextGenerator gen(gw);
    CHECK_THROWS_AS(generate_explanation(gen, item("q", "Q?", {"X"}, {doc("d", "t", 0.9)}), "X"), PreconditionError);
    CHECK_THROWS_AS(generate_explanation(gen, item("q", "Q?", {"X"}, {doc("d", "t", 0.9, 3)}), ""), PreconditionError);
}

TEST_CASE("corpus keeps accepted items and records rejections") {
    Dataset ds;
    ds.name = "mini";
    ds.items = {scored_item("q2", "Reject Corp"), scored_item("q1", "Alpha Foods")};
    gateway::Gateway gw(mock_config(), std::make_unique<AnswerEchoBackend>());
    TextGenerator gen(gw);
    auto result = build_training_corpus(ds, credibility::CredibilityPolicy{}, gen);
    REQUIRE(result.examples.size() == 1);
    REQUIRE(result.rejections.size() == 1);
    CHECK(result.rejections[0].item_id == "q2");
    const auto& ex = result.examples[0];
    CHECK(ex.provenance == Provenance{"mini", "q1", "mock-model"});
    CHECK(metrics::normalize(ex.target).find(metrics::normalize("Alpha Foods")) != std::string::npos);
    CHECK(ex.annotated_documents.size() == 2);
    CHECK(ex.input.find("High credibility of text: Alpha Foods recalled products.") != std::string::npos);

    TempDir dir;
    write_training_jsonl(result.examples, dir / "corpus.jsonl");
    auto back = load_training_jsonl(dir / "corpus.jsonl");
    REQUIRE(back.size() == 1);
    CHECK(back[0] == ex);
}

TEST_CASE("corpus over fifteen thousand mixed-shape items") {
    Dataset ds;
    ds.name = "mixed";
    std::mt19937_64 rng(31);
    const int kItems = 15000;
    int expected_rejections = 0;
    for (int i = 0; i < kItems; ++i) {
        int shape = i % 7;
        std::string id = "s" + std::to_string(shape) + "-" + std::to_string(i);
        QAItem q;
        q.id = id;
        q.question = "Question " + std::to_string(i) + " about topic " + std::to_string(shape) + "?";
        bool reject = i % 10 == 9;
        expected_rejections += reject;
        std::string answer = (reject ? "Reject " : "Answer ") + std::to_string(i);
        if (shape == 6) {
            q.options = {{"A", answer}, {"B", "Other " + std::to_string(i)}};
            q.correct_option = "A";
        } else {
            q.answers = {answer};
        }
        if (shape == 5) q.query_date = Date::parse("2023-11-06");
        int docs = 1 + shape % 5;
        for (int d = 0; d < docs; ++d) {
            Document x;
            x.id = id + "-" + std::to_string(d);
            x.text = d == 0 ? answer + " appears in topic " + std::to_string(shape) + "." : "Filler passage number " + std::to_string(rng() % 1000) + ".";
            if (shape != 3) x.relevance_score = d == 0 ? 0.9 : 0.1 * static_cast<double>(d);
            if (shape == 5) x.published_date = Date::parse("2023-10-01");
            q.documents.push_back(x);
        }
        ds.items.push_back(q);
    }
    gateway::Gateway gw(mock_config(), std::make_unique<AnswerEchoBackend>());
    TextGenerator gen(gw);
    CorpusOptions opts;
    opts.workers = 2;
    auto result = build_training_corpus(ds, credibility::CredibilityPolicy{}, gen, opts);
    CHECK(result.rejections.size() == static_cast<std::size_t>(expected_rejections));
    CHECK(result.examples.size() + result.rejections.size() == static_cast<std::size_t>(kItems));
    bool sorted = std::is_sorted(result.examples.begin(), result.examples.end(),
                                 [](const auto& a, const auto& b) { return a.provenance.item_id < b.provenance.item_id; });
    CHECK(sorted);
    for (const auto& ex : result.examples) {
        CHECK_FALSE(ex.target.empty());
        CHECK_FALSE(ex.annotated_documents.empty());
    }
}

TEST_CASE("training records without credibility labels are rejected on load") {
    auto j = nlohmann::json{{"instruction", "i"}, {"input", "Question: Q?\nDocs:\nText: plain"}, {"output", "o"},
                            {"meta", {{"dataset", "d"}, {"item_id", "q"}, {"generator", "g"}}}};
    CHECK_THROWS_AS(training_example_from_json(j), SchemaError);
}

TEST_CASE("fake claims must assert the wrong option") {
    gateway::Gateway gw(mock_config({contains("Nikki Haley", {"Nikki Haley dropped out of the race."})}, "Nothing."));
    TextGenerator gen(gw);
    auto claim = generate_fake_claim(gen, "Which candidate dropped out?", "Nikki Haley");
    CHECK(claim.find("Nikki Haley") != std::string::npos);
    CHECK(claim == generate_fake_claim(gen, "Which candidate dropped out?", "Nikki Haley"));
    CHECK_THROWS_AS(generate_fake_claim(gen, "Which candidate dropped out?", ""), PreconditionError);
    CHECK_THROWS_AS(generate_fake_claim(gen, "", "Nikki Haley"), PreconditionError);

    gateway::Gateway stubborn(mock_config({}, "I will not."));
    TextGenerator gen2(stubborn);
    CHECK_THROWS_AS(generate_fake_claim(gen2, "Which candidate dropped out?", "Nikki Haley"), ValidationError);
}

TEST_CASE("fake news documents are low-reliability noise") {
    gateway::Gateway gw(mock_config(
        {contains("news article", {"Haley quits. Sources confirm the exit. More details follow."}),
         contains("Twitter post", {"BREAKING: Haley is out! #election"})}));
    TextGenerator gen(gw);
    auto news = generate_fake_news(gen, "Nikki Haley dropped out.", NewsStyle::News, "f1");
    auto tweet = generate_fake_news(gen, "Nikki Haley dropped out.", NewsStyle::Twitter, "f2");
    for (const auto* d : {&news, &tweet}) {
        CHECK(d->source == kFabricatedSource);
        CHECK(d->source_reliability == CredibilityLevel(1));
        CHECK(d->is_noise == true);
    }
    CHECK(news.text.find(". ") != std::string::npos);
    CHECK(tweet.text.size() < news.text.size());
    CHECK(news.extra["style"] == "news");

    // A real article keeps the reliability its source earns.
    credibility::CredibilityPolicy p;
    p.source_levels["reuters"] = 3;
    auto q = item("q", "Q?", {"A"}, {doc("real", "Haley remains in the race.", 0.9), news});
    q.documents[0].source = "reuters";
    q.documents[1].relevance_score = 0.8;
    auto assessed = credibility::assess(q, p);
    CHECK(assessed.documents[0].credibility->value() == 3);
    CHECK(assessed.documents[1].credibility->value() == 1);
}

TEST_CASE("validity period votes") {
    auto run = [](std::vector<std::string> answers) {
        gateway::Gateway gw(mock_config({contains("Validity period", std::move(answers))}));
        TextGenerator gen(gw);
        return estimate_validity_period(gen, "Who leads the polls?");
    };
    CHECK(run({"30", "30", "30"}) == 30);
    CHECK(run({"7", "30", "30"}) == 30);
    CHECK(run({"7", "30", "90"}) == 7);
    CHECK(run({"About 365 days.", "90", "365"}) == 365);
    CHECK_THROWS_AS(run({"soon", "later", "never"}), ValidationError);

    gateway::Gateway gw(mock_config({}, "30"));
    TextGenerator gen(gw);
    CHECK_THROWS_AS(estimate_validity_period(gen, "Q", 2), PreconditionError);
    CHECK(parse_validity_choice("maybe 12 or 90") == std::optional<int>(90));
    CHECK_FALSE(parse_validity_choice("300").has_value());
}

TEST_CASE("validity estimates stay in the choice set") {
    std::mt19937_64 rng(37);
    const std::vector<std::string> pool = {"7", "30", "90", "365", "junk", "30 days", "a week (7)"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> answers(3);
        for (auto& a : answers) a = pool[rng() % pool.size()];
        answers[0] = "90";
        gateway::Gateway gw(mock_config({contains("Validity period", answers)}));
        TextGenerator gen(gw);
        int v = estimate_validity_period(gen, "Q?");
        CHECK(std::find(std::begin(kValidityChoices), std::end(kValidityChoices), v) != std::end(kValidityChoices));
    }
}

TEST_CASE("noise counts round half up") {
    CHECK(noise_count(0.8, 5) == 4);
    CHECK(noise_count(0.5, 4) == 2);
    CHECK(noise_count(0.5, 5) == 3);
    CHECK(noise_count(0.67, 3) == 2);
    CHECK(noise_count(0.0, 5) == 0);
}

TEST_CASE("mix_noise examples") {
    std::vector<Document> relevant, noise;
    for (int i = 0; i < 3; ++i) relevant.push_back(doc("r" + std::to_string(i), "rel"));
    for (int i = 0; i < 4; ++i) noise.push_back(doc("n" + std::to_string(i), "noise"));
    auto count_noise = [](const std::vector<Document>& docs) {
        return std::count_if(docs.begin(), docs.end(), [](const Document& d) { return d.id[0] == 'n'; });
    };
    PollutionSpec spec;
    spec.total_documents = 5;
    spec.noise_ratio = 0.8;
    auto out = mix_noise(relevant, noise, spec);
    CHECK(out.size() == 5);
    CHECK(count_noise(out) == 4);

    spec.total_documents = 4;
    spec.noise_ratio = 0.5;
    CHECK(count_noise(mix_noise(relevant, noise, spec)) == 2);

    spec.total_documents = 3;
    spec.noise_ratio = 0.0;
    CHECK(count_noise(mix_noise(relevant, noise, spec)) == 0);

    spec.noise_ratio = 0.9;
    spec.total_documents = 5;
    CHECK_THROWS_AS(mix_noise(relevant, noise, spec), PreconditionError);  // needs 5 noise
    spec.noise_ratio = 0.2;
    CHECK_THROWS_AS(mix_noise(relevant, noise, spec), PreconditionError);  // needs 4 relevant
    spec.noise_ratio = 1.0;
    CHECK_THROWS_AS(mix_noise(relevant, noise, spec), ConfigError);
}

TEST_CASE("mix_noise is seed-deterministic and sized exactly") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Document> relevant, noise;
        std::size_t nr = 1 + rng() % 6;
        std::size_t nn = rng() % 8;
        for (std::size_t i = 0; i < nr; ++i) relevant.push_back(doc("r" + std::to_string(i), "rel"));
        for (std::size_t i = 0; i < nn; ++i) noise.push_back(doc("n" + std::to_string(i), "noise"));
        PollutionSpec spec;
        spec.total_documents = 1 + static_cast<int>(rng() % 8);
        spec.noise_ratio = static_cast<double>(rng() % 10) / 10.0;
        spec.seed = rng();
        spec.placement = rng() % 2 ? Placement::Shuffle : Placement::NoiseFirst;
        int need = noise_count(spec.noise_ratio, spec.total_documents);
        int need_rel = spec.total_documents - need;
        if (need_rel < 1 || static_cast<std::size_t>(need) > nn || static_cast<std::size_t>(need_rel) > nr) {
            CHECK_THROWS_AS(mix_noise(relevant, noise, spec), PreconditionError);
            continue;
        }
        auto a = mix_noise(relevant, noise, spec);
        CHECK(a == mix_noise(relevant, noise, spec));
        CHECK(a.size() == static_cast<std::size_t>(spec.total_documents));
        std::set<std::string> ids;
        int got_noise = 0;
        for (const auto& d : a) {
            ids.insert(d.id);
            got_noise += d.id[0] == 'n';
        }
        CHECK(ids.size() == a.size());
        CHECK(got_noise == need);
        if (spec.placement == Placement::NoiseFirst) {
            for (int i = 0; i < need; ++i) CHECK(a[static_cast<std::size_t>(i)].id[0] == 'n');
        }
    }
}

TEST_CASE("seeded rng is portable") {
    // splitmix64 reference outputs for seed 0.
    SeededRng rng(0);
    CHECK(rng.next() == 0xe220a8397b1dcdafULL);
    CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
    SeededRng bounded(5);
    for (int i = 0; i < 1000; ++i) CHECK(bounded.below(7) < 7);
    CHECK(derive_seed(1, "q1", 0.2) == derive_seed(1, "q1", 0.2));
    CHECK(derive_seed(1, "q1", 0.2) != derive_seed(1, "q1", 0.4));
    CHECK(derive_seed(1, "q1", 0.2) != derive_seed(2, "q1", 0.2));
}

TEST_CASE("pollute_dataset sizes mixtures around the relevant pool") {
    Dataset ds = credrag::testing::gold_plus_noise_dataset(10, 4);
    PolluteOptions opts;
    opts.seed = 9;
    for (double ratio : {0.2, 0.4, 0.6, 0.8}) {
        auto out = pollute_dataset(ds, ratio, opts);
        const auto& meta = out.metadata["pollution"];
        int total = pollution_total(ratio, 1, std::nullopt);
        CHECK(meta["realized_total_documents"] == 10 * total);
        CHECK(meta["realized_noise_documents"] == 10 * noise_count(ratio, total));
        for (const auto& q : out.items) {
            CHECK(std::count_if(q.documents.begin(), q.documents.end(), [](const Document& d) { return d.is_gold == true; }) == 1);
        }
    }
    opts.total_documents = 5;
    auto fixed = pollute_dataset(ds, 0.8, opts);
    CHECK(fixed.items[0].documents.size() == 5);
    opts.total_documents = 6;
    CHECK_THROWS_AS(pollute_dataset(ds, 0.8, opts), PreconditionError);
}

TEST_CASE("pollute_item fabricates missing noise for multiple-choice items") {
    QAItem q;
    q.id = "mc";
    q.question = "Which candidate dropped out?";
    q.options = {{"A", "Nikki Haley"}, {"B", "Mike Pence"}};
    q.correct_option = "B";
    Document real = doc("real", "Mike Pence ended his campaign.");
    real.is_noise = false;
    q.documents = {real};

    gateway::Gateway gw(mock_config({contains("declarative sentence", {"Nikki Haley dropped out of the race."}),
                                     contains("news article", {"Haley quits. Sources confirm it."}),
                                     contains("Twitter post", {"Haley is out!"})}));
    TextGenerator gen(gw);
    PolluteOptions opts;
    opts.generator = &gen;
    auto out = pollute_item(q, 0.75, opts);
    CHECK(out.documents.size() == 4);
    int fabricated = 0;
    for (const auto& d : out.documents) fabricated += d.source == kFabricatedSource;
    CHECK(fabricated == 3);
    CHECK(pollute_item(q, 0.75, opts) == out);
}
