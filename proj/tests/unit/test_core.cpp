#include <fstream>
#include <random>
#include <set>

#include "doctest.h"

#include "credrag/credibility.hpp"
#include "credrag/dataset_io.hpp"
#include "credrag/error.hpp"
#include "credrag/hash.hpp"
#include "credrag/manifest.hpp"
#include "credrag/text.hpp"
#include "support/fixtures.hpp"

using namespace credrag;
using credrag::testing::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

std::string encode_utf8(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

// Mixes ASCII, Latin combining marks, CJK, emoji and JSON-special characters.
std::string random_unicode(std::mt19937_64& rng, std::size_t max_len) {
    static const std::vector<std::pair<char32_t, char32_t>> ranges = {
        {0x20, 0x7E}, {0xC0, 0x17F}, {0x300, 0x36F}, {0x391, 0x3C9}, {0x4E00, 0x4E80}, {0x1F600, 0x1F64F}};
    std::uniform_int_distribution<std::size_t> len(1, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, ranges.size() - 1);
    std::string s;
    std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        auto [lo, hi] = ranges[pick(rng)];
        std::uniform_int_distribution<std::uint32_t> cp(lo, hi);
        s += encode_utf8(static_cast<char32_t>(cp(rng)));
    }
    s = text::nfc(s);
    // Keep the first character a letter so the string is never blank after trimming.
    return "x" + s;
}

}  // namespace

TEST_CASE("load_dataset reads a minimal record") {
    TempDir dir;
    write_text(dir / "d.jsonl", R"({"id":"q1","question":"Who?","answers":["X"],"documents":[]})" "\n");
    Dataset ds = load_dataset(dir / "d.jsonl");
    REQUIRE(ds.items.size() == 1);
    CHECK(ds.items[0].id == "q1");
    CHECK(ds.items[0].answers == std::vector<std::string>{"X"});
    CHECK(ds.name == "d");
}

TEST_CASE("duplicate item ids name the offending line") {
    TempDir dir;
    std::string body;
    for (int i = 1; i <= 6; ++i)
        body += R"({"id":"q)" + std::to_string(i) + R"(","question":"Q?","answers":["A"],"documents":[]})" "\n";
    body += R"({"id":"q3","question":"Q?","answers":["A"],"documents":[]})" "\n";
    write_text(dir / "dup.jsonl", body);
    try {
        load_dataset(dir / "dup.jsonl");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.line() == 7);
        CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    }
}

TEST_CASE("malformed and invalid records carry line numbers") {
    TempDir dir;
    SUBCASE("bad json") {
        write_text(dir / "a.jsonl", R"({"id":"q1","question":"Q","answers":["A"]})" "\n{not json\n");
        try {
            load_dataset(dir / "a.jsonl");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("credibility out of range") {
        write_text(dir / "b.jsonl",
                   R"({"id":"q1","question":"Q","answers":["A"],"documents":[{"id":"d","text":"t","credibility":4}]})"
                   "\n");
        CHECK_THROWS_AS(load_dataset(dir / "b.jsonl"), SchemaError);
    }
    SUBCASE("correct_option missing from options") {
        write_text(dir / "c.jsonl", R"({"id":"q1","question":"Q","options":{"A":"x"},"correct_option":"B"})" "\n");
        CHECK_THROWS_AS(load_dataset(dir / "c.jsonl"), SchemaError);
    }
    SUBCASE("bad date") {
        write_text(dir / "d.jsonl", R"({"id":"q1","question":"Q","answers":["A"],"query_date":"2023-13-40"})" "\n");
        CHECK_THROWS_AS(load_dataset(dir / "d.jsonl"), Error);
    }
    SUBCASE("empty file") {
        write_text(dir / "e.jsonl", "");
        CHECK_THROWS_AS(load_dataset(dir / "e.jsonl"), Error);
        CHECK(load_dataset(dir / "e.jsonl", LoadOptions{3, true}).items.empty());
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_dataset(dir / "absent.jsonl"), IoError);
    }
}

TEST_CASE("empty dataset saves to an empty file") {
    TempDir dir;
    Dataset ds;
    ds.name = "empty";
    save_dataset(ds, dir / "e.jsonl");
    CHECK(read_file(dir / "e.jsonl").empty());
}

TEST_CASE("a 480-item file with five documents each loads fully") {
    TempDir dir;
    Dataset ds;
    ds.name = "polluted";
    for (int i = 0; i < 480; ++i) {
        QAItem q;
        q.id = "n" + std::to_string(i);
        q.question = "Which candidate is mentioned in story " + std::to_string(i) + "?";
        q.options = {{"A", "Nikki Haley"}, {"B", "Ron DeSantis"}, {"C", "Mike Pence"}, {"D", "Tim Scott"}};
        q.correct_option = "C";
        for (int d = 0; d < 5; ++d) {
            Document doc;
            doc.id = q.id + "-" + std::to_string(d);
            doc.text = "Story text " + std::to_string(d);
            doc.is_noise = d > 0;
            q.documents.push_back(doc);
        }
        ds.items.push_back(q);
    }
    save_dataset(ds, dir / "p.jsonl");
    Dataset back = load_dataset(dir / "p.jsonl");
    CHECK(back.items.size() == 480);
    CHECK(back.document_count() == 2400);
    CHECK(back.items[0].golden_answer() == "C)Mike Pence");
}

TEST_CASE("round trip is field-for-field and canonical over random unicode") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int round = 0; round < 25; ++round) {
        Dataset ds;
        ds.name = "rt" + std::to_string(round);
        ds.metadata = {{"origin", random_unicode(rng, 8)}};
        int items = 1 + static_cast<int>(rng() % 5);
        for (int i = 0; i < items; ++i) {
            QAItem q;
            q.id = "id" + std::to_string(i);
            q.question = random_unicode(rng, 30);
            q.answers = {random_unicode(rng, 10)};
            if (rng() % 2) q.query_date = Date::parse("2023-11-06");
            if (rng() % 3 == 0) q.explanation = random_unicode(rng, 20);
            if (rng() % 4 == 0) q.extra["annotator"] = random_unicode(rng, 5);
            int docs = static_cast<int>(rng() % 4);
            for (int d = 0; d < docs; ++d) {
                Document doc;
                doc.id = q.id + "d" + std::to_string(d);
                doc.text = random_unicode(rng, 40);
                doc.source = rng() % 2 ? "reuters" : "";
                if (rng() % 2) doc.relevance_score = unit(rng);
                if (rng() % 2) doc.credibility = CredibilityLevel(1 + static_cast<int>(rng() % 3));
                if (rng() % 2) doc.source_reliability = CredibilityLevel(1 + static_cast<int>(rng() % 3));
                if (rng() % 2) doc.published_date = Date::parse("2023/10/07");
                if (rng() % 2) doc.is_gold = rng() % 2 == 0;
                if (rng() % 2) doc.is_noise = rng() % 2 == 0;
                if (rng() % 5 == 0) doc.extra["url"] = "https://example.org/" + std::to_string(d);
                q.documents.push_back(doc);
            }
            ds.items.push_back(q);
        }
        TempDir dir;
        save_dataset(ds, dir / "a.jsonl");
        Dataset back = load_dataset(dir / "a.jsonl");
        REQUIRE(back == ds);
        save_dataset(back, dir / "b.jsonl");
        CHECK(read_file(dir / "a.jsonl") == read_file(dir / "b.jsonl"));
    }
}

TEST_CASE("loading normalizes strings to NFC") {
    TempDir dir;
    // "e" followed by a combining acute accent.
    write_text(dir / "n.jsonl", "{\"id\":\"q1\",\"question\":\"Caf" "e\xCC\x81?\",\"answers\":[\"A\"]}\n");
    Dataset ds = load_dataset(dir / "n.jsonl");
    CHECK(ds.items[0].question == "Caf\xC3\xA9?");
    CHECK(text::is_nfc(ds.items[0].question));
}

TEST_CASE("dates accept both separators and emit dashes") {
    CHECK(Date::parse("2023/11/06").to_string() == "2023-11-06");
    CHECK(Date::parse("2023-11-06") == Date::parse("2023/11/06"));
    CHECK_THROWS_AS(Date::parse("2023-02-30"), ParseError);
    CHECK_THROWS_AS(Date::parse("06/11/2023"), ParseError);
}

TEST_CASE("credibility levels enforce their range and label") {
    CHECK(CredibilityLevel(1).label() == "Low");
    CHECK(CredibilityLevel(2).label() == "Medium");
    CHECK(CredibilityLevel(3).label() == "High");
    CHECK(CredibilityLevel(4, 5).label() == "4");
    CHECK(CredibilityLevel(3).is_top());
    CHECK_THROWS_AS(CredibilityLevel(0), PreconditionError);
    CHECK_THROWS_AS(CredibilityLevel(4), PreconditionError);
    CHECK_THROWS_AS(CredibilityLevel(1, 1), PreconditionError);
}

TEST_CASE("item validation") {
    auto q = credrag::testing::item("q", "Q?", {"A"});
    CHECK_NOTHROW(validate_item(q));
    q.correct_option = "A";
    CHECK_THROWS_AS(validate_item(q), SchemaError);  // options missing
    q.options = {{"A", "x"}};
    CHECK_THROWS_AS(validate_item(q), SchemaError);  // both answers and correct_option
    q.answers.clear();
    CHECK_NOTHROW(validate_item(q));
    q.documents = {credrag::testing::doc("d", "t"), credrag::testing::doc("d", "u")};
    CHECK_THROWS_AS(validate_item(q), SchemaError);
}

TEST_CASE("policy fingerprints are stable and injective over distinct policies") {
    using namespace credrag::credibility;
    std::set<std::string> canon;
    std::set<std::string> prints;
    for (int levels : {2, 3, 5})
        for (auto b : {Bucketing::EqualInterval, Bucketing::EqualCount, Bucketing::GoldLabel})
            for (int th : {7, 30, 90})
                for (bool t : {false, true})
                    for (auto g : {Granularity::DocumentLevel, Granularity::SentenceLevel})
                        for (int src = 0; src < 3; ++src) {
                            CredibilityPolicy p;
                            p.level_count = levels;
                            p.bucketing = b;
                            p.timeliness_threshold_days = th;
                            p.use_timeliness = t;
                            p.granularity = g;
                            if (src == 1) p.source_levels["blog"] = 1;
                            if (src == 2) p.default_source_level = 1;
                            canon.insert(canonical_string(p));
                            prints.insert(fingerprint(p));
                            CHECK(fingerprint(p) == fingerprint(policy_from_json(to_json(p))));
                        }
    CHECK(prints.size() == canon.size());
    CHECK(prints.size() == 3 * 3 * 3 * 2 * 2 * 3);
}

TEST_CASE("sha256 matches a known digest") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_u64("abc") == 0xba7816bf8f01cfeaULL);
}

TEST_CASE("manifest round-trips and can omit timestamps") {
    RunManifest m;
    m.run_id = "r";
    m.dataset_name = "d";
    m.strategy = "retrieval_credibility";
    m.seed = 7;
    m.run_seed = 11;
    m.started_at = utc_timestamp();
    m.finished_at = m.started_at;
    CHECK(manifest_from_json(to_json(m)) == m);
    auto bare = to_json(m, false);
    CHECK_FALSE(bare.contains("started_at"));
    CHECK_FALSE(bare.contains("finished_at"));
}

TEST_CASE("text helpers") {
    CHECK(text::collapse_whitespace("  a \t\n b\xC2\xA0 c ") == "a b c");
    CHECK(text::tokenize("Tyson Foods, Inc.") == std::vector<std::string>{"tyson", "foods", "inc"});
    CHECK(text::substitute("{a}-{b}-{c}", {{"a", "1"}, {"b", "{a}"}}) == "1-{a}-{c}");
    CHECK(text::lower("\xC3\x89TAT") == "\xC3\xA9tat");
}
