#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "credrag/bm25.hpp"
#include "credrag/credibility.hpp"
#include "credrag/metrics.hpp"
#include "credrag/promptkit.hpp"
#include "credrag/text.hpp"

using namespace credrag;

namespace {

std::vector<double> random_scores(std::size_t n) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& x : out) x = u(rng);
    return out;
}

std::string random_sentence(std::mt19937_64& rng, std::size_t words) {
    static const std::vector<std::string> vocab = {"recall", "nuggets", "company", "pounds", "report", "weather",
                                                   "region", "market", "shares", "policy", "court", "ruling"};
    std::vector<std::string> toks(words);
    for (auto& t : toks) t = vocab[rng() % vocab.size()];
    return text::join(toks, " ");
}

QAItem prompt_item(std::size_t docs) {
    std::mt19937_64 rng(7);
    QAItem item;
    item.id = "bench";
    item.question = "Which company recalled the nuggets?";
    item.answers = {"Tyson Foods"};
    for (std::size_t i = 0; i < docs; ++i) {
        Document d;
        d.id = "d" + std::to_string(i);
        d.text = random_sentence(rng, 40);
        d.relevance_score = static_cast<double>(rng() % 100) / 100.0;
        d.credibility = CredibilityLevel(1 + static_cast<int>(rng() % 3));
        item.documents.push_back(d);
    }
    return item;
}

void BM_BucketEqualInterval(benchmark::State& state) {
    auto scores = random_scores(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(credibility::bucket_equal_interval(scores, 3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BucketEqualInterval)->Range(8, 4096);

void BM_BucketEqualCount(benchmark::State& state) {
    auto scores = random_scores(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(credibility::bucket_equal_count(scores, 3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BucketEqualCount)->Range(8, 4096);

void BM_RougeL(benchmark::State& state) {
    std::mt19937_64 rng(3);
    auto words = static_cast<std::size_t>(state.range(0));
    auto a = random_sentence(rng, words);
    auto b = random_sentence(rng, words);
    for (auto _ : state) benchmark::DoNotOptimize(metrics::rouge_l(a, b));
}
BENCHMARK(BM_RougeL)->RangeMultiplier(4)->Range(16, 1024);

void BM_Assemble(benchmark::State& state) {
    auto item = prompt_item(static_cast<std::size_t>(state.range(0)));
    auto templates = promptkit::builtin_templates();
    promptkit::FewShotBank shots;
    auto strategy = promptkit::Strategy::retrieval_credibility();
    for (auto _ : state) benchmark::DoNotOptimize(promptkit::assemble(strategy, item, shots, templates));
}
BENCHMARK(BM_Assemble)->RangeMultiplier(4)->Range(2, 128);

void BM_Bm25Score(benchmark::State& state) {
    std::mt19937_64 rng(11);
    std::vector<std::string> corpus;
    for (int i = 0; i < state.range(0); ++i) corpus.push_back(random_sentence(rng, 60));
    credibility::Bm25Scorer scorer(corpus);
    const std::string query = "company recall ruling";
    for (auto _ : state) {
        double total = 0.0;
        for (const auto& doc : corpus) total += scorer.score(query, doc);
        benchmark::DoNotOptimize(total);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bm25Score)->RangeMultiplier(4)->Range(4, 256);

}  // namespace

BENCHMARK_MAIN();
