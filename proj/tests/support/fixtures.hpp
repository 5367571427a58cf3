#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "credrag/types.hpp"

namespace credrag::testing {

inline Document doc(std::string id, std::string text, std::optional<double> score = std::nullopt,
                    std::optional<int> credibility = std::nullopt) {
    Document d;
    d.id = std::move(id);
    d.text = std::move(text);
    d.relevance_score = score;
    if (credibility) d.credibility = CredibilityLevel(*credibility);
    return d;
}

inline QAItem item(std::string id, std::string question, std::vector<std::string> answers,
                   std::vector<Document> documents = {}) {
    QAItem q;
    q.id = std::move(id);
    q.question = std::move(question);
    q.answers = std::move(answers);
    q.documents = std::move(documents);
    return q;
}

/// Removes the directory on scope exit.
class TempDir {
  public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("credrag-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

/// Items with one answer-bearing gold document and `noise_docs` distractors
/// that never mention the answer. Relevance favors the gold document but
/// distractors come first in the stored order.
inline Dataset gold_plus_noise_dataset(std::size_t items, std::size_t noise_docs, std::string name = "synthetic") {
    Dataset ds;
    ds.name = std::move(name);
    for (std::size_t i = 0; i < items; ++i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof idbuf, "q%04zu", i);
        std::string id = idbuf;
        std::string answer = "Answer" + std::to_string(i) + " Corp";
        QAItem q;
        q.id = id;
        q.question = "Which company is described in report " + std::to_string(i) + "?";
        q.answers = {answer};
        for (std::size_t n = 0; n < noise_docs; ++n) {
            Document d;
            d.id = id + "-n" + std::to_string(n);
            d.text = "Unrelated bulletin " + std::to_string(n) + " about weather patterns in region " +
                     std::to_string(i) + ".";
            d.relevance_score = 0.1 + 0.05 * static_cast<double>(n);
            d.is_gold = false;
            d.is_noise = true;
            q.documents.push_back(std::move(d));
        }
        Document gold;
        gold.id = id + "-gold";
        gold.text = "Report " + std::to_string(i) + " describes " + answer + " in detail.";
        gold.relevance_score = 0.95;
        gold.is_gold = true;
        gold.is_noise = false;
        q.documents.push_back(std::move(gold));
        ds.items.push_back(std::move(q));
    }
    return ds;
}

}  // namespace credrag::testing
