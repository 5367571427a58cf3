#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "credrag/types.hpp"

namespace credrag::datagen {

enum class NewsStyle { News, Twitter };

std::string to_string(NewsStyle s);
NewsStyle parse_news_style(std::string_view s);

enum class Placement {
    /// Seeded shuffle of the combined sample.
    Shuffle,
    /// Noise block first, then relevant documents, each in sampled order.
    NoiseFirst,
};

struct PollutionSpec {
    double noise_ratio = 0.0;
    int total_documents = 1;
    std::vector<NewsStyle> styles{NewsStyle::News, NewsStyle::Twitter};
    std::uint64_t seed = 0;
    Placement placement = Placement::Shuffle;

    /// Throws ConfigError.
    void validate() const;
};

/// round-half-up(ratio * total)
int noise_count(double noise_ratio, int total_documents);

/// Portable seeded generator: identical sequences on every platform,
/// unlike the standard distributions.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound);

  private:
    std::uint64_t state_;
};

/// `count` distinct indices of [0, n) in sampled order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, SeededRng& rng);

template <typename T>
void seeded_shuffle(std::vector<T>& values, SeededRng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(values[i - 1], values[j]);
    }
}

/// Draws round(ratio * total) noise documents and the remainder from the
/// relevant pool, without replacement. Throws PreconditionError when a pool
/// is too small or no relevant document would remain.
std::vector<Document> mix_noise(const std::vector<Document>& relevant, const std::vector<Document>& noise,
                                const PollutionSpec& spec);

/// Per-(run, item, ratio) seed, so adding a ratio leaves other mixtures alone.
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view item_id, double ratio);

}  // namespace credrag::datagen
