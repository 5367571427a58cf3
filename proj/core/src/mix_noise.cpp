#include "credrag/mix_noise.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "credrag/error.hpp"
#include "credrag/hash.hpp"

namespace credrag::datagen {

std::string to_string(NewsStyle s) { return s == NewsStyle::News ? "news" : "twitter"; }

NewsStyle parse_news_style(std::string_view s) {
    if (s == "news") return NewsStyle::News;
    if (s == "twitter") return NewsStyle::Twitter;
    throw ConfigError("unknown news style '" + std::string(s) + "'");
}

void PollutionSpec::validate() const {
    if (!(noise_ratio >= 0.0 && noise_ratio < 1.0)) {
        throw ConfigError("noise ratio must lie in [0, 1), got " + std::to_string(noise_ratio));
    }
    if (total_documents < 1) throw ConfigError("total_documents must be >= 1");
}

int noise_count(double noise_ratio, int total_documents) {
    // The epsilon absorbs representation error such as 0.7 * 5 = 3.4999...
    return static_cast<int>(std::floor(noise_ratio * total_documents + 0.5 + 1e-9));
}

std::uint64_t SeededRng::next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = next();
    } while (v >= limit);
    return v % bound;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, SeededRng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

std::vector<Document> mix_noise(const std::vector<Document>& relevant, const std::vector<Document>& noise,
                                const PollutionSpec& spec) {
    spec.validate();
    const int n_noise = noise_count(spec.noise_ratio, spec.total_documents);
    const int n_relevant = spec.total_documents - n_noise;
    if (n_relevant < 1) {
        throw PreconditionError("ratio " + std::to_string(spec.noise_ratio) + " of " +
                                std::to_string(spec.total_documents) + " documents leaves no relevant document");
    }
    if (static_cast<std::size_t>(n_noise) > noise.size()) {
        throw PreconditionError("noise pool has " + std::to_string(noise.size()) + " documents, need " +
                                std::to_string(n_noise));
    }
    if (static_cast<std::size_t>(n_relevant) > relevant.size()) {
        throw PreconditionError("relevant pool has " + std::to_string(relevant.size()) + " documents, need " +
                                std::to_string(n_relevant));
    }

    SeededRng rng(spec.seed);
    std::vector<Document> picked_noise, picked_relevant;
    for (auto i : sample_indices(noise.size(), static_cast<std::size_t>(n_noise), rng)) picked_noise.push_back(noise[i]);
    for (auto i : sample_indices(relevant.size(), static_cast<std::size_t>(n_relevant), rng)) {
        picked_relevant.push_back(relevant[i]);
    }

    std::vector<Document> out = std::move(picked_noise);
    out.insert(out.end(), picked_relevant.begin(), picked_relevant.end());
    if (spec.placement == Placement::Shuffle) seeded_shuffle(out, rng);
    return out;
}

std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view item_id, double ratio) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", ratio);
    std::string key = std::to_string(run_seed);
    key += '\x1f';
    key += item_id;
    key += '\x1f';
    key += buf;
    return sha256_u64(key);
}

}  // namespace credrag::datagen
