#pragma once

// Reference implementations written independently of the library, used as
// test oracles. They favor obviousness over speed.

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace credrag::testing {

inline int credibility_oracle(int r, int s, int t, int th) { return std::min(std::max(r - t / th, 1), s); }

/// Tests each score against the explicitly listed interior bin edges.
inline std::vector<int> interval_oracle(const std::vector<double>& s, int levels) {
    double lo = *std::min_element(s.begin(), s.end());
    double hi = *std::max_element(s.begin(), s.end());
    if (hi == lo) return std::vector<int>(s.size(), (levels + 1) / 2);
    std::vector<double> edges;
    for (int k = 1; k < levels; ++k) edges.push_back(lo + (hi - lo) * k / levels);
    std::vector<int> out;
    for (double x : s) {
        int level = 1;
        for (double e : edges)
            if (x >= e) ++level;
        out.push_back(level);
    }
    return out;
}

/// Ranks by (score desc, index asc) and deals ranks into groups whose sizes
/// are floor(n/L) plus one for the top n mod L groups.
inline std::vector<int> count_oracle(const std::vector<double>& s, int levels) {
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s[a] != s[b] ? s[a] > s[b] : a < b;
    });
    const auto L = static_cast<std::size_t>(levels);
    std::vector<std::size_t> sizes(L, s.size() / L);
    for (std::size_t g = 0; g < s.size() % L; ++g) ++sizes[g];
    std::vector<int> out(s.size());
    std::size_t rank = 0;
    for (std::size_t g = 0; g < L; ++g)
        for (std::size_t i = 0; i < sizes[g]; ++i) out[order[rank++]] = levels - static_cast<int>(g);
    return out;
}

/// Memoized top-down LCS recursion.
inline std::size_t lcs_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<int>> memo(a.size() + 1, std::vector<int>(b.size() + 1, -1));
    std::function<int(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> int {
        if (i == a.size() || j == b.size()) return 0;
        int& m = memo[i][j];
        if (m >= 0) return m;
        if (a[i] == b[j]) return m = 1 + go(i + 1, j + 1);
        return m = std::max(go(i + 1, j), go(i, j + 1));
    };
    return static_cast<std::size_t>(go(0, 0));
}

inline double rouge_l_oracle(const std::vector<std::string>& c, const std::vector<std::string>& r) {
    if (c.empty() || r.empty()) return 0.0;
    double l = static_cast<double>(lcs_oracle(c, r));
    if (l == 0) return 0.0;
    double p = l / static_cast<double>(c.size());
    double rec = l / static_cast<double>(r.size());
    return 2 * p * rec / (p + rec);
}

}  // namespace credrag::testing
