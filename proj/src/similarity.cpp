#include "collapse/similarity.hpp"

#include <vector>

namespace collapse {

namespace {

struct Match {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t size = 0;
};

// Longest common substring of a[alo,ahi) and b[blo,bhi). `run` holds, for
// each position j of b, the length of the common run ending at (i-1, j-1).
Match longest_match(std::string_view a, std::size_t alo, std::size_t ahi, std::string_view b,
                    std::size_t blo, std::size_t bhi, std::vector<std::size_t>& run,
                    std::vector<std::size_t>& next) {
    Match best{alo, blo, 0};
    std::fill(run.begin() + blo, run.begin() + bhi + 1, 0);
    for (std::size_t i = alo; i < ahi; ++i) {
        next[blo] = 0;
        for (std::size_t j = blo; j < bhi; ++j) {
            std::size_t k = a[i] == b[j] ? run[j] + 1 : 0;
            next[j + 1] = k;
            // Strict '>' keeps the earliest end in a, then the earliest in b.
            if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
        }
        std::swap(run, next);
    }
    return best;
}

std::size_t ordered_matches(std::string_view a, std::string_view b) {
    std::vector<std::size_t> run(b.size() + 1, 0);
    std::vector<std::size_t> next(b.size() + 1, 0);
    struct Range {
        std::size_t alo, ahi, blo, bhi;
    };
    std::vector<Range> pending{{0, a.size(), 0, b.size()}};
    std::size_t total = 0;
    while (!pending.empty()) {
        auto [alo, ahi, blo, bhi] = pending.back();
        pending.pop_back();
        if (alo >= ahi || blo >= bhi) continue;
        auto m = longest_match(a, alo, ahi, b, blo, bhi, run, next);
        if (m.size == 0) continue;
        total += m.size;
        pending.push_back({alo, m.a, blo, m.b});
        pending.push_back({m.a + m.size, ahi, m.b + m.size, bhi});
    }
    return total;
}

}  // namespace

std::size_t gestalt_matches(std::string_view a, std::string_view b) {
    // Tie-breaking depends on argument order; fixing the order makes the
    // measure symmetric.
    return b < a ? ordered_matches(b, a) : ordered_matches(a, b);
}

double ratcliff_obershelp(std::string_view a, std::string_view b) {
    const std::size_t total = a.size() + b.size();
    if (total == 0) return 1.0;
    return 2.0 * static_cast<double>(gestalt_matches(a, b)) / static_cast<double>(total);
}

}  // namespace collapse
