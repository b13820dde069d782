#include "monocard/similarity.hpp"

#include <algorithm>
#include <numeric>

namespace monocard {

std::size_t editDistance(const OpSequence& a, const OpSequence& b) {
    // Single rolling row over b.
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diagonal = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t above = row[j];
            const std::size_t substitute = diagonal + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({above + 1, row[j - 1] + 1, substitute});
            diagonal = above;
        }
    }
    return row[b.size()];
}

bool structurallySimilar(const OpSequence& a, const OpSequence& b, std::size_t threshold) {
    // Lengths differing by more than the threshold can never be within it.
    const auto gap = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
    if (gap > threshold) return false;
    return editDistance(a, b) <= threshold;
}

}  // namespace monocard
