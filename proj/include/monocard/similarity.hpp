#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace monocard {

using OpSequence = std::vector<std::string>;

/// Levenshtein distance with whole tokens as symbols (O(|a|·|b|) DP).
std::size_t editDistance(const OpSequence& a, const OpSequence& b);

/// True iff editDistance(a, b) <= threshold (default one edit step).
bool structurallySimilar(const OpSequence& a, const OpSequence& b, std::size_t threshold = 1);

}  // namespace monocard
