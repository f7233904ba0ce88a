#pragma once

#include <vector>

namespace etho::behavior {

// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// Interior boundaries (frame indices where the label changes).
std::vector<long long> boundaries(const std::vector<int>& labels);

// Fraction of `truth` boundaries with a predicted boundary within
// +-tolerance frames. Empty truth gives 1.
double boundary_recall(const std::vector<long long>& truth, const std::vector<long long>& predicted,
                       long long tolerance);

}  // namespace etho::behavior
