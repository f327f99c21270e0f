#pragma once

#include <vector>

#include "kmlab/dataset.hpp"

namespace kmlab {

struct ClassifRisk {
  double value = 0.0;
  // matching[j] = cell of the first partition matched to cell j of the
  // second; the permutation attaining the minimum
  std::vector<int> matching;
};

// Fraction of points placed in different cells by the two assignments,
// minimized over cell permutations. Exhaustive search up to k = 8, optimal
// assignment matching on the confusion matrix beyond; both are exact.
ClassifRisk classif_risk_empirical(const Assignment& a, const Assignment& b, int k);

// sigma maximizing sum_j counts[sigma[j]][j] over permutations (square
// matrix). O(k^3) assignment solver.
std::vector<int> best_label_matching(const std::vector<std::vector<double>>& counts);

}  // namespace kmlab
