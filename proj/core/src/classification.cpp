#include "kmlab/classification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kmlab {

namespace {

// O(k^3) assignment on a square cost matrix (potentials / shortest
// augmenting path). Returns row assigned to each column.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int col = 1; col <= n; ++col) {
    p[0] = col;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  // p[j] = row matched to column j (1-based)
  std::vector<int> row_of_col(n);
  for (int j = 1; j <= n; ++j) row_of_col[j - 1] = p[j] - 1;
  return row_of_col;
}

}  // namespace

std::vector<int> best_label_matching(const std::vector<std::vector<double>>& counts) {
  const int k = static_cast<int>(counts.size());
  if (k == 0) return {};
  if (k <= 8) {
    std::vector<int> perm(k), best_perm(k);
    for (int j = 0; j < k; ++j) perm[j] = j;
    best_perm = perm;
    double best = -1.0;
    do {
      double trace = 0.0;
      for (int j = 0; j < k; ++j) trace += counts[perm[j]][j];
      if (trace > best) {
        best = trace;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best_perm;
  }
  // maximize the trace == minimize (max - counts)
  double max_entry = 0.0;
  for (const auto& row : counts)
    for (double v : row) max_entry = std::max(max_entry, v);
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) cost[i][j] = max_entry - counts[i][j];
  return min_cost_assignment(cost);
}

ClassifRisk classif_risk_empirical(const Assignment& a, const Assignment& b, int k) {
  if (a.cells.size() != b.cells.size())
    throw InputError("classif_risk_empirical: assignment lengths differ");
  if (k < 1) throw InputError("classif_risk_empirical: k must be >= 1");
  const std::size_t n = a.cells.size();
  ClassifRisk risk;
  risk.matching.resize(k);
  for (int j = 0; j < k; ++j) risk.matching[j] = j;
  if (n == 0) return risk;

  std::vector<std::vector<double>> counts(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const int u = a.cells[i];
    const int v = b.cells[i];
    if (u < 0 || u >= k || v < 0 || v >= k)
      throw InputError("classif_risk_empirical: cell index out of range");
    counts[u][v] += 1.0;
  }
  risk.matching = best_label_matching(counts);
  double agree = 0.0;
  for (int j = 0; j < k; ++j) agree += counts[risk.matching[j]][j];
  risk.value = 1.0 - agree / static_cast<double>(n);
  return risk;
}

}  // namespace kmlab
