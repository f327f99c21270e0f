#include "kmlab/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "kmlab/distortion.hpp"

namespace kmlab {

namespace {

bool lex_less(std::span<const double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Advances a base-k counter; returns false after the last assignment.
bool next_assignment(std::vector<int>& cells, int k) {
  for (std::size_t i = cells.size(); i-- > 0;) {
    if (++cells[i] < k) return true;
    cells[i] = 0;
  }
  return false;
}

bool surjective(const std::vector<int>& cells, int k) {
  unsigned mask = 0;
  for (int c : cells) mask |= 1u << c;
  return mask == (1u << k) - 1u;
}

// Weighted centroids of an assignment; every cell must be nonempty.
Codebook weighted_centroids(std::span<const double> points, std::span<const double> weights,
                            int dim, const std::vector<int>& cells, int k) {
  Codebook c;
  c.dim = dim;
  c.coords.assign(static_cast<std::size_t>(k) * dim, 0.0);
  std::vector<double> mass(k, 0.0);
  const std::size_t n = cells.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int j = cells[i];
    mass[j] += weights[i];
    for (int t = 0; t < dim; ++t)
      c.coords[static_cast<std::size_t>(j) * dim + t] += weights[i] * points[i * dim + t];
  }
  for (int j = 0; j < k; ++j) {
    for (int t = 0; t < dim; ++t) c.coords[static_cast<std::size_t>(j) * dim + t] /= mass[j];
  }
  return c;
}

}  // namespace

Codebook canonical_codebook(const Codebook& codebook) {
  const int k = codebook.k();
  std::vector<int> order(k);
  for (int j = 0; j < k; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return lex_less(codebook.point(a), codebook.point(b));
  });
  Codebook out;
  out.dim = codebook.dim;
  out.coords.reserve(codebook.coords.size());
  for (int j : order) {
    const auto p = codebook.point(j);
    out.coords.insert(out.coords.end(), p.begin(), p.end());
  }
  return out;
}

bool codebooks_equal(const Codebook& a, const Codebook& b, double tol) {
  if (a.dim != b.dim || a.coords.size() != b.coords.size()) return false;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    if (std::abs(a.coords[i] - b.coords[i]) > tol) return false;
  }
  return true;
}

double codebook_distance(const Codebook& a, const Codebook& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    const double d = a.coords[i] - b.coords[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double codebook_distance_relabel(const Codebook& a, const Codebook& b) {
  const int k = a.k();
  if (b.k() != k || a.dim != b.dim) throw InputError("codebook_distance_relabel: shape mismatch");
  if (k > 8) throw InputError("codebook_distance_relabel: exhaustive search is limited to k <= 8");
  std::vector<int> perm(k);
  for (int j = 0; j < k; ++j) perm[j] = j;
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += squared_distance(a.point(j), b.point(perm[j]));
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best);
}

std::pair<int, double> closest_optimal(const StationaryReport& report, const Codebook& codebook) {
  if (report.optimal.empty()) throw InputError("closest_optimal: report has no optimal codebooks");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(report.optimal.size()); ++i) {
    const double d = codebook_distance_relabel(codebook, report.optimal[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return {best, best_d};
}

std::pair<Codebook, double> exact_erm(const Dataset& data, int k) {
  const std::size_t n = data.size();
  if (n == 0) throw InputError("exact_erm: empty dataset");
  if (k < 1) throw InputError("exact_erm: k must be >= 1");
  if (n > kMaxExactErmPoints || k > kMaxExactErmCells)
    throw InputError("exact_erm: instance too large for enumeration (n <= 12, k <= 3)");
  if (static_cast<std::size_t>(k) > n)
    throw InputError("exact_erm: k exceeds the number of points");

  const int d = data.dim;
  std::vector<int> cells(n, 0);
  std::vector<double> sums(static_cast<std::size_t>(k) * d);
  std::vector<long long> counts(k);
  double best = std::numeric_limits<double>::infinity();
  Codebook best_codebook;
  do {
    if (!surjective(cells, k)) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = data.point(i);
      for (int t = 0; t < d; ++t) sums[static_cast<std::size_t>(cells[i]) * d + t] += p[t];
      ++counts[cells[i]];
    }
    Codebook c;
    c.dim = d;
    c.coords.resize(static_cast<std::size_t>(k) * d);
    for (int j = 0; j < k; ++j)
      for (int t = 0; t < d; ++t)
        c.coords[static_cast<std::size_t>(j) * d + t] =
            sums[static_cast<std::size_t>(j) * d + t] / static_cast<double>(counts[j]);
    // within-cell SSE around the centroids, exact per assignment
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sse += squared_distance(data.point(i), c.point(cells[i]));
    const double distortion = sse / static_cast<double>(n);
    if (distortion < best) {  // first hit keeps the lexicographically smallest assignment
      best = distortion;
      best_codebook = std::move(c);
    }
  } while (next_assignment(cells, k));
  return {std::move(best_codebook), best};
}

std::vector<Codebook> enumerate_stationary(const FiniteDistribution& dist, int k) {
  dist.validate();
  const std::size_t r = dist.size();
  if (k < 1) throw InputError("enumerate_stationary: k must be >= 1");
  if (r > kMaxEnumerationSupport)
    throw InputError("enumerate_stationary: support too large for enumeration (r <= 12)");
  if (static_cast<std::size_t>(k) > r)
    throw InputError("enumerate_stationary: k exceeds the support size");
  if (std::pow(static_cast<double>(k), static_cast<double>(r)) > 2e6)
    throw InputError("enumerate_stationary: k^r enumeration infeasible");

  std::vector<Codebook> found;
  std::vector<int> cells(r, 0);
  do {
    if (!surjective(cells, k)) continue;
    const Codebook c = weighted_centroids(dist.support, dist.weights, dist.dim, cells, k);
    // the induced tessellation must reproduce the partition
    bool consistent = true;
    for (std::size_t i = 0; i < r && consistent; ++i) {
      consistent = assign(dist.point(i), c) == cells[i];
    }
    if (!consistent) continue;
    const Codebook canon = canonical_codebook(c);
    bool known = false;
    for (const auto& existing : found) {
      if (codebooks_equal(existing, canon, kRelabelTolerance)) {
        known = true;
        break;
      }
    }
    if (!known) found.push_back(canon);
  } while (next_assignment(cells, k));

  std::sort(found.begin(), found.end(), [](const Codebook& a, const Codebook& b) {
    return std::lexicographical_compare(a.coords.begin(), a.coords.end(), b.coords.begin(),
                                        b.coords.end());
  });
  return found;
}

StationaryReport stationary_report(const FiniteDistribution& dist, int k) {
  StationaryReport report;
  report.stationary = enumerate_stationary(dist, k);
  if (report.stationary.empty())
    throw InputError("stationary_report: no stationary codebook found");

  std::vector<double> distortions;
  distortions.reserve(report.stationary.size());
  double r_star = std::numeric_limits<double>::infinity();
  for (const auto& c : report.stationary) {
    distortions.push_back(finite_distortion(dist, c));
    r_star = std::min(r_star, distortions.back());
  }
  report.r_star = r_star;

  const double tol = 1e-12 * std::max(1.0, r_star);
  double epsilon = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < report.stationary.size(); ++i) {
    if (distortions[i] <= r_star + tol) {
      report.optimal.push_back(report.stationary[i]);
    } else {
      epsilon = std::min(epsilon, distortions[i] - r_star);
    }
  }
  report.epsilon = epsilon;

  double B = std::numeric_limits<double>::infinity();
  double p_min = std::numeric_limits<double>::infinity();
  for (const auto& c : report.optimal) {
    for (int i = 0; i < c.k(); ++i) {
      for (int j = i + 1; j < c.k(); ++j) {
        B = std::min(B, std::sqrt(squared_distance(c.point(i), c.point(j))));
      }
    }
    for (double mass : finite_cell_masses(dist, c)) p_min = std::min(p_min, mass);
  }
  report.B = B;
  report.p_min = p_min;
  return report;
}

}  // namespace kmlab
