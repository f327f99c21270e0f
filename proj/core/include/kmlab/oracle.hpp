#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "kmlab/finite_support.hpp"

namespace kmlab {

// Brute-force enumeration guards. k^n assignments are visited, so these are
// strict desk-scale limits.
inline constexpr std::size_t kMaxExactErmPoints = 12;
inline constexpr int kMaxExactErmCells = 3;
inline constexpr std::size_t kMaxEnumerationSupport = 12;
inline constexpr double kRelabelTolerance = 1e-9;

// Global empirical risk minimizer by enumeration of all surjective
// assignments. Ties resolved to the lexicographically smallest assignment.
std::pair<Codebook, double> exact_erm(const Dataset& data, int k);

// All codebooks arising as weighted centroids of a surjective partition of
// the support whose induced tessellation reproduces that partition,
// deduplicated up to codepoint relabeling, in canonical sorted order.
std::vector<Codebook> enumerate_stationary(const FiniteDistribution& dist, int k);

struct StationaryReport {
  std::vector<Codebook> stationary;  // deduplicated up to relabeling
  std::vector<Codebook> optimal;     // subset of `stationary`
  // min distortion gap between non-optimal stationary codebooks and the
  // optimum; +infinity when every stationary codebook is optimal
  double epsilon = std::numeric_limits<double>::infinity();
  double B = std::numeric_limits<double>::infinity();  // min pairwise codepoint distance over optimal codebooks
  double p_min = 0.0;  // min optimal-cell mass
  double r_star = 0.0;  // optimal distortion
};

StationaryReport stationary_report(const FiniteDistribution& dist, int k);

// Codepoints sorted lexicographically; the canonical representative of a
// codebook's relabeling class.
Codebook canonical_codebook(const Codebook& codebook);
bool codebooks_equal(const Codebook& a, const Codebook& b, double tol = kRelabelTolerance);

double codebook_distance(const Codebook& a, const Codebook& b);
// min over codepoint permutations of |a - perm(b)|; exhaustive, k <= 8
double codebook_distance_relabel(const Codebook& a, const Codebook& b);

// Index into report.optimal of the closest optimal codebook after optimal
// relabeling, together with that distance.
std::pair<int, double> closest_optimal(const StationaryReport& report, const Codebook& codebook);

}  // namespace kmlab
