#pragma once

#include <span>
#include <vector>

#include "kmlab/dataset.hpp"

namespace kmlab {

// Probability distribution supported on finitely many points.
struct FiniteDistribution {
  std::vector<double> support;  // r*dim row-major
  std::vector<double> weights;  // size r, nonnegative, sums to 1 (1e-12)
  int dim = 0;
  double enclosing_radius = 0.0;

  std::size_t size() const {
    return dim > 0 ? support.size() / static_cast<std::size_t>(dim) : 0;
  }
  std::span<const double> point(std::size_t i) const {
    return {support.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  void validate() const;  // throws InputError on invariant violations

  static FiniteDistribution uniform_on(std::vector<double> support, int dim);
};

// Exact population distortion: weighted sum of contrasts.
double finite_distortion(const FiniteDistribution& dist, const Codebook& codebook);

// Cell masses under the tessellation convention (ties to the lowest index).
std::vector<double> finite_cell_masses(const FiniteDistribution& dist, const Codebook& codebook);

// Closed Voronoi cell masses: support points on a shared boundary count in
// every touching cell.
std::vector<double> finite_closed_cell_masses(const FiniteDistribution& dist,
                                              const Codebook& codebook);

}  // namespace kmlab
