#include "kmlab/finite_support.hpp"

#include <cmath>

#include "kmlab/distortion.hpp"

namespace kmlab {

void FiniteDistribution::validate() const {
  if (dim <= 0) throw InputError("finite distribution: dimension must be positive");
  if (support.size() % static_cast<std::size_t>(dim) != 0)
    throw InputError("finite distribution: ragged support");
  if (weights.size() != size()) throw InputError("finite distribution: weight count mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InputError("finite distribution: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("finite distribution: weights must sum to 1");
  for (std::size_t i = 0; i < size(); ++i) {
    if (norm(point(i)) > enclosing_radius + 1e-9)
      throw InputError("finite distribution: support point outside the enclosing ball");
  }
}

FiniteDistribution FiniteDistribution::uniform_on(std::vector<double> support, int dim) {
  FiniteDistribution dist;
  dist.dim = dim;
  dist.support = std::move(support);
  const std::size_t r = dist.size();
  if (r == 0) throw InputError("finite distribution: empty support");
  dist.weights.assign(r, 1.0 / static_cast<double>(r));
  double max_norm = 0.0;
  for (std::size_t i = 0; i < r; ++i) max_norm = std::max(max_norm, norm(dist.point(i)));
  dist.enclosing_radius = max_norm;
  dist.validate();
  return dist;
}

double finite_distortion(const FiniteDistribution& dist, const Codebook& codebook) {
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    total += dist.weights[i] * gamma_contrast(codebook, dist.point(i));
  }
  return total;
}

std::vector<double> finite_cell_masses(const FiniteDistribution& dist, const Codebook& codebook) {
  std::vector<double> masses(codebook.k(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    masses[assign(dist.point(i), codebook)] += dist.weights[i];
  }
  return masses;
}

std::vector<double> finite_closed_cell_masses(const FiniteDistribution& dist,
                                              const Codebook& codebook) {
  const int k = codebook.k();
  std::vector<double> masses(k, 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto x = dist.point(i);
    double best = squared_distance(x, codebook.point(0));
    for (int j = 1; j < k; ++j) best = std::min(best, squared_distance(x, codebook.point(j)));
    for (int j = 0; j < k; ++j) {
      if (squared_distance(x, codebook.point(j)) == best) masses[j] += dist.weights[i];
    }
  }
  return masses;
}

}  // namespace kmlab
