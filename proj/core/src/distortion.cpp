#include "kmlab/distortion.hpp"

#include <cmath>

namespace kmlab {

namespace {

// Neumaier compensated sum; keeps the distortion trace monotone down to the
// last representable decrease.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

double gamma_contrast(const Codebook& codebook, std::span<const double> x) {
  if (static_cast<int>(x.size()) != codebook.dim)
    throw InputError("gamma: point dimension does not match codebook");
  double best = squared_distance(x, codebook.point(0));
  for (int j = 1; j < codebook.k(); ++j) {
    best = std::min(best, squared_distance(x, codebook.point(j)));
  }
  return best;
}

double empirical_distortion(const Dataset& data, const Codebook& codebook) {
  if (data.size() == 0) throw InputError("empirical_distortion: empty dataset");
  CompensatedSum s;
  for (std::size_t i = 0; i < data.size(); ++i) s.add(gamma_contrast(codebook, data.point(i)));
  return s.value() / static_cast<double>(data.size());
}

CentroidUpdate centroid_update(const Dataset& data, const Assignment& assignment,
                               const Codebook& previous) {
  if (assignment.cells.size() != data.size())
    throw InputError("centroid_update: assignment size does not match dataset");
  const int k = assignment.k;
  const int d = data.dim;
  CentroidUpdate result;
  result.codebook.dim = d;
  result.codebook.coords.assign(static_cast<std::size_t>(k) * d, 0.0);
  result.empty.assign(k, 0);

  std::vector<long long> counts(k, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int j = assignment.cells[i];
    const auto p = data.point(i);
    auto target = result.codebook.mutable_point(j);
    for (int t = 0; t < d; ++t) target[t] += p[t];
    ++counts[j];
  }
  for (int j = 0; j < k; ++j) {
    auto target = result.codebook.mutable_point(j);
    if (counts[j] == 0) {
      result.empty[j] = 1;
      const auto prev = previous.point(j);
      for (int t = 0; t < d; ++t) target[t] = prev[t];
    } else {
      for (int t = 0; t < d; ++t) target[t] /= static_cast<double>(counts[j]);
    }
  }
  return result;
}

double centroid_residual(const Dataset& data, const Codebook& codebook) {
  if (data.size() == 0) throw InputError("centroid_residual: empty dataset");
  const Assignment a = partition(data, codebook);
  const int k = codebook.k();
  const int d = data.dim;
  std::vector<double> sums(static_cast<std::size_t>(k) * d, 0.0);
  std::vector<long long> counts(k, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    const int j = a.cells[i];
    for (int t = 0; t < d; ++t) sums[static_cast<std::size_t>(j) * d + t] += p[t];
    ++counts[j];
  }
  double worst = 0.0;
  for (int j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    double s = 0.0;
    const auto c = codebook.point(j);
    for (int t = 0; t < d; ++t) {
      const double diff = sums[static_cast<std::size_t>(j) * d + t] / counts[j] - c[t];
      s += diff * diff;
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

}  // namespace kmlab
