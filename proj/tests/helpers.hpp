#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "kmlab/dataset.hpp"
#include "kmlab/finite_support.hpp"
#include "kmlab/models.hpp"
#include "kmlab/rng.hpp"

namespace kmlab::testing {

inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, double radius = 0.0) {
  Dataset data;
  data.dim = static_cast<int>(rows.front().size());
  for (const auto& row : rows) data.coords.insert(data.coords.end(), row.begin(), row.end());
  double max_norm = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) max_norm = std::max(max_norm, norm(data.point(i)));
  data.enclosing_radius = radius > 0.0 ? radius : max_norm;
  return data;
}

inline Dataset line_dataset(const std::vector<double>& xs, double radius = 0.0) {
  Dataset data;
  data.dim = 1;
  data.coords = xs;
  double max_norm = 0.0;
  for (double x : xs) max_norm = std::max(max_norm, std::abs(x));
  data.enclosing_radius = radius > 0.0 ? radius : max_norm;
  return data;
}

inline Codebook line_codebook(const std::vector<double>& cs) {
  Codebook c;
  c.dim = 1;
  c.coords = cs;
  return c;
}

// the running example: uniform mass on {0, 1, 10, 11}
inline Dataset four_points() { return line_dataset({0.0, 1.0, 10.0, 11.0}, 11.0); }

inline FiniteDistribution four_point_distribution() {
  FiniteDistribution d = FiniteDistribution::uniform_on({0.0, 1.0, 10.0, 11.0}, 1);
  d.enclosing_radius = 11.0;
  return d;
}

// random small dataset for fuzzing; may contain duplicate points
inline Dataset fuzz_dataset(Rng& rng, std::size_t max_n = 40, int max_d = 3) {
  const int d = 1 + static_cast<int>(rng.index(max_d));
  const std::size_t n = 2 + rng.index(max_n - 1);
  Dataset data;
  data.dim = d;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && rng.bernoulli(0.15)) {  // duplicate an earlier point
      const auto p = data.point(rng.index(i));
      data.coords.insert(data.coords.end(), p.begin(), p.end());
      continue;
    }
    for (int t = 0; t < d; ++t) data.coords.push_back(rng.uniform(-5.0, 5.0));
  }
  double max_norm = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) max_norm = std::max(max_norm, norm(data.point(i)));
  data.enclosing_radius = max_norm;
  return data;
}

// random init: points of the dataset, free coordinates, or deliberate
// duplicates
inline Codebook fuzz_init(Rng& rng, const Dataset& data, int k) {
  Codebook c;
  c.dim = data.dim;
  for (int j = 0; j < k; ++j) {
    const double mode = rng.uniform();
    if (mode < 0.5) {
      const auto p = data.point(rng.index(data.size()));
      c.coords.insert(c.coords.end(), p.begin(), p.end());
    } else if (mode < 0.65 && j > 0) {
      const auto p = c.point(static_cast<int>(rng.index(static_cast<std::size_t>(j))));
      std::vector<double> copy(p.begin(), p.end());
      c.coords.insert(c.coords.end(), copy.begin(), copy.end());
    } else {
      for (int t = 0; t < data.dim; ++t) c.coords.push_back(rng.uniform(-5.0, 5.0));
    }
  }
  return c;
}

// random weighted finite distribution on a small support
inline FiniteDistribution fuzz_finite(Rng& rng, std::size_t max_r = 8, int max_d = 2) {
  const int d = 1 + static_cast<int>(rng.index(max_d));
  const std::size_t r = 3 + rng.index(max_r - 2);
  FiniteDistribution dist;
  dist.dim = d;
  for (std::size_t i = 0; i < r; ++i)
    for (int t = 0; t < d; ++t) dist.support.push_back(rng.uniform(-4.0, 4.0));
  dist.weights.resize(r);
  double total = 0.0;
  const bool uniform = rng.bernoulli(0.5);
  for (std::size_t i = 0; i < r; ++i) {
    dist.weights[i] = uniform ? 1.0 : 0.05 + rng.uniform();
    total += dist.weights[i];
  }
  for (double& w : dist.weights) w /= total;
  // exact renormalization so the sum is 1 within 1e-12
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < r; ++i) sum += dist.weights[i];
  dist.weights[r - 1] = 1.0 - sum;
  double max_norm = 0.0;
  for (std::size_t i = 0; i < r; ++i) max_norm = std::max(max_norm, norm(dist.point(i)));
  dist.enclosing_radius = max_norm;
  return dist;
}

// well-separated blobs on the line, centered around the origin
inline Dataset separated_blobs(Rng& rng, int k, std::size_t per_cluster, double gap = 20.0,
                               double spread = 0.5) {
  Dataset data;
  data.dim = 1;
  for (int j = 0; j < k; ++j) {
    const double center = gap * (j - (k - 1) / 2.0);
    for (std::size_t i = 0; i < per_cluster; ++i) {
      data.coords.push_back(center + spread * (2.0 * rng.uniform() - 1.0));
    }
  }
  double max_norm = 0.0;
  for (double x : data.coords) max_norm = std::max(max_norm, std::abs(x));
  data.enclosing_radius = max_norm;
  return data;
}

// Composite-Simpson quadrature of f over [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / (2 * panels);
  double s = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Independent quadrature oracle for the tilted-segment family: distortion of
// a codebook whose codepoint for segment i sits at e1-offset u[i] (no
// orthogonal component).
inline double tilted_segment_distortion_oracle(const MinimaxParams& params,
                                               const std::vector<double>& offsets,
                                               int panels = 20000) {
  const double rho = params.rho();
  double total = 0.0;
  for (int i = 0; i < params.k; ++i) {
    const double sig = params.sigma[i];
    const double lo_density = (1.0 - sig * params.delta) / (2.0 * rho);
    const double hi_density = (1.0 + sig * params.delta) / (2.0 * rho);
    const double u = offsets[i];
    const double below = simpson([&](double s) { return (s - u) * (s - u) * lo_density; }, -rho,
                                 0.0, panels);
    const double above = simpson([&](double s) { return (s - u) * (s - u) * hi_density; }, 0.0,
                                 rho, panels);
    total += (below + above) / params.k;
  }
  return total;
}

// Fine-grid integration oracle for the population classification risk of two
// codebooks under an isotropic (un-truncated in effect) Gaussian mixture.
inline double gmm_classif_risk_grid_oracle(const TruncatedGmmParams& params, const Codebook& a,
                                           const Codebook& b, double half_width, double step) {
  const double var = params.covariance(0)[0];
  double disagree = 0.0;
  double total = 0.0;
  std::vector<double> x(2);
  for (double gx = -half_width; gx <= half_width; gx += step) {
    for (double gy = -half_width; gy <= half_width; gy += step) {
      x[0] = gx;
      x[1] = gy;
      if (gx * gx + gy * gy > params.truncation_radius * params.truncation_radius) continue;
      double density = 0.0;
      for (int j = 0; j < params.k; ++j) {
        const auto m = params.mean(j);
        const double d2 = (gx - m[0]) * (gx - m[0]) + (gy - m[1]) * (gy - m[1]);
        density += params.weights[j] * std::exp(-d2 / (2.0 * var));
      }
      total += density;
      if (assign(x, a) != assign(x, b)) disagree += density;
    }
  }
  return disagree / total;  // normalization cancels on the shared grid
}

}  // namespace kmlab::testing
