#pragma once

#include <vector>

#include "kmlab/dataset.hpp"

namespace kmlab {

// Contrast gamma(c, x): squared distance from x to its nearest codepoint.
double gamma_contrast(const Codebook& codebook, std::span<const double> x);

// Mean contrast over the dataset. Exact (compensated summation).
double empirical_distortion(const Dataset& data, const Codebook& codebook);

// Result of one centroid half-step. Cells with no assigned point keep the
// codepoint of `previous` and are flagged; the resolution policy lives with
// the caller (see lloyd).
struct CentroidUpdate {
  Codebook codebook;
  std::vector<char> empty;  // one flag per cell

  bool any_empty() const {
    for (char e : empty)
      if (e) return true;
    return false;
  }
};

CentroidUpdate centroid_update(const Dataset& data, const Assignment& assignment,
                               const Codebook& previous);

// Max over nonempty cells j of |mean(cell j) - c_j|. Zero identifies an
// element of the empirical stationary set.
double centroid_residual(const Dataset& data, const Codebook& codebook);

struct DistortionEstimate {
  double value = 0.0;
  double std_error = 0.0;      // 0 when the value is exact
  long long n_samples = 0;     // 0 when the value is exact
};

}  // namespace kmlab
