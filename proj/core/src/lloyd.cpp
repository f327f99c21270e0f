#include "kmlab/lloyd.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kmlab/rng.hpp"

namespace kmlab {

namespace {

// Reseeds empty cells onto the points with the largest current contrast.
// Each reseed can only lower the contrast of every point, so the distortion
// stays monotone. Returns the number of cells touched.
int resolve_empty_cells(const Dataset& data, CentroidUpdate& update, EmptyCellPolicy policy) {
  int events = 0;
  for (int j = 0; j < static_cast<int>(update.empty.size()); ++j) {
    if (!update.empty[j]) continue;
    ++events;
    if (policy == EmptyCellPolicy::drop_and_keep) continue;
    std::size_t far_idx = 0;
    double far_gamma = -1.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = gamma_contrast(update.codebook, data.point(i));
      if (g > far_gamma) {
        far_gamma = g;
        far_idx = i;
      }
    }
    auto target = update.codebook.mutable_point(j);
    const auto p = data.point(far_idx);
    for (int t = 0; t < data.dim; ++t) target[t] = p[t];
  }
  return events;
}

struct StepOutcome {
  Codebook codebook;
  Assignment next_assignment;
  bool changed = false;
  int empty_events = 0;
};

StepOutcome step_from_assignment(const Dataset& data, const Assignment& current,
                                 const Codebook& codebook, EmptyCellPolicy policy) {
  StepOutcome out;
  CentroidUpdate update = centroid_update(data, current, codebook);
  out.empty_events = resolve_empty_cells(data, update, policy);
  out.codebook = std::move(update.codebook);
  out.next_assignment = partition(data, out.codebook);
  // fixed point iff the update left the codebook bitwise unchanged
  out.changed = out.codebook.coords != codebook.coords;
  return out;
}

}  // namespace

std::pair<Codebook, bool> lloyd_step(const Dataset& data, const Codebook& codebook,
                                     EmptyCellPolicy policy) {
  if (data.size() == 0) throw InputError("lloyd_step: empty dataset");
  const Assignment current = partition(data, codebook);
  StepOutcome out = step_from_assignment(data, current, codebook, policy);
  return {std::move(out.codebook), out.changed};
}

LloydResult run_lloyd(const Dataset& data, const Codebook& init, const LloydOptions& opts) {
  if (data.size() == 0) throw InputError("run_lloyd: empty dataset");
  if (data.dim != init.dim) throw InputError("run_lloyd: init dimension mismatch");
  if (opts.max_iters < 1) throw InputError("run_lloyd: max_iters must be >= 1");

  LloydResult result;
  Codebook codebook = init;
  Assignment current = partition(data, codebook);
  double previous_distortion = std::numeric_limits<double>::infinity();

  while (result.iterations < opts.max_iters) {
    StepOutcome out = step_from_assignment(data, current, codebook, opts.empty_cell_policy);
    ++result.iterations;
    result.empty_cell_events += out.empty_events;
    codebook = std::move(out.codebook);
    const double distortion = empirical_distortion(data, codebook);
    result.distortion_trace.push_back(distortion);
    if (!out.changed) {
      result.converged = true;
      break;
    }
    current = std::move(out.next_assignment);
    if (opts.tol > 0.0 && result.iterations >= opts.min_iters &&
        previous_distortion - distortion <= opts.tol) {
      break;
    }
    previous_distortion = distortion;
  }
  result.codebook = std::move(codebook);
  return result;
}

Codebook kmeanspp_init(const Dataset& data, int k, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (n == 0) throw InputError("kmeanspp_init: empty dataset");
  if (k < 1) throw InputError("kmeanspp_init: k must be >= 1");

  std::set<std::vector<double>> distinct;
  for (std::size_t i = 0; i < n && distinct.size() < static_cast<std::size_t>(k); ++i) {
    const auto p = data.point(i);
    distinct.emplace(p.begin(), p.end());
  }
  if (distinct.size() < static_cast<std::size_t>(k))
    throw InputError("kmeanspp_init: k exceeds the number of distinct points");

  Rng rng(seed);
  Codebook codebook;
  codebook.dim = data.dim;
  const std::size_t first = rng.index(n);
  const auto fp = data.point(first);
  codebook.coords.assign(fp.begin(), fp.end());

  std::vector<double> min_gamma(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    min_gamma[i] = squared_distance(data.point(i), codebook.point(0));
    total += min_gamma[i];
  }
  while (codebook.k() < k) {
    const std::size_t pick = rng.weighted_index(min_gamma, total);
    const auto p = data.point(pick);
    codebook.coords.insert(codebook.coords.end(), p.begin(), p.end());
    total = 0.0;
    const int last = codebook.k() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = squared_distance(data.point(i), codebook.point(last));
      if (d < min_gamma[i]) min_gamma[i] = d;
      total += min_gamma[i];
    }
  }
  return codebook;
}

LloydResult multi_start_erm(const Dataset& data, int k, int restarts, std::uint64_t seed,
                            const LloydOptions& opts) {
  if (restarts < 1) throw InputError("multi_start_erm: restarts must be >= 1");
  LloydResult best;
  double best_distortion = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    const Codebook init = kmeanspp_init(data, k, seed + static_cast<std::uint64_t>(r));
    LloydResult run = run_lloyd(data, init, opts);
    const double distortion = run.distortion_trace.back();
    if (distortion < best_distortion) {  // ties keep the lower restart index
      best_distortion = distortion;
      best = std::move(run);
    }
  }
  return best;
}

bool is_good_init(const Dataset& data, const Codebook& init, double erm_distortion, double f) {
  if (!(erm_distortion > 0.0))
    throw InputError("is_good_init: undefined for a zero ERM distortion");
  const double ratio = empirical_distortion(data, init) / erm_distortion;
  return ratio < f * f / 128.0 - 1.0;
}

}  // namespace kmlab
