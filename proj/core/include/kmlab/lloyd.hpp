#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kmlab/dataset.hpp"
#include "kmlab/distortion.hpp"

namespace kmlab {

enum class EmptyCellPolicy {
  // the point with the largest current contrast becomes the new codepoint
  reseed_farthest,
  // the empty cell keeps its previous codepoint
  drop_and_keep,
};

struct LloydOptions {
  int max_iters = 500;
  // 0 runs to an exact assignment fixed point; > 0 additionally stops once
  // the distortion improvement per iteration drops to tol or below
  double tol = 0.0;
  EmptyCellPolicy empty_cell_policy = EmptyCellPolicy::reseed_farthest;
  int min_iters = 0;
};

struct LloydResult {
  Codebook codebook;
  int iterations = 0;
  std::vector<double> distortion_trace;  // non-increasing, one entry per iteration
  bool converged = false;                // true iff the assignment reached a fixed point
  int empty_cell_events = 0;
};

// One assign-then-centroid update. `changed` is false iff the assignment is
// already a fixed point of the update.
std::pair<Codebook, bool> lloyd_step(const Dataset& data, const Codebook& codebook,
                                     EmptyCellPolicy policy = EmptyCellPolicy::reseed_farthest);

LloydResult run_lloyd(const Dataset& data, const Codebook& init, const LloydOptions& opts = {});

// D^2 seeding: first center uniform over the points, every next center
// sampled proportionally to the current contrast. Requires k distinct points.
Codebook kmeanspp_init(const Dataset& data, int k, std::uint64_t seed);

// Best of `restarts` seeded Lloyd runs by final empirical distortion, ties
// broken by the lower restart index. Restart r uses seed + r.
LloydResult multi_start_erm(const Dataset& data, int k, int restarts, std::uint64_t seed,
                            const LloydOptions& opts = {});

// True iff empirical_distortion(init) / erm_distortion < f^2/128 - 1
// (strict). Throws InputError when erm_distortion is 0: the criterion is
// undefined there and the caller has to decide.
bool is_good_init(const Dataset& data, const Codebook& init, double erm_distortion, double f);

}  // namespace kmlab
