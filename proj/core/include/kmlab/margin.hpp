#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kmlab/dataset.hpp"
#include "kmlab/finite_support.hpp"
#include "kmlab/oracle.hpp"

namespace kmlab {

// Distance from x (inside its assigned cell) to the nearest bisector
// hyperplane of the codebook. Throws InputError on duplicate codepoints.
double boundary_distance(std::span<const double> x, const Codebook& codebook);

// Fraction of points with boundary_distance <= t.
double empirical_boundary_mass(const Dataset& data, const Codebook& codebook, double t);
// Exact weighted version.
double finite_boundary_mass(const FiniteDistribution& dist, const Codebook& codebook, double t);

struct MarginCheckResult {
  bool holds = true;
  double first_violation_t = 0.0;  // meaningful only when !holds
};

// Checks p(t) <= B p_min t / (128 M^2) for all t in (0, r0], where p is the
// sup of boundary masses over the supplied optimal codebooks. Evaluated on a
// uniform grid of grid_size points in (0, r0] plus every boundary-distance
// jump in that range, so the verdict is exact for step functions.
MarginCheckResult margin_check(const FiniteDistribution& dist,
                               std::span<const Codebook> optimal, double r0, int grid_size = 512);
MarginCheckResult margin_check(const Dataset& data, std::span<const Codebook> optimal,
                               double B, double p_min, double r0, int grid_size = 512);

// Margin-condition diagnostics. The boundary-mass function is kept as the
// upper envelope over the supplied codebooks, represented by its jumps.
struct MarginDiagnostics {
  double B_hat = 0.0;
  double p_min_hat = 0.0;
  // jump representation of t -> p(t): sorted distances and the mass reached
  // at each jump (inclusive)
  std::vector<double> jump_t;
  std::vector<double> jump_mass;
  double M = 0.0;
  double r0_max = 0.0;   // largest verified grid point of the linear-bound scan
  double kappa0 = 0.0;   // +infinity when no positive margin radius was verified
  std::map<double, bool> clusterable_f;  // empirical diagnostics only

  double boundary_mass(double t) const;  // p(t)
};

// Empirical diagnostics against the (approximate) ERM codebook.
MarginDiagnostics margin_diagnostics(const Dataset& data, const Codebook& erm,
                                     std::span<const double> f_values = {}, int grid_size = 512);
// Exact diagnostics for a finite distribution, sup over the report's optimal
// codebooks; epsilon from the report enters kappa0.
MarginDiagnostics margin_diagnostics(const FiniteDistribution& dist,
                                     const StationaryReport& report, int grid_size = 512);

// Sample clusterability: |c_i - c_j| >= f sqrt(distortion) (1/sqrt(n_i) +
// 1/sqrt(n_j)) for all i != j. Throws InputError when a cell is empty.
bool f_clusterability_check(const Dataset& data, const Codebook& erm, double f);

// premise: p_hat(16 M^2 f / (sqrt(n p_hat_min)) / B_hat) <= p_hat_min;
// conclusion: the f-clusterability check. The premise must never hold
// without the conclusion.
std::pair<bool, bool> empirical_margin_implies_clusterable(const Dataset& data,
                                                           const Codebook& erm, double f);

// Exact mass of {x : 0 <= <x - (c_i+c_j)/2, (c_j-c_i)/r_ij> <= t} inside the
// closed cell V_j.
double pij_mass(const FiniteDistribution& dist, const Codebook& codebook, int i, int j, double t);

struct NecessaryConditionResult {
  bool holds = true;
  double worst_slack = 0.0;       // min over checks of bound - integral
  bool flagged_nonoptimal = false;  // inequalities may legitimately fail then
};

// Slab-integral necessary conditions for optimality, both the one-sided and
// the averaged bound, by exact piecewise-constant integration. t_grid must
// lie in (0, 1/2).
NecessaryConditionResult necessary_condition_check(const FiniteDistribution& dist,
                                                   const Codebook& optimal,
                                                   std::span<const double> t_grid,
                                                   bool verified_optimal = true);

// Linear boundary-mass bound p(r) <= (8k/B) r on the given radii.
bool cor1_check(const FiniteDistribution& dist, const Codebook& optimal, double B,
                std::span<const double> r_grid);

struct VarianceBoundResult {
  bool left_holds = false;     // Var(gamma(c,.) - gamma(c*(c),.)) / (16 M^2) <= |c - c*(c)|^2
  bool right_holds = false;    // |c - c*(c)|^2 <= kappa0 (R(c) - R(c*))
  bool right_checked = false;  // right side asserted only under a verified margin
  double variance_term = 0.0;
  double distance_sq = 0.0;
  double excess = 0.0;
};

VarianceBoundResult variance_bound_check(const FiniteDistribution& dist, const Codebook& codebook,
                                         const StationaryReport& report,
                                         const MarginDiagnostics* diagnostics = nullptr);

// Flat `key = value` serialization consumed by the experiments tooling.
std::string serialize_diagnostics(const MarginDiagnostics& d);
MarginDiagnostics parse_diagnostics(std::istream& in);

}  // namespace kmlab
