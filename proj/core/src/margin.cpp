#include "kmlab/margin.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "kmlab/distortion.hpp"

namespace kmlab {

namespace {

constexpr double kSlack = 1e-12;

struct WeightedPoints {
  std::span<const double> coords;
  std::span<const double> weights;  // empty means uniform
  std::size_t n = 0;
  int dim = 0;

  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  double weight(std::size_t i) const {
    return weights.empty() ? 1.0 / static_cast<double>(n) : weights[i];
  }
};

WeightedPoints view_of(const Dataset& data) {
  return {data.coords, {}, data.size(), data.dim};
}

WeightedPoints view_of(const FiniteDistribution& dist) {
  return {dist.support, dist.weights, dist.size(), dist.dim};
}

void require_distinct_codepoints(const Codebook& codebook) {
  for (int i = 0; i < codebook.k(); ++i) {
    for (int j = i + 1; j < codebook.k(); ++j) {
      if (squared_distance(codebook.point(i), codebook.point(j)) == 0.0)
        throw InputError("boundary_distance: duplicate codepoints");
    }
  }
}

double boundary_distance_impl(std::span<const double> x, const Codebook& codebook) {
  const int k = codebook.k();
  const int cell = assign(x, codebook);
  const auto cj = codebook.point(cell);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    if (i == cell) continue;
    const auto ci = codebook.point(i);
    const double r = std::sqrt(squared_distance(ci, cj));
    // |<x - (c_i+c_j)/2, (c_j-c_i)/r>|
    double dot = 0.0;
    for (int t = 0; t < codebook.dim; ++t) {
      dot += (x[t] - 0.5 * (ci[t] + cj[t])) * (cj[t] - ci[t]) / r;
    }
    best = std::min(best, std::abs(dot));
  }
  return k > 1 ? best : std::numeric_limits<double>::infinity();
}

// sorted (distance, weight) jumps of t -> mass(boundary distance <= t)
std::vector<std::pair<double, double>> boundary_jumps(const WeightedPoints& points,
                                                      const Codebook& codebook) {
  std::vector<std::pair<double, double>> jumps;
  jumps.reserve(points.n);
  for (std::size_t i = 0; i < points.n; ++i) {
    jumps.emplace_back(boundary_distance_impl(points.point(i), codebook), points.weight(i));
  }
  std::sort(jumps.begin(), jumps.end());
  return jumps;
}

double mass_at(const std::vector<std::pair<double, double>>& jumps, double t) {
  double mass = 0.0;
  for (const auto& [dist, w] : jumps) {
    if (dist > t) break;
    mass += w;
  }
  return mass;
}

// Upper envelope over codebooks, collapsed to unique jump locations.
void build_envelope(const WeightedPoints& points, std::span<const Codebook> codebooks,
                    std::vector<double>& jump_t, std::vector<double>& jump_mass) {
  std::vector<std::vector<std::pair<double, double>>> per_codebook;
  per_codebook.reserve(codebooks.size());
  for (const auto& c : codebooks) per_codebook.push_back(boundary_jumps(points, c));

  std::vector<double> ts;
  for (const auto& jumps : per_codebook)
    for (const auto& [t, w] : jumps) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  jump_t.clear();
  jump_mass.clear();
  double prev = -1.0;
  for (double t : ts) {
    double p = 0.0;
    for (const auto& jumps : per_codebook) p = std::max(p, mass_at(jumps, t));
    if (p > prev) {  // keep only genuine increases of the envelope
      jump_t.push_back(t);
      jump_mass.push_back(p);
      prev = p;
    }
  }
}

double envelope_mass(const std::vector<double>& jump_t, const std::vector<double>& jump_mass,
                     double t) {
  const auto it = std::upper_bound(jump_t.begin(), jump_t.end(), t);
  if (it == jump_t.begin()) return 0.0;
  return jump_mass[static_cast<std::size_t>(it - jump_t.begin()) - 1];
}

MarginCheckResult margin_check_impl(const std::vector<double>& jump_t,
                                    const std::vector<double>& jump_mass, double B, double p_min,
                                    double M, double r0, int grid_size) {
  if (!(r0 > 0.0)) throw InputError("margin_check: r0 must be positive");
  if (grid_size < 1) throw InputError("margin_check: grid_size must be >= 1");
  const double slope = B * p_min / (128.0 * M * M);

  MarginCheckResult result;
  double first = std::numeric_limits<double>::infinity();
  auto check = [&](double t) {
    if (t <= 0.0 || t > r0) return;
    const double p = envelope_mass(jump_t, jump_mass, t);
    if (p > slope * t + kSlack) first = std::min(first, t);
  };
  for (double t : jump_t) check(t);
  for (int i = 1; i <= grid_size; ++i) check(r0 * static_cast<double>(i) / grid_size);
  if (std::isfinite(first)) {
    result.holds = false;
    result.first_violation_t = first;
  }
  return result;
}

// largest grid point of (0, 2M] below every violation of the margin slope
double scan_r0_max(const std::vector<double>& jump_t, const std::vector<double>& jump_mass,
                   double B, double p_min, double M, int grid_size) {
  const double slope = B * p_min / (128.0 * M * M);
  const double range = 2.0 * M;
  double first_violation = std::numeric_limits<double>::infinity();
  auto check = [&](double t) {
    if (t <= 0.0) return;
    const double p = envelope_mass(jump_t, jump_mass, t);
    if (p > slope * t + kSlack) first_violation = std::min(first_violation, t);
  };
  for (double t : jump_t) check(t);
  for (int i = 1; i <= grid_size; ++i) check(range * static_cast<double>(i) / grid_size);

  double r0_max = 0.0;
  for (int i = grid_size; i >= 1; --i) {
    const double t = range * static_cast<double>(i) / grid_size;
    if (t < first_violation) {
      r0_max = t;
      break;
    }
  }
  return r0_max;
}

double kappa0_of(int k, double M, double epsilon, double p_min, double B, double r0) {
  if (!(p_min > 0.0) || !(B > 0.0) || !(r0 > 0.0)) return std::numeric_limits<double>::infinity();
  const double eps_term = std::isfinite(epsilon) && epsilon > 0.0 ? 1.0 / epsilon : 0.0;
  const double margin_term = 64.0 * M * M / (p_min * B * B * r0 * r0);
  return 4.0 * k * M * M * std::max(eps_term, margin_term);
}

struct ErmCellStats {
  std::vector<long long> counts;
  double B_hat = 0.0;
  double p_min_hat = 0.0;
  bool any_empty = false;
};

ErmCellStats erm_cell_stats(const Dataset& data, const Codebook& erm) {
  ErmCellStats stats;
  const Assignment a = partition(data, erm);
  stats.counts.assign(erm.k(), 0);
  for (int c : a.cells) ++stats.counts[c];
  double B = std::numeric_limits<double>::infinity();
  for (int i = 0; i < erm.k(); ++i)
    for (int j = i + 1; j < erm.k(); ++j)
      B = std::min(B, std::sqrt(squared_distance(erm.point(i), erm.point(j))));
  stats.B_hat = erm.k() > 1 ? B : std::numeric_limits<double>::infinity();
  long long min_count = std::numeric_limits<long long>::max();
  for (long long c : stats.counts) min_count = std::min(min_count, c);
  stats.any_empty = min_count == 0;
  stats.p_min_hat = static_cast<double>(min_count) / static_cast<double>(data.size());
  return stats;
}

}  // namespace

double boundary_distance(std::span<const double> x, const Codebook& codebook) {
  if (static_cast<int>(x.size()) != codebook.dim)
    throw InputError("boundary_distance: dimension mismatch");
  require_distinct_codepoints(codebook);
  return boundary_distance_impl(x, codebook);
}

double empirical_boundary_mass(const Dataset& data, const Codebook& codebook, double t) {
  require_distinct_codepoints(codebook);
  const auto view = view_of(data);
  double mass = 0.0;
  for (std::size_t i = 0; i < view.n; ++i) {
    if (boundary_distance_impl(view.point(i), codebook) <= t) mass += view.weight(i);
  }
  return mass;
}

double finite_boundary_mass(const FiniteDistribution& dist, const Codebook& codebook, double t) {
  require_distinct_codepoints(codebook);
  const auto view = view_of(dist);
  double mass = 0.0;
  for (std::size_t i = 0; i < view.n; ++i) {
    if (boundary_distance_impl(view.point(i), codebook) <= t) mass += view.weight(i);
  }
  return mass;
}

MarginCheckResult margin_check(const FiniteDistribution& dist, std::span<const Codebook> optimal,
                               double r0, int grid_size) {
  if (optimal.empty()) throw InputError("margin_check: no optimal codebooks supplied");
  for (const auto& c : optimal) require_distinct_codepoints(c);
  double B = std::numeric_limits<double>::infinity();
  double p_min = std::numeric_limits<double>::infinity();
  for (const auto& c : optimal) {
    for (int i = 0; i < c.k(); ++i)
      for (int j = i + 1; j < c.k(); ++j)
        B = std::min(B, std::sqrt(squared_distance(c.point(i), c.point(j))));
    for (double m : finite_cell_masses(dist, c)) p_min = std::min(p_min, m);
  }
  std::vector<double> jt, jm;
  build_envelope(view_of(dist), optimal, jt, jm);
  return margin_check_impl(jt, jm, B, p_min, dist.enclosing_radius, r0, grid_size);
}

MarginCheckResult margin_check(const Dataset& data, std::span<const Codebook> optimal, double B,
                               double p_min, double r0, int grid_size) {
  if (optimal.empty()) throw InputError("margin_check: no optimal codebooks supplied");
  for (const auto& c : optimal) require_distinct_codepoints(c);
  std::vector<double> jt, jm;
  build_envelope(view_of(data), optimal, jt, jm);
  return margin_check_impl(jt, jm, B, p_min, data.enclosing_radius, r0, grid_size);
}

double MarginDiagnostics::boundary_mass(double t) const {
  return envelope_mass(jump_t, jump_mass, t);
}

MarginDiagnostics margin_diagnostics(const Dataset& data, const Codebook& erm,
                                     std::span<const double> f_values, int grid_size) {
  require_distinct_codepoints(erm);
  MarginDiagnostics d;
  d.M = data.enclosing_radius;
  const auto stats = erm_cell_stats(data, erm);
  d.B_hat = stats.B_hat;
  d.p_min_hat = stats.p_min_hat;
  const Codebook codebooks[] = {erm};
  build_envelope(view_of(data), codebooks, d.jump_t, d.jump_mass);
  d.r0_max = scan_r0_max(d.jump_t, d.jump_mass, d.B_hat, d.p_min_hat, d.M, grid_size);
  d.kappa0 = kappa0_of(erm.k(), d.M, std::numeric_limits<double>::infinity(), d.p_min_hat,
                       d.B_hat, d.r0_max);
  for (double f : f_values) {
    bool ok = false;
    if (!stats.any_empty) ok = f_clusterability_check(data, erm, f);
    d.clusterable_f[f] = ok;
  }
  return d;
}

MarginDiagnostics margin_diagnostics(const FiniteDistribution& dist,
                                     const StationaryReport& report, int grid_size) {
  if (report.optimal.empty()) throw InputError("margin_diagnostics: report has no optimal codebooks");
  MarginDiagnostics d;
  d.M = dist.enclosing_radius;
  d.B_hat = report.B;
  d.p_min_hat = report.p_min;
  build_envelope(view_of(dist), report.optimal, d.jump_t, d.jump_mass);
  d.r0_max = scan_r0_max(d.jump_t, d.jump_mass, d.B_hat, d.p_min_hat, d.M, grid_size);
  d.kappa0 = kappa0_of(report.optimal.front().k(), d.M, report.epsilon, d.p_min_hat, d.B_hat,
                       d.r0_max);
  return d;
}

bool f_clusterability_check(const Dataset& data, const Codebook& erm, double f) {
  const int k = erm.k();
  const Assignment a = partition(data, erm);
  std::vector<long long> counts(k, 0);
  for (int c : a.cells) ++counts[c];
  for (long long c : counts) {
    if (c == 0) throw InputError("f_clusterability_check: empty cell");
  }
  const double root_distortion = std::sqrt(empirical_distortion(data, erm));
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const double gap = std::sqrt(squared_distance(erm.point(i), erm.point(j)));
      const double needed = f * root_distortion *
                            (1.0 / std::sqrt(static_cast<double>(counts[i])) +
                             1.0 / std::sqrt(static_cast<double>(counts[j])));
      if (gap < needed) return false;
    }
  }
  return true;
}

std::pair<bool, bool> empirical_margin_implies_clusterable(const Dataset& data,
                                                           const Codebook& erm, double f) {
  const auto stats = erm_cell_stats(data, erm);
  if (stats.any_empty) throw InputError("empirical_margin_implies_clusterable: empty cell");
  const double M = data.enclosing_radius;
  const double arg = 16.0 * M * M * f /
                     (std::sqrt(static_cast<double>(data.size()) * stats.p_min_hat) * stats.B_hat);
  const bool premise = empirical_boundary_mass(data, erm, arg) <= stats.p_min_hat;
  const bool conclusion = f_clusterability_check(data, erm, f);
  return {premise, conclusion};
}

double pij_mass(const FiniteDistribution& dist, const Codebook& codebook, int i, int j, double t) {
  if (i == j) throw InputError("pij_mass: i and j must differ");
  if (i < 0 || j < 0 || i >= codebook.k() || j >= codebook.k())
    throw InputError("pij_mass: cell index out of range");
  const auto ci = codebook.point(i);
  const auto cj = codebook.point(j);
  const double r = std::sqrt(squared_distance(ci, cj));
  if (r == 0.0) throw InputError("pij_mass: duplicate codepoints");

  double mass = 0.0;
  for (std::size_t s = 0; s < dist.size(); ++s) {
    const auto x = dist.point(s);
    const double dj = squared_distance(x, cj);
    bool in_closed_vj = true;
    for (int l = 0; l < codebook.k() && in_closed_vj; ++l) {
      in_closed_vj = dj <= squared_distance(x, codebook.point(l));
    }
    if (!in_closed_vj) continue;
    double proj = 0.0;
    for (int d = 0; d < dist.dim; ++d) proj += (x[d] - 0.5 * (ci[d] + cj[d])) * (cj[d] - ci[d]) / r;
    proj = std::max(proj, 0.0);  // nonnegative on V_j up to rounding
    if (proj <= t) mass += dist.weights[s];
  }
  return mass;
}

NecessaryConditionResult necessary_condition_check(const FiniteDistribution& dist,
                                                   const Codebook& optimal,
                                                   std::span<const double> t_grid,
                                                   bool verified_optimal) {
  require_distinct_codepoints(optimal);
  for (double t : t_grid) {
    if (!(t > 0.0 && t < 0.5)) throw InputError("necessary_condition_check: t_grid must lie in (0, 1/2)");
  }
  NecessaryConditionResult result;
  result.flagged_nonoptimal = !verified_optimal;
  result.worst_slack = std::numeric_limits<double>::infinity();

  const int k = optimal.k();
  const std::vector<double> closed_masses = finite_closed_cell_masses(dist, optimal);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const auto ci = optimal.point(i);
      const auto cj = optimal.point(j);
      const double r_ij = std::sqrt(squared_distance(ci, cj));
      // projections of the closed-V_j support onto the (c_j - c_i) axis
      std::vector<std::pair<double, double>> projs;
      for (std::size_t s = 0; s < dist.size(); ++s) {
        const auto x = dist.point(s);
        const double dj = squared_distance(x, cj);
        bool in_vj = true;
        for (int l = 0; l < k && in_vj; ++l) in_vj = dj <= squared_distance(x, optimal.point(l));
        if (!in_vj) continue;
        double proj = 0.0;
        for (int d = 0; d < dist.dim; ++d)
          proj += (x[d] - 0.5 * (ci[d] + cj[d])) * (cj[d] - ci[d]) / r_ij;
        projs.emplace_back(std::max(proj, 0.0), dist.weights[s]);
      }
      const double tol = 1e-12 * std::max(1.0, r_ij);
      for (double t : t_grid) {
        const double T = t * r_ij;
        // exact integral of the piecewise-constant slab mass over [0, T]
        double integral = 0.0;
        for (const auto& [proj, w] : projs) {
          if (proj < T) integral += w * (T - proj);
        }
        const double one_sided = 2.0 * t * t * r_ij *
                                 std::min(closed_masses[i] / (1.0 - 2.0 * t),
                                          closed_masses[j] / (1.0 + 2.0 * t));
        const double averaged = t * t * r_ij * (closed_masses[i] + closed_masses[j]) / 2.0;
        const double slack = std::min(one_sided, averaged) - integral;
        result.worst_slack = std::min(result.worst_slack, slack);
        if (integral > one_sided + tol || integral > averaged + tol) result.holds = false;
      }
    }
  }
  return result;
}

bool cor1_check(const FiniteDistribution& dist, const Codebook& optimal, double B,
                std::span<const double> r_grid) {
  require_distinct_codepoints(optimal);
  if (!(B > 0.0)) throw InputError("cor1_check: B must be positive");
  const double k = optimal.k();
  for (double r : r_grid) {
    const double mass = finite_boundary_mass(dist, optimal, r);
    if (mass > 8.0 * k * r / B + kSlack) return false;
  }
  return true;
}

VarianceBoundResult variance_bound_check(const FiniteDistribution& dist, const Codebook& codebook,
                                         const StationaryReport& report,
                                         const MarginDiagnostics* diagnostics) {
  VarianceBoundResult result;
  const auto [closest_idx, distance] = closest_optimal(report, codebook);
  const Codebook& star = report.optimal[closest_idx];
  result.distance_sq = distance * distance;

  // exact two-pass variance of gamma(c,.) - gamma(c*(c),.)
  double mean = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    mean += dist.weights[i] *
            (gamma_contrast(codebook, dist.point(i)) - gamma_contrast(star, dist.point(i)));
  }
  double var = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double g =
        gamma_contrast(codebook, dist.point(i)) - gamma_contrast(star, dist.point(i)) - mean;
    var += dist.weights[i] * g * g;
  }
  const double M = dist.enclosing_radius;
  result.variance_term = var / (16.0 * M * M);
  result.left_holds =
      result.variance_term <= result.distance_sq + 1e-9 * std::max(1.0, result.distance_sq);

  result.excess = finite_distortion(dist, codebook) - report.r_star;
  if (diagnostics != nullptr && std::isfinite(diagnostics->kappa0)) {
    result.right_checked = true;
    result.right_holds = result.distance_sq <= diagnostics->kappa0 * result.excess +
                                                  1e-9 * std::max(1.0, result.distance_sq);
  }
  return result;
}

std::string serialize_diagnostics(const MarginDiagnostics& d) {
  std::ostringstream out;
  out.precision(17);
  out << "B_hat = " << d.B_hat << "\n";
  out << "p_min_hat = " << d.p_min_hat << "\n";
  out << "M = " << d.M << "\n";
  out << "r0_max = " << d.r0_max << "\n";
  out << "kappa0 = " << d.kappa0 << "\n";
  for (const auto& [f, ok] : d.clusterable_f) out << "clusterable_f " << f << " = " << (ok ? 1 : 0) << "\n";
  out << "jumps = " << d.jump_t.size() << "\n";
  for (std::size_t i = 0; i < d.jump_t.size(); ++i) {
    out << "jump " << d.jump_t[i] << " = " << d.jump_mass[i] << "\n";
  }
  return out.str();
}

MarginDiagnostics parse_diagnostics(std::istream& in) {
  MarginDiagnostics d;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "clusterable_f") {
      double f;
      std::string eq;
      int ok;
      if (!(ls >> f >> eq >> ok) || eq != "=") throw InputError("diagnostics: bad clusterable_f line");
      d.clusterable_f[f] = ok != 0;
      continue;
    }
    if (key == "jump") {
      double t, p;
      std::string eq;
      if (!(ls >> t >> eq >> p) || eq != "=") throw InputError("diagnostics: bad jump line");
      d.jump_t.push_back(t);
      d.jump_mass.push_back(p);
      continue;
    }
    std::string eq;
    double value;
    if (!(ls >> eq >> value) || eq != "=") throw InputError("diagnostics: bad line: " + line);
    if (key == "B_hat") d.B_hat = value;
    else if (key == "p_min_hat") d.p_min_hat = value;
    else if (key == "M") d.M = value;
    else if (key == "r0_max") d.r0_max = value;
    else if (key == "kappa0") d.kappa0 = value;
    else if (key == "jumps") { /* count line, informational */ }
    else throw InputError("diagnostics: unknown key " + key);
  }
  return d;
}

}  // namespace kmlab
