// Acceptance suite: one binary, one pass/fail line per criterion.
// Run all criteria with `kmlab_acceptance`, or a single one with
// `kmlab_acceptance --criterion N [--threads T]`.

#include <cmath>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "kmlab/experiments.hpp"
#include "kmlab/classification.hpp"
#include "kmlab/margin.hpp"
#include "kmlab/models.hpp"
#include "kmlab/oracle.hpp"
#include "kmlab/rng.hpp"

using namespace kmlab;

namespace {

int g_threads = static_cast<int>(std::thread::hardware_concurrency());

Model four_point_model() {
  FiniteDistribution dist = FiniteDistribution::uniform_on({0.0, 1.0, 10.0, 11.0}, 1);
  dist.enclosing_radius = 11.0;
  Model model;
  model.family = std::move(dist);
  model.name = "uniform4";
  return model;
}

ExperimentConfig default_config(Model model, int k) {
  ExperimentConfig config;
  config.model = std::move(model);
  config.k = k;
  config.n_grid = {128, 256, 512, 1024, 2048, 4096, 8192};
  config.replicates = 200;
  config.restarts = 20;
  config.base_seed = 20240901;
  config.threads = g_threads;
  return config;
}

bool report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << detail
            << std::endl;
  return pass;
}

// 1. fast distortion rate on the four-point model: log-log slope of the mean
//    excess distortion within [-1.3, -0.7]
bool criterion1() {
  const ExperimentConfig config = default_config(four_point_model(), 2);
  const auto rows = rate_study(config);
  const SlopeFit fit = fit_loglog_slope(rows, "mean_excess_distortion");
  const bool pass = fit.slope >= -1.3 && fit.slope <= -0.7;
  return report(1, pass,
                "fast rate slope = " + std::to_string(fit.slope) + " (target [-1.3, -0.7])");
}

// 2. slow-rate sanity on the hard tilted-segment family with the tilt
//    re-derived per n: slope within [-0.75, -0.25]
bool criterion2() {
  MinimaxParams params = make_minimax(2, 1, 1.0, {}, 1.0);
  params.delta_per_n = true;
  Model model;
  model.family = std::move(params);
  model.name = "minimax_hard";
  const ExperimentConfig config = default_config(std::move(model), 2);
  const auto rows = rate_study(config);
  const SlopeFit fit = fit_loglog_slope(rows, "mean_excess_distortion");
  const bool pass = fit.slope >= -0.75 && fit.slope <= -0.25;
  return report(2, pass,
                "hard-family slope = " + std::to_string(fit.slope) + " (target [-0.75, -0.25])");
}

// 3. distortion-gap closed form on the tilted-segment family: paired
//    Monte-Carlo gaps within 4 standard errors of the closed form for 20
//    seeded sign-vector pairs, and the exact integrator within 1e-12
bool criterion3() {
  const long long n_mc = 1000000;
  bool pass = true;
  double worst_sigmas = 0.0;
  double worst_exact = 0.0;
  Rng rng(333);
  for (int pair = 0; pair < 20; ++pair) {
    const int k = pair % 2 == 0 ? 2 : 4;
    std::vector<int> sigma(k), sigma_prime(k);
    for (int i = 0; i < k; ++i) {
      sigma[i] = rng.bernoulli(0.5) ? 1 : -1;
      sigma_prime[i] = rng.bernoulli(0.5) ? 1 : -1;
    }
    const MinimaxParams params = make_minimax(k, 1, 1.0, sigma, 0.5);
    MinimaxParams alt = params;
    alt.sigma = sigma_prime;
    const Codebook c_sigma = params.optimal_codebook();
    const Codebook c_prime = alt.optimal_codebook();
    const double closed_form = minimax_true_gap(sigma, sigma_prime, params);

    // exact-integrator path
    const double exact_gap =
        minimax_exact_distortion(params, c_prime) - minimax_exact_distortion(params, c_sigma);
    worst_exact = std::max(worst_exact, std::abs(exact_gap - closed_form));
    if (std::abs(exact_gap - closed_form) > 1e-12) pass = false;

    // paired Monte-Carlo estimate of the same gap
    const auto sample_set = sample_minimax(params, n_mc, mix_seed(333, pair));
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < sample_set.dataset.size(); ++i) {
      const double diff = gamma_contrast(c_prime, sample_set.dataset.point(i)) -
                          gamma_contrast(c_sigma, sample_set.dataset.point(i));
      sum += diff;
      sum_sq += diff * diff;
    }
    const double mean = sum / n_mc;
    const double se = std::sqrt(std::max(0.0, (sum_sq / n_mc - mean * mean)) / n_mc);
    const double sigmas = se > 0.0 ? std::abs(mean - closed_form) / se
                                   : (mean == closed_form ? 0.0 : 1e9);
    worst_sigmas = std::max(worst_sigmas, sigmas);
    if (sigmas > 4.0) pass = false;
  }
  return report(3, pass,
                "gap closed form: worst MC deviation " + std::to_string(worst_sigmas) +
                    " s.e. (<= 4), worst exact-path deviation " + std::to_string(worst_exact) +
                    " (<= 1e-12)");
}

struct ClusterabilityOutcome {
  std::vector<RateRow> rows;
  bool bound_satisfied = true;   // criterion 5 tally
  int bound_checked = 0;
  double worst_ratio = 0.0;
};

// shared driver for criteria 4 and 5: clusterability of the four-point
// samples with f = sqrt(p_min n), plus the misclassification bound between
// the Lloyd output from a good init and the multi-start ERM
ClusterabilityOutcome run_clusterability_and_bound() {
  const Model model = four_point_model();
  const auto truth = ground_truth(model, 2);
  const double p_min = truth->p_min;
  ExperimentConfig config = default_config(model, 2);

  ClusterabilityOutcome outcome;
  std::vector<std::vector<double>> passes(config.n_grid.size());
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    const long long n = config.n_grid[g];
    const double f = std::sqrt(p_min * static_cast<double>(n));
    passes[g].resize(config.replicates, 0.0);
    for (int rep = 0; rep < config.replicates; ++rep) {
      const std::uint64_t seed = replicate_seed(config.base_seed, n, rep);
      const SampleWithTruth s = sample(model, n, mix_seed(seed, 2));
      const LloydResult erm =
          multi_start_erm(s.dataset, config.k, config.restarts, mix_seed(seed, 3));
      bool clusterable = false;
      try {
        clusterable = f_clusterability_check(s.dataset, erm.codebook, f);
      } catch (const InputError&) {
        clusterable = false;
      }
      passes[g][rep] = clusterable ? 1.0 : 0.0;

      // criterion 5 on the replicates that qualify: f > 32, good init
      if (!clusterable || f <= 32.0) continue;
      const double erm_distortion = erm.distortion_trace.back();
      if (!(erm_distortion > 0.0)) continue;
      const Codebook init = kmeanspp_init(s.dataset, config.k, mix_seed(seed, 7));
      if (!is_good_init(s.dataset, init, erm_distortion, f)) continue;
      const LloydResult km = run_lloyd(s.dataset, init);
      const ClassifRisk disagreement = classif_risk_empirical(
          partition(s.dataset, km.codebook), partition(s.dataset, erm.codebook), config.k);
      const double bound = 81.0 / (8.0 * f * f) + 1.0 / static_cast<double>(n);
      outcome.worst_ratio = std::max(outcome.worst_ratio, disagreement.value / bound);
      ++outcome.bound_checked;
      if (disagreement.value > bound) outcome.bound_satisfied = false;
    }
  }
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    RateRow row;
    row.n = config.n_grid[g];
    row.replicates = config.replicates;
    row.base_seed = config.base_seed;
    double total = 0.0;
    for (double v : passes[g]) total += v;
    row.clusterable_fraction = total / static_cast<double>(config.replicates);
    row.has_clusterable = true;
    outcome.rows.push_back(row);
  }
  return outcome;
}

bool criterion4(const ClusterabilityOutcome& outcome) {
  bool pass = true;
  std::string detail = "clusterable fractions:";
  for (const auto& row : outcome.rows) {
    if (row.n >= 1024 && row.clusterable_fraction < 0.95) pass = false;
    if (row.n >= 1024)
      detail += " n=" + std::to_string(row.n) + ":" + std::to_string(row.clusterable_fraction);
  }
  return report(4, pass, detail + " (target >= 0.95)");
}

bool criterion5(const ClusterabilityOutcome& outcome) {
  const bool pass = outcome.bound_satisfied && outcome.bound_checked > 0;
  return report(5, pass,
                "misclassification bound checked on " + std::to_string(outcome.bound_checked) +
                    " qualifying replicates, worst ratio " +
                    std::to_string(outcome.worst_ratio) + " (zero violations allowed)");
}

// 6. classification rate on the symmetric planar mixture: slope of the
//    population classification risk within [-0.75, -0.25]
bool criterion6() {
  Model model;
  model.family = TruncatedGmmParams::isotropic(2, 2, {-2.0, 0.0, 2.0, 0.0}, 0.5, {0.5, 0.5}, 8.0);
  model.name = "tgmm_sym";
  ExperimentConfig config = default_config(std::move(model), 2);
  config.replicates = 64;
  config.n_mc = 400000;
  const auto rows = classif_study(config);
  const SlopeFit fit = fit_loglog_slope(rows, "mean_classif_risk");
  const bool pass = fit.slope >= -0.75 && fit.slope <= -0.25;
  return report(6, pass,
                "classification-risk slope = " + std::to_string(fit.slope) +
                    " (target [-0.75, -0.25], rows used " + std::to_string(fit.rows_used) + ")");
}

// 7. property suites
bool criterion7() {
  bool all = true;
  Rng rng(777);

  {  // monotone traces on 10^4 fuzzed instances + fixed-point soundness
    bool monotone = true;
    bool sound = true;
    for (int trial = 0; trial < 10000; ++trial) {
      const int d = 1 + static_cast<int>(rng.index(3));
      const std::size_t n = 2 + rng.index(30);
      Dataset data;
      data.dim = d;
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && rng.bernoulli(0.2)) {
          const auto p = data.point(rng.index(i));
          data.push_back(std::vector<double>(p.begin(), p.end()));
          continue;
        }
        std::vector<double> x(d);
        for (int t = 0; t < d; ++t) x[t] = rng.uniform(-5.0, 5.0);
        data.push_back(x);
      }
      double max_norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) max_norm = std::max(max_norm, norm(data.point(i)));
      data.enclosing_radius = max_norm;

      const int k = 1 + static_cast<int>(rng.index(std::min<std::size_t>(5, n)));
      Codebook init;
      init.dim = d;
      for (int j = 0; j < k; ++j) {
        if (rng.bernoulli(0.6)) {
          const auto p = data.point(rng.index(n));
          init.coords.insert(init.coords.end(), p.begin(), p.end());
        } else {
          for (int t = 0; t < d; ++t) init.coords.push_back(rng.uniform(-5.0, 5.0));
        }
      }
      const LloydResult result = run_lloyd(data, init);
      for (std::size_t i = 1; i < result.distortion_trace.size(); ++i) {
        if (result.distortion_trace[i] > result.distortion_trace[i - 1]) monotone = false;
      }
      if (result.converged && centroid_residual(data, result.codebook) > 1e-12) sound = false;
    }
    std::cout << "  [" << (monotone ? "ok" : "FAIL") << "] monotone distortion traces (10^4 fuzzed runs)\n";
    std::cout << "  [" << (sound ? "ok" : "FAIL") << "] converged implies centroid residual <= 1e-12\n";
    all = all && monotone && sound;
  }

  {  // exact ERM <= multi-start on oracle-feasible instances; equality on the
     // curated well-separated suite
    bool sandwich = true;
    for (int trial = 0; trial < 60; ++trial) {
      const int d = 1 + static_cast<int>(rng.index(2));
      const std::size_t n = 4 + rng.index(7);  // <= 10 points
      Dataset data;
      data.dim = d;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(d);
        for (int t = 0; t < d; ++t) x[t] = rng.uniform(-5.0, 5.0);
        data.push_back(x);
      }
      data.enclosing_radius = 10.0;
      const int k = 2 + static_cast<int>(rng.index(2));
      const auto [oracle, oracle_distortion] = exact_erm(data, k);
      const LloydResult fitted = multi_start_erm(data, k, 20, trial);
      if (oracle_distortion > fitted.distortion_trace.back() + 1e-12) sandwich = false;
    }
    bool curated_equal = true;
    const std::vector<std::vector<double>> suites = {
        {0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 10.0, 10.1, 10.2},
        {-8.0, -8.2, 0.0, 0.3, 9.0, 9.1},
        {1.0, 1.05, 4.0, 4.1, 12.0, 12.2},
    };
    for (const auto& xs : suites) {
      Dataset data;
      data.dim = 1;
      data.coords = xs;
      double max_norm = 0.0;
      for (double x : xs) max_norm = std::max(max_norm, std::abs(x));
      data.enclosing_radius = max_norm;
      const auto [oracle, oracle_distortion] = exact_erm(data, 3);
      const LloydResult fitted = multi_start_erm(data, 3, 50, 9);
      if (std::abs(oracle_distortion - fitted.distortion_trace.back()) > 1e-12)
        curated_equal = false;
    }
    std::cout << "  [" << (sandwich && curated_equal ? "ok" : "FAIL")
              << "] exact ERM <= multi-start, equality on the well-separated suite\n";
    all = all && sandwich && curated_equal;
  }

  {  // structural inequalities epsilon <= B^2/4 and r0_max <= B over
     // enumerated reports with finite epsilon
    bool structural_ok = true;
    int finite_eps = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const int d = 1 + static_cast<int>(rng.index(2));
      const std::size_t r = 3 + rng.index(5);
      FiniteDistribution dist;
      dist.dim = d;
      for (std::size_t i = 0; i < r; ++i)
        for (int t = 0; t < d; ++t) dist.support.push_back(rng.uniform(-4.0, 4.0));
      dist.weights.assign(r, 1.0 / static_cast<double>(r));
      double sum = 0.0;
      for (std::size_t i = 0; i + 1 < r; ++i) sum += dist.weights[i];
      dist.weights[r - 1] = 1.0 - sum;
      double max_norm = 0.0;
      for (std::size_t i = 0; i < r; ++i) max_norm = std::max(max_norm, norm(dist.point(i)));
      dist.enclosing_radius = max_norm;
      const StationaryReport report = stationary_report(dist, 2);
      const MarginDiagnostics diag = margin_diagnostics(dist, report);
      if (std::isfinite(report.epsilon)) {
        ++finite_eps;
        if (report.epsilon > report.B * report.B / 4.0 + 1e-9) structural_ok = false;
      }
      if (diag.r0_max > report.B + 1e-9) structural_ok = false;
    }
    std::cout << "  [" << (structural_ok && finite_eps > 0 ? "ok" : "FAIL")
              << "] epsilon <= B^2/4 and r0_max <= B (" << finite_eps
              << " finite-epsilon reports)\n";
    all = all && structural_ok && finite_eps > 0;
  }

  {  // necessary conditions on oracle-verified optima of 50 fuzzed supports
    bool necessary_ok = true;
    int verified = 0;
    const std::vector<double> t_grid = {0.05, 0.1, 0.2, 0.3, 0.4, 0.45};
    while (verified < 50) {
      const int d = 1 + static_cast<int>(rng.index(2));
      const std::size_t r = 3 + rng.index(5);
      FiniteDistribution dist;
      dist.dim = d;
      for (std::size_t i = 0; i < r; ++i)
        for (int t = 0; t < d; ++t) dist.support.push_back(rng.uniform(-4.0, 4.0));
      dist.weights.assign(r, 1.0 / static_cast<double>(r));
      double sum = 0.0;
      for (std::size_t i = 0; i + 1 < r; ++i) sum += dist.weights[i];
      dist.weights[r - 1] = 1.0 - sum;
      double max_norm = 0.0;
      for (std::size_t i = 0; i < r; ++i) max_norm = std::max(max_norm, norm(dist.point(i)));
      dist.enclosing_radius = max_norm;
      const StationaryReport report = stationary_report(dist, 2);
      const MarginDiagnostics diag = margin_diagnostics(dist, report);
      for (const auto& optimal : report.optimal) {
        ++verified;
        if (!necessary_condition_check(dist, optimal, t_grid).holds) necessary_ok = false;
        std::vector<double> r_grid;
        if (diag.r0_max > 0.0) {
          for (int i = 1; i <= 8; ++i) r_grid.push_back(diag.r0_max * i / 8.0);
          if (!cor1_check(dist, optimal, report.B, r_grid)) necessary_ok = false;
        }
      }
    }
    std::cout << "  [" << (necessary_ok ? "ok" : "FAIL")
              << "] slab necessary conditions and linear boundary bound on " << verified
              << " oracle-verified optima\n";
    all = all && necessary_ok;
  }

  {  // variance bound (left inequality) on 100 fuzzed pairs
    bool variance_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t r = 3 + rng.index(5);
      FiniteDistribution dist;
      dist.dim = 1;
      for (std::size_t i = 0; i < r; ++i) dist.support.push_back(rng.uniform(-4.0, 4.0));
      dist.weights.assign(r, 1.0 / static_cast<double>(r));
      double sum = 0.0;
      for (std::size_t i = 0; i + 1 < r; ++i) sum += dist.weights[i];
      dist.weights[r - 1] = 1.0 - sum;
      double max_norm = 0.0;
      for (std::size_t i = 0; i < r; ++i) max_norm = std::max(max_norm, norm(dist.point(i)));
      dist.enclosing_radius = max_norm;
      const StationaryReport report = stationary_report(dist, 2);
      Codebook c;
      c.dim = 1;
      c.coords = {rng.uniform(-max_norm, max_norm), rng.uniform(-max_norm, max_norm)};
      if (!variance_bound_check(dist, c, report).left_holds) variance_ok = false;
    }
    std::cout << "  [" << (variance_ok ? "ok" : "FAIL")
              << "] variance bound left inequality on 100 fuzzed pairs\n";
    all = all && variance_ok;
  }

  {  // empirical-margin premise implies clusterability, never violated
    bool implication_ok = true;
    for (int trial = 0; trial < 200; ++trial) {
      Dataset data;
      data.dim = 1;
      const bool separated = rng.bernoulli(0.5);
      const std::size_t per = 20 + rng.index(80);
      const double gap = separated ? 20.0 : 2.0;
      for (int j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < per; ++i)
          data.coords.push_back(gap * j + (2.0 * rng.uniform() - 1.0));
      double max_norm = 0.0;
      for (double x : data.coords) max_norm = std::max(max_norm, std::abs(x));
      data.enclosing_radius = max_norm;
      const LloydResult erm = multi_start_erm(data, 2, 10, trial);
      const double f = 0.5 + 3.0 * rng.uniform();
      try {
        const auto [premise, conclusion] =
            empirical_margin_implies_clusterable(data, erm.codebook, f);
        if (premise && !conclusion) implication_ok = false;
      } catch (const InputError&) {
        // empty cell: the statement does not apply
      }
    }
    std::cout << "  [" << (implication_ok ? "ok" : "FAIL")
              << "] empirical-margin premise implies clusterability (200 fuzzed datasets)\n";
    all = all && implication_ok;
  }

  {  // byte-identical CSV across 1, 4 and 16 workers
    ExperimentConfig config = default_config(four_point_model(), 2);
    config.n_grid = {128, 256, 512};
    config.replicates = 16;
    config.restarts = 5;
    config.threads = 1;
    const std::string one = to_csv(rate_study(config));
    config.threads = 4;
    const std::string four = to_csv(rate_study(config));
    config.threads = 16;
    const std::string sixteen = to_csv(rate_study(config));
    const bool deterministic = one == four && four == sixteen;
    std::cout << "  [" << (deterministic ? "ok" : "FAIL")
              << "] byte-identical CSV across 1, 4 and 16 workers\n";
    all = all && deterministic;
  }

  return report(7, all, "property suites (details above)");
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;  // 0 = all
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      criterion = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      g_threads = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: kmlab_acceptance [--criterion N] [--threads T]\n";
      return 1;
    }
  }
  if (g_threads < 1) g_threads = 1;

  try {
    int failures = 0;
    auto run = [&](int index, auto&& fn) {
      if (criterion == 0 || criterion == index) failures += fn() ? 0 : 1;
    };
    run(1, criterion1);
    run(2, criterion2);
    run(3, criterion3);
    if (criterion == 0 || criterion == 4 || criterion == 5) {
      const ClusterabilityOutcome outcome = run_clusterability_and_bound();
      if (criterion == 0 || criterion == 4) failures += criterion4(outcome) ? 0 : 1;
      if (criterion == 0 || criterion == 5) failures += criterion5(outcome) ? 0 : 1;
    }
    run(6, criterion6);
    run(7, criterion7);
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance suite error: " << e.what() << "\n";
    return 2;
  }
}
