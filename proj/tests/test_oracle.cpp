#include <doctest.h>

#include "helpers.hpp"
#include "kmlab/lloyd.hpp"
#include "kmlab/oracle.hpp"
#include "kmlab/rng.hpp"

using namespace kmlab;
using namespace kmlab::testing;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("exact ERM on the four-point example") {
  const auto [codebook, distortion] = exact_erm(four_points(), 2);
  CHECK(codebook.coords == std::vector<double>{0.5, 10.5});
  CHECK(distortion == doctest::Approx(0.25));
}

TEST_CASE("exact ERM with k = 1 returns the grand mean and variance") {
  const Dataset data = line_dataset({1.0, 2.0, 6.0});
  const auto [codebook, distortion] = exact_erm(data, 1);
  CHECK(codebook.point(0)[0] == doctest::Approx(3.0));
  // oracle: mean squared deviation from the mean
  double variance = 0.0;
  for (double x : {1.0, 2.0, 6.0}) variance += (x - 3.0) * (x - 3.0) / 3.0;
  CHECK(distortion == doctest::Approx(variance));
}

TEST_CASE("exact ERM with k = n is exact interpolation") {
  const Dataset data = line_dataset({2.0, 7.0, 9.0});
  const auto [codebook, distortion] = exact_erm(data, 3);
  CHECK(distortion == 0.0);
}

TEST_CASE("exact ERM guards its instance size") {
  const Dataset data = line_dataset(std::vector<double>(13, 0.0));
  CHECK_THROWS_AS(exact_erm(data, 2), InputError);
  CHECK_THROWS_AS(exact_erm(four_points(), 4), InputError);
}

TEST_CASE("stationary enumeration finds the unique four-point codebook") {
  const auto stationary = enumerate_stationary(four_point_distribution(), 2);
  REQUIRE(stationary.size() == 1);
  CHECK(stationary.front().coords == std::vector<double>{0.5, 10.5});
}

TEST_CASE("stationary enumeration with k = 1 returns the mean") {
  const auto dist = FiniteDistribution::uniform_on({0.0, 1.0}, 1);
  const auto stationary = enumerate_stationary(dist, 1);
  REQUIRE(stationary.size() == 1);
  CHECK(stationary.front().point(0)[0] == doctest::Approx(0.5));
}

TEST_CASE("stationary enumeration finds the mirror pair on {-1,0,1}") {
  const auto dist = FiniteDistribution::uniform_on({-1.0, 0.0, 1.0}, 1);
  const auto stationary = enumerate_stationary(dist, 2);
  REQUIRE(stationary.size() == 2);
  // canonical order sorts codepoints, then codebooks
  CHECK(stationary[0].coords == std::vector<double>{-1.0, 0.5});
  CHECK(stationary[1].coords == std::vector<double>{-0.5, 1.0});
}

TEST_CASE("stationary report on the four-point example") {
  const StationaryReport report = stationary_report(four_point_distribution(), 2);
  REQUIRE(report.optimal.size() == 1);
  CHECK(report.optimal.front().coords == std::vector<double>{0.5, 10.5});
  CHECK(std::isinf(report.epsilon));
  CHECK(report.B == doctest::Approx(10.0));
  CHECK(report.p_min == doctest::Approx(0.5));
  CHECK(report.r_star == doctest::Approx(0.25));
}

TEST_CASE("stationary report classifies the mirror pair as jointly optimal") {
  const auto dist = FiniteDistribution::uniform_on({-1.0, 0.0, 1.0}, 1);
  const StationaryReport report = stationary_report(dist, 2);
  CHECK(report.optimal.size() == 2);
  CHECK(report.B == doctest::Approx(1.5));
  CHECK(report.p_min == doctest::Approx(1.0 / 3.0));
  CHECK(std::isinf(report.epsilon));  // every stationary codebook is optimal
}

TEST_CASE("stationary report with k equal to the support size") {
  const auto dist = FiniteDistribution::uniform_on({1.0, 4.0, 9.0}, 1);
  const StationaryReport report = stationary_report(dist, 3);
  CHECK(report.r_star == 0.0);
  REQUIRE(report.optimal.size() == 1);
  CHECK(report.optimal.front().coords == std::vector<double>{1.0, 4.0, 9.0});
}

TEST_CASE("Lloyd fixed points appear in the stationary enumeration") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const FiniteDistribution dist = fuzz_finite(rng, 6, 2);
    const int k = 2;
    if (dist.size() < 2) continue;
    // dataset = the support itself with weights as multiplicities
    Dataset data;
    data.dim = dist.dim;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const int copies = 1 + static_cast<int>(std::round(dist.weights[i] * 20));
      for (int cnt = 0; cnt < copies; ++cnt) data.push_back(dist.point(i));
    }
    double max_norm = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
      max_norm = std::max(max_norm, norm(data.point(i)));
    data.enclosing_radius = max_norm;

    FiniteDistribution realized;  // the empirical distribution actually sampled
    realized.dim = dist.dim;
    realized.support = dist.support;
    realized.weights.assign(dist.size(), 0.0);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const int copies = 1 + static_cast<int>(std::round(dist.weights[i] * 20));
      realized.weights[i] = static_cast<double>(copies);
    }
    double total = 0.0;
    for (double w : realized.weights) total += w;
    for (double& w : realized.weights) w /= total;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < realized.weights.size(); ++i) sum += realized.weights[i];
    realized.weights.back() = 1.0 - sum;
    realized.enclosing_radius = max_norm;

    const LloydResult run = run_lloyd(data, fuzz_init(rng, data, k));
    if (!run.converged) continue;
    const auto stationary = enumerate_stationary(realized, k);
    const Codebook canon = canonical_codebook(run.codebook);
    bool found = false;
    for (const auto& c : stationary) found = found || codebooks_equal(c, canon, 1e-9);
    CHECK(found);
  }
}

TEST_CASE("exact ERM attains the minimum over stationary codebooks") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const FiniteDistribution dist = fuzz_finite(rng, 6, 1);
    const int k = 2;
    Dataset data;
    data.dim = dist.dim;
    data.coords = dist.support;
    data.enclosing_radius = dist.enclosing_radius;
    FiniteDistribution uniform = FiniteDistribution::uniform_on(dist.support, dist.dim);

    const auto [erm, erm_distortion] = exact_erm(data, k);
    const auto stationary = enumerate_stationary(uniform, k);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : stationary) best = std::min(best, empirical_distortion(data, c));
    CHECK(erm_distortion == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("relabel distance is permutation-invariant") {
  const Codebook a = Codebook::from_rows({{0.0, 0.0}, {1.0, 2.0}, {5.0, 5.0}});
  const Codebook b = Codebook::from_rows({{5.0, 5.0}, {0.0, 0.0}, {1.0, 2.0}});
  CHECK(codebook_distance_relabel(a, b) == doctest::Approx(0.0));
  CHECK(codebook_distance(a, b) > 0.0);
}

TEST_SUITE_END();
