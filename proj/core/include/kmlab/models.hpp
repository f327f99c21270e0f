#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kmlab/classification.hpp"
#include "kmlab/dataset.hpp"
#include "kmlab/distortion.hpp"
#include "kmlab/finite_support.hpp"
#include "kmlab/oracle.hpp"

namespace kmlab {

// Gaussian mixture restricted to the ball B(0, M) and renormalized per
// component.
struct TruncatedGmmParams {
  int k = 0;
  int d = 0;
  std::vector<double> means;        // k*d
  std::vector<double> covariances;  // k blocks of d*d, symmetric positive definite
  std::vector<double> weights;      // k, sums to 1
  double truncation_radius = 0.0;   // M, must satisfy M >= 2 max_j |m_j|

  void validate() const;
  std::span<const double> mean(int j) const {
    return {means.data() + static_cast<std::size_t>(j) * d, static_cast<std::size_t>(d)};
  }
  std::span<const double> covariance(int j) const {
    return {covariances.data() + static_cast<std::size_t>(j) * d * d,
            static_cast<std::size_t>(d) * d};
  }
  double sigma_max() const;     // sqrt of the largest covariance eigenvalue
  double sigma_min() const;     // sqrt of the smallest
  double min_mean_gap() const;  // minimum distance between two component means
  Codebook means_codebook() const;

  static TruncatedGmmParams isotropic(int k, int d, std::vector<double> means, double sigma_std,
                                      std::vector<double> weights, double truncation_radius);
};

double tgmm_c1_constant(int k, int d, double eta, double theta_min);
// documented separation predicate: sigma/Btilde small enough for optimal
// codepoints to track the component means
bool tgmm_mean_capture_regime(const TruncatedGmmParams& params, double eta);

// Hard family for rate studies: k tilted uniform segments of half-length rho
// along the first axis around well-separated centers. Cell i carries mass
// 1/k; the offset density is (1 + sigma_i delta)/(2 rho) on [0, rho] and
// (1 - sigma_i delta)/(2 rho) on [-rho, 0].
struct MinimaxParams {
  int k = 0;
  int d = 0;
  double M = 0.0;
  std::vector<int> sigma;  // k entries of +/-1; empty means "draw per sample"
  double delta = 0.0;      // in (0, 1]
  std::vector<double> centers;  // k*d
  bool delta_per_n = false;     // re-derive delta = min(1, sqrt(k)/(2 sqrt(n)))

  double spacing() const;  // Delta = 3M / (4 k^{1/d})
  double rho() const { return spacing() / 8.0; }
  bool concrete() const { return !sigma.empty(); }
  std::span<const double> center(int i) const {
    return {centers.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
  }
  // codepoints z_i + sigma_i (delta rho / 2) e1: the per-cell centroids
  Codebook optimal_codebook() const;
  double optimal_distortion() const;  // rho^2/3 - delta^2 rho^2/4
  void validate() const;
};

// Deterministic grid placement of k centers with pairwise distances >= Delta
// inside B(0, M - Delta/8); throws InputError if the packing fails.
std::vector<double> minimax_centers(int k, int d, double M);
MinimaxParams make_minimax(int k, int d, double M, std::vector<int> sigma, double delta);

// Exact distortion gap between the sign-vector codebooks: R(c_sigma') -
// R(c_sigma) under P_sigma equals (delta^2 rho^2 / k) H(sigma, sigma') with
// H the number of disagreeing coordinates.
double minimax_true_gap(std::span<const int> sigma, std::span<const int> sigma_prime,
                        const MinimaxParams& params);

// Signals that a codebook splits some segment across cells, in which case
// the exact integrator does not apply and the caller must fall back to
// Monte-Carlo.
class IntervalSplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact distortion of a codebook assigning each segment to one codepoint:
// closed-form second moment along e1 plus the squared orthogonal offset.
double minimax_exact_distortion(const MinimaxParams& params, const Codebook& codebook);

struct GroundTruth {
  Codebook optimal;
  double optimal_distortion = 0.0;
  double B = 0.0;
  double p_min = 0.0;
};

struct SampleWithTruth {
  Dataset dataset;  // labels carry the latent component / support index
  std::optional<GroundTruth> truth;
  double rejection_rate = 0.0;  // truncated-GMM eta estimate
};

SampleWithTruth sample_finite(const FiniteDistribution& dist, long long n, std::uint64_t seed,
                              std::optional<int> truth_k = std::nullopt);
SampleWithTruth sample_truncated_gmm(const TruncatedGmmParams& params, long long n,
                                     std::uint64_t seed);
SampleWithTruth sample_minimax(const MinimaxParams& params, long long n, std::uint64_t seed);

// A synthetic distribution together with whatever ground truth is
// analytically known.
struct Model {
  std::variant<FiniteDistribution, TruncatedGmmParams, MinimaxParams> family;
  std::string name;
  std::uint64_t default_seed = 1;
  long long default_n = 1000;

  const FiniteDistribution* as_finite() const { return std::get_if<FiniteDistribution>(&family); }
  const TruncatedGmmParams* as_tgmm() const { return std::get_if<TruncatedGmmParams>(&family); }
  const MinimaxParams* as_minimax() const { return std::get_if<MinimaxParams>(&family); }
  double bounding_radius() const;
};

// Key-value model specification (family = finite | tgmm | minimax).
Model load_model(std::istream& in);
Model load_model_file(const std::string& path);

// Materializes per-n / per-replicate model parameters: applies the
// delta-per-n rule and draws the sign vector when the model spec leaves it random.
Model concretize(const Model& model, long long n, std::uint64_t seed);

SampleWithTruth sample(const Model& model, long long n, std::uint64_t seed);

// Exact population distortion when the model permits: weighted sum for
// finite supports, per-segment closed form for the minimax family.
std::optional<double> exact_distortion(const Model& model, const Codebook& codebook);

// Optimal codebook, optimal distortion, B and p_min where analytically
// known (finite supports via the stationary oracle, minimax in closed form).
std::optional<GroundTruth> ground_truth(const Model& model, int k);

// Monte-Carlo population distortion with deterministic fixed-size substream
// chunking; returns the exact value with zero standard error when the model
// exposes an exact integrator.
DistortionEstimate population_distortion(const Model& model, const Codebook& codebook,
                                         long long n_mc, std::uint64_t seed);

enum class Reference { bayes_means, optimal_codebook };

// The reference partition's codebook, when the model exposes it.
std::optional<Codebook> reference_codebook(const Model& model, Reference ref, int k);

struct PopulationClassifRisk {
  double value = 0.0;
  double std_error = 0.0;  // 0 when exact
  std::vector<int> matching;
};

// Probability that a random point is placed in different cells by the
// codebook and by the reference partition, minimized over permutations on
// the pooled confusion matrix. Exact summation for finite supports,
// Monte-Carlo otherwise.
PopulationClassifRisk classif_risk_population(const Model& model, const Codebook& codebook,
                                              Reference ref, long long n_mc, std::uint64_t seed);

}  // namespace kmlab
